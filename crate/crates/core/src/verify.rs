//! Cross-validation between the simulator and the travelling-wave asymptotics.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::asymptotics::{
    below_zone_log_porosity, inner_c, inner_psi, jump_residual, outer_flux, outer_flux_constant,
    solve_c, solve_outer,
};
use crate::pde::{
    bottom_robin_residual, estimate_wave_speed, hdot, sigma_transform_rates,
    step_predictor_corrector, BasinState, Reactant, Simulation, TimeSeries,
};
use crate::{BasinParams, Error, RawParams, Result, RunConfig};

/// Tolerance of the exact-solution finite-difference residuals.
pub const EXACT_RESIDUAL_TOL: f64 = 1e-6;
/// Tolerance of the outer flux first integral.
pub const FLUX_INTEGRAL_TOL: f64 = 1e-8;
/// Tolerance of the jump-condition defect.
pub const JUMP_TOL: f64 = 1e-6;
/// Tolerance handed to the wave-speed solver.
pub const SPEED_TOL: f64 = 1e-10;
/// Largest relative gap between simulated and asymptotic speed.
pub const SPEED_GAP_TOL: f64 = 0.15;
/// Largest relative spread of `hdot` over the trailing window.
pub const FLATNESS_TOL: f64 = 1e-2;
/// Smallest coefficient of determination of the trailing speed fit.
pub const FIT_QUALITY_MIN: f64 = 0.999;
/// Trailing window used for speed fits and flatness.
pub const WINDOW_FRACTION: f64 = 0.3;
/// Smallest acceptable observed spatial order.
pub const ORDER_MIN: f64 = 1.9;
/// Largest relative change of late `hdot` when `dt` is halved.
pub const DT_HALVING_TOL: f64 = 1e-3;
/// Random points used by the exact-solution residual checks.
pub const RESIDUAL_SAMPLES: usize = 100;
/// Smallest grid of the manufactured-profile ladder.
pub const MANUFACTURED_BASE_NODES: usize = 81;

/// How a check value is compared to its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Passes when `value <= threshold`.
    AtMost,
    /// Passes when `value >= threshold`.
    AtLeast,
}

/// One machine-checkable entry of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    /// Short identifier.
    pub name: String,
    /// Measured value.
    pub value: f64,
    /// Threshold.
    pub tolerance: f64,
    /// Comparison direction.
    pub bound: Bound,
    /// Outcome.
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance` (NaN fails).
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance,
            bound: Bound::AtMost,
            pass: value <= tolerance,
        }
    }

    /// Passes when `value >= threshold` (NaN fails).
    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance: threshold,
            bound: Bound::AtLeast,
            pass: value >= threshold,
        }
    }

    /// Always-failing entry recording an error.
    pub fn failed(name: &str) -> Self {
        Self {
            name: name.to_string(),
            value: f64::NAN,
            tolerance: 0.0,
            bound: Bound::AtMost,
            pass: false,
        }
    }
}

/// Simulated versus asymptotic wave speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedComparison {
    /// Slope of the trailing `(t, h)` fit.
    pub c_num: f64,
    /// Matched asymptotic speed.
    pub c_asym: f64,
    /// `|c_num - c_asym| / c_asym`.
    pub relative_gap: f64,
    /// Relative spread of `hdot` over the trailing window.
    pub flatness: f64,
    /// Coefficient of determination of the fit.
    pub fit_quality: f64,
    /// Depth at the end of the run.
    pub final_h: f64,
}

/// Named checks plus the numbers behind them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    /// Pass/fail entries.
    pub checks: Vec<Check>,
    /// Speed comparison, when a simulation was run.
    pub speed: Option<SpeedComparison>,
    /// Observed convergence orders, `(name, order)`.
    pub orders: Vec<(String, f64)>,
    /// Seam defects of assembled profiles.
    pub seam_defects: Vec<f64>,
    /// Free-form warnings such as "reaction never activated".
    pub flags: Vec<String>,
}

impl VerificationReport {
    /// True when every check passes.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Appends all entries of `other`.
    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        if other.speed.is_some() {
            self.speed = other.speed;
        }
        self.orders.extend(other.orders);
        self.seam_defects.extend(other.seam_defects);
        self.flags.extend(other.flags);
    }

    /// Looks up a check by name.
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Deterministic low-discrepancy points in `[0, 1)^2` (additive recurrence).
fn sample_points(n: usize) -> impl Iterator<Item = (f64, f64)> {
    const G: f64 = 1.324_717_957_244_746; // plastic number
    let (a1, a2) = (1.0 / G, 1.0 / (G * G));
    (1..=n).map(move |i| {
        let k = i as f64;
        ((0.5 + a1 * k) % 1.0, (0.5 + a2 * k) % 1.0)
    })
}

/// Largest centred-difference residual of `Phi_t + lambda e^Phi Phi_z` for the
/// below-zone solution over `n` points of `[0, 5] x [0, 5]`.
pub fn below_zone_residual(params: &BasinParams, n: usize) -> f64 {
    let d = 1e-5;
    sample_points(n)
        .map(|(u, v)| {
            let (z, t) = (5.0 * u + d, 5.0 * v + d);
            let f = |z, t| below_zone_log_porosity(z, t, params);
            let phi_t = (f(z, t + d) - f(z, t - d)) / (2.0 * d);
            let phi_z = (f(z + d, t) - f(z - d, t)) / (2.0 * d);
            (phi_t + params.lambda() * libm::exp(f(z, t)) * phi_z).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest centred-difference residual of `c psi_eta - e^{-eta} psi` for the
/// inner reactant over `n` points with `eta in [-3, 12]`.
pub fn inner_psi_residual(c: f64, c_norm: f64, n: usize) -> f64 {
    let d = 1e-5;
    sample_points(n)
        .map(|(u, _)| {
            let eta = -3.0 + 15.0 * u;
            let dpsi = (inner_psi(eta + d, c, c_norm) - inner_psi(eta - d, c, c_norm)) / (2.0 * d);
            (c * dpsi - libm::exp(-eta) * inner_psi(eta, c, c_norm)).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest deviation of the outer flux invariant from its top-boundary value
/// at speed `c_target`, along the outer profile computed with `c_profile`.
pub fn flux_integral_defect(
    c_profile: f64,
    c_target: f64,
    params: &BasinParams,
    n_points: usize,
) -> Result<f64> {
    let prof = solve_outer(c_profile, params, n_points)?;
    let target = outer_flux_constant(c_target, params);
    Ok(prof
        .phi
        .iter()
        .zip(&prof.dphi)
        .map(|(&p, &dp)| (outer_flux(p, dp, c_profile, params) - target).abs())
        .fold(0.0, f64::max))
}

/// Exact-solution residuals, flux first integral, jump defect and solver agreement.
pub fn residual_battery(params: &BasinParams) -> VerificationReport {
    residual_battery_with_speed(params, None)
}

/// [`residual_battery`] with the profile checks run at `c_profile` instead of
/// the matched speed; the targets still come from the matched speed.
pub fn residual_battery_with_speed(
    params: &BasinParams,
    c_profile: Option<f64>,
) -> VerificationReport {
    let mut report = VerificationReport::default();
    report.checks.push(Check::at_most(
        "below_zone_residual",
        below_zone_residual(params, RESIDUAL_SAMPLES),
        EXACT_RESIDUAL_TOL,
    ));
    let matched = match solve_c(params, SPEED_TOL) {
        Ok(m) => m,
        Err(_) => {
            report.checks.push(Check::failed("solve_c"));
            return report;
        }
    };
    let c = c_profile.unwrap_or(matched.c);
    report.checks.push(Check::at_most(
        "inner_psi_residual",
        inner_psi_residual(c, inner_c(c, params), RESIDUAL_SAMPLES),
        EXACT_RESIDUAL_TOL,
    ));
    report
        .checks
        .push(match flux_integral_defect(c, matched.c, params, 200) {
            Ok(v) => Check::at_most("flux_first_integral", v, FLUX_INTEGRAL_TOL),
            Err(_) => Check::failed("flux_first_integral"),
        });
    report.checks.push(match jump_residual(c, params) {
        Ok(v) => Check::at_most("jump_defect", v.abs(), JUMP_TOL),
        Err(_) => Check::failed("jump_defect"),
    });
    report.checks.push(Check::at_most(
        "bisection_vs_fixed_point",
        (matched.c - matched.c_fixed_point).abs(),
        10.0 * SPEED_TOL,
    ));
    report.checks.push(Check::at_most(
        "matching_residual",
        matched.residual.abs(),
        SPEED_TOL,
    ));
    report
}

/// Runs the simulation and compares its late speed with the matched speed.
pub fn cross_validate_speed(
    params: &BasinParams,
    config: &RunConfig,
) -> Result<VerificationReport> {
    let series = Simulation::new(*params, *config)?.run()?;
    speed_report(params, &series)
}

/// Speed comparison for an existing simulation result.
pub fn speed_report(params: &BasinParams, series: &TimeSeries) -> Result<VerificationReport> {
    let fit = estimate_wave_speed(series, WINDOW_FRACTION)?;
    let matched = solve_c(params, SPEED_TOL)?;
    let final_h = series.final_state.h;
    let flatness = series.hdot_spread(WINDOW_FRACTION);
    let gap = (fit.c_num - matched.c).abs() / matched.c;
    let mut report = VerificationReport::default();
    if final_h < params.zstar() {
        report.flags.push("reaction never activated".to_string());
    }
    report
        .checks
        .push(Check::at_most("speed_gap", gap, SPEED_GAP_TOL));
    report
        .checks
        .push(Check::at_most("hdot_flatness", flatness, FLATNESS_TOL));
    report.checks.push(Check::at_least(
        "fit_quality",
        fit.r_squared,
        FIT_QUALITY_MIN,
    ));
    report.speed = Some(SpeedComparison {
        c_num: fit.c_num,
        c_asym: matched.c,
        relative_gap: gap,
        flatness,
        fit_quality: fit.r_squared,
        final_h,
    });
    Ok(report)
}

/// Constants for the flux-null manufactured profile: same `lambda`, `m`,
/// `phi0`, `beta` as `params`, but no reactant, no yield and no sedimentation,
/// so `phi0 e^{z - h}` is an exact steady state.
pub fn manufactured_params(params: &BasinParams) -> BasinParams {
    let raw = RawParams {
        psi0: 0.0,
        a0: 0.0,
        sdot: 0.0,
        ..params.raw()
    };
    BasinParams::derive(raw).expect("zeroing psi0, a0, sdot keeps parameters valid")
}

/// Flux-null profile `phi0 e^{z - h}` on `n` nodes.
pub fn manufactured_state(params: &BasinParams, n: usize, h: f64) -> BasinState {
    let phi0 = params.phi0();
    BasinState::from_profiles(0.0, h, n, |z| phi0 * libm::exp(z - h), |_| 0.0)
}

/// Max-norm error of one step from the flux-null profile against the exact steady state.
pub fn manufactured_step_error(
    params: &BasinParams,
    config: &RunConfig,
    n: usize,
    h: f64,
) -> Result<f64> {
    let p = manufactured_params(params);
    let state = manufactured_state(&p, n, h);
    let (next, _) = step_predictor_corrector(&state, config.dt, &p, config, Reactant::Absent)?;
    Ok(next
        .phi
        .iter()
        .zip(&state.phi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Max-norm error of the stretched-frame porosity rate on the flux-null
/// profile against the exact `x hdot phi_z = x hdot phi`.
pub fn manufactured_rate_error(
    params: &BasinParams,
    n: usize,
    h: f64,
    hdot_value: f64,
) -> Result<f64> {
    let p = manufactured_params(params);
    let state = manufactured_state(&p, n, h);
    let rates = sigma_transform_rates(&state, &p, hdot_value, crate::params::DEFAULT_EXP_CLAMP)?;
    Ok(rates
        .dphi
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let i = k + 1;
            (r - state.x[i] * hdot_value * state.phi[i]).abs()
        })
        .fold(0.0, f64::max))
}

/// Observed orders `log2(e_k / e_{k+1})` of a halving ladder.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| libm::log2(w[0] / w[1])).collect()
}

fn ladder(levels: usize, base: usize) -> Vec<usize> {
    (0..levels).map(|k| (base - 1) * (1 << k) + 1).collect()
}

/// Bottom Robin residual measured with a third-order four-point stencil.
pub fn robin_residual_cubic(state: &BasinState) -> f64 {
    let p = &state.phi;
    let dz = state.h * state.dx();
    (-11.0 * p[0] + 18.0 * p[1] - 9.0 * p[2] + 2.0 * p[3]) / (6.0 * dz) - p[0]
}

/// Spatial convergence and time-step sensitivity.
///
/// * manufactured flux-null profile: one step and the stretched-frame rates,
///   on `levels` grids halving `dx` from [`MANUFACTURED_BASE_NODES`];
/// * a short full run (`t <= 1`) on `levels` grids ending at `config.n_nodes`,
///   with Richardson orders of the final depth and the bottom Robin residual;
/// * the full run at `dt` and `dt / 2`, comparing the final `hdot`.
pub fn convergence_study(
    params: &BasinParams,
    config: &RunConfig,
    levels: usize,
) -> Result<VerificationReport> {
    if levels < 3 {
        return Err(Error::InvalidConfig {
            field: "levels",
            reason: "need at least three refinement levels",
        });
    }
    let mut report = VerificationReport::default();

    let grids = ladder(levels, MANUFACTURED_BASE_NODES);
    let step_err: Vec<f64> = grids
        .iter()
        .map(|&n| manufactured_step_error(params, config, n, 1.0))
        .collect::<Result<_>>()?;
    let rate_err: Vec<f64> = grids
        .iter()
        .map(|&n| manufactured_rate_error(params, n, 1.0, params.sdot().max(0.5)))
        .collect::<Result<_>>()?;
    for (name, errors) in [
        ("manufactured_step_order", &step_err),
        ("manufactured_rate_order", &rate_err),
    ] {
        let orders = observed_orders(errors);
        let worst = orders.iter().copied().fold(f64::INFINITY, f64::min);
        report.checks.push(Check::at_least(name, worst, ORDER_MIN));
        for o in orders {
            report.orders.push((name.to_string(), o));
        }
    }

    let base = ((config.n_nodes - 1) >> (levels - 1)).max(15) + 1;
    let short = RunConfig {
        t_end: config.t_end.min(1.0),
        ..*config
    };
    let mut depths = Vec::with_capacity(levels);
    let mut robin_scaled: f64 = 0.0;
    let mut phi_max: f64 = 0.0;
    let mut cubic = Vec::with_capacity(levels);
    for n in ladder(levels, base) {
        let series = Simulation::new(
            *params,
            RunConfig {
                n_nodes: n,
                ..short
            },
        )?
        .run()?;
        let s = &series.final_state;
        let dx = s.dx();
        robin_scaled = robin_scaled.max(bottom_robin_residual(s).abs() / (dx * dx));
        phi_max = phi_max.max(s.phi.iter().copied().fold(0.0, f64::max));
        cubic.push(robin_residual_cubic(s).abs());
        depths.push(s.h);
    }
    for o in observed_orders(&cubic) {
        report
            .orders
            .push(("robin_cubic_stencil_order".to_string(), o));
    }
    let diffs: Vec<f64> = depths.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if diffs.windows(2).any(|w| w[1] >= w[0]) {
        report
            .flags
            .push("depth differences not monotone under refinement".to_string());
    }
    for o in observed_orders(&diffs) {
        report.orders.push(("short_run_depth_order".to_string(), o));
    }
    report.checks.push(Check::at_most(
        "robin_residual_over_dx2",
        robin_scaled,
        10.0 * phi_max,
    ));

    let coarse = Simulation::new(*params, *config)?.run()?;
    let fine = Simulation::new(
        *params,
        RunConfig {
            dt: 0.5 * config.dt,
            ..*config
        },
    )?
    .run()?;
    let (a, b) = (
        hdot(&coarse.final_state, params),
        hdot(&fine.final_state, params),
    );
    report.checks.push(Check::at_most(
        "dt_halving_hdot_change",
        ((a - b) / b).abs(),
        DT_HALVING_TOL,
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> BasinParams {
        BasinParams::derive(RawParams::default()).unwrap()
    }

    #[test]
    fn battery_passes_for_defaults() {
        let r = residual_battery(&defaults());
        for c in &r.checks {
            assert!(c.pass, "{c:?}");
        }
        assert_eq!(r.checks.len(), 6);
    }

    #[test]
    fn jump_defect_zero_without_reaction() {
        let p = BasinParams::derive(RawParams {
            a0: 0.0,
            psi0: 0.0,
            ..RawParams::default()
        })
        .unwrap();
        let r = residual_battery(&p);
        assert_eq!(r.check("jump_defect").unwrap().value, 0.0);
    }

    #[test]
    fn perturbed_speed_breaks_flux_integral() {
        let p = defaults();
        let c = solve_c(&p, SPEED_TOL).unwrap().c;
        let dc = 0.01 * c;
        let r = residual_battery_with_speed(&p, Some(c + dc));
        let flux = r.check("flux_first_integral").unwrap();
        assert!(!flux.pass);
        assert!(flux.value >= dc * p.phi0());
    }

    #[test]
    fn sample_points_in_unit_square() {
        let pts: Vec<_> = sample_points(100).collect();
        assert_eq!(pts.len(), 100);
        assert!(pts
            .iter()
            .all(|&(u, v)| (0.0..1.0).contains(&u) && (0.0..1.0).contains(&v)));
    }

    #[test]
    fn observed_order_of_exact_ladder() {
        let o = observed_orders(&[1.0, 0.25, 0.0625]);
        assert_eq!(o, [2.0, 2.0]);
    }

    #[test]
    fn nan_checks_fail() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).pass);
        assert!(!Check::at_least("x", f64::NAN, 1.0).pass);
    }

    #[test]
    fn too_few_levels_rejected() {
        let r = convergence_study(&defaults(), &RunConfig::default(), 2);
        assert!(matches!(
            r,
            Err(Error::InvalidConfig {
                field: "levels",
                ..
            })
        ));
    }
}
