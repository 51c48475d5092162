//! Leading-order travelling-wave solution and the wave-speed matching.
//!
//! In the frame `zeta = z - (h - zstar)` moving with the reaction front the
//! column splits into three regions:
//!
//! * above the front (`zeta > 0`) the reaction is switched off and the
//!   porosity flux has the first integral
//!   `c phi + lambda (phi/phi0)^m (phi_zeta - phi) = c phi0 + (c - sdot)(1 - phi0)`;
//! * inside the front, in the stretched coordinate `eta = beta zeta + ln beta`,
//!   the reactant decays double-exponentially and the log-porosity
//!   `Phi = m ln(phi / phistar)` jumps;
//! * below the front the porosity relaxes to `phistar exp(Phi_inf / m)` with
//!   `Phi_inf = ln(c / lambda)`.
//!
//! Equating the flux invariants across the front gives an implicit scalar
//! equation for `c`, solved by [`solve_c`].

use alloc::vec::Vec;

use crate::ode::{integrate, Tolerances};
use crate::roots::{bisect, expand_bracket, fixed_point};
use crate::{BasinParams, Error, Result};

/// Largest `m ln(phi0/phi)` accepted before the permeability factor is declared stiff.
const STIFF_EXPONENT: f64 = 700.0;

/// Default inner integration window in `eta`.
pub const INNER_SPAN: (f64, f64) = (-10.0, 25.0);

/// Seam half-width in units of the layer width `1 / beta`.
pub const SEAM_LAYERS: f64 = 10.0;

/// Iteration cap for both wave-speed solvers.
pub const MAX_ITERATIONS: usize = 200;

/// Lower end of the wave-speed bracket.
pub const C_MIN: f64 = 1e-6;

/// `c phi0 + (c - sdot)(1 - phi0)`: the flux carried through the basin top at speed `c`.
pub fn outer_flux_constant(c: f64, params: &BasinParams) -> f64 {
    c * params.phi0() + (c - params.sdot()) * (1.0 - params.phi0())
}

/// `c phi + lambda (phi/phi0)^m (phi_zeta - phi)`.
pub fn outer_flux(phi: f64, dphi: f64, c: f64, params: &BasinParams) -> f64 {
    c * phi + params.lambda() * params.permeability(phi) * (dphi - phi)
}

/// `d phi / d zeta` above the front, from solving the flux first integral for the slope.
pub fn outer_ode_rhs(phi: f64, c: f64, params: &BasinParams) -> Result<f64> {
    if phi.is_nan() || phi <= 0.0 {
        return Err(Error::Stiffness {
            value: phi,
            what: "(phi0/phi)^m",
        });
    }
    let exponent = f64::from(params.m()) * libm::log(params.phi0() / phi);
    if exponent > STIFF_EXPONENT {
        return Err(Error::Stiffness {
            value: phi,
            what: "(phi0/phi)^m",
        });
    }
    let phi0 = params.phi0();
    let gain = libm::exp(exponent);
    Ok(phi + (c * (phi0 - phi) + (c - params.sdot()) * (1.0 - phi0)) * gain / params.lambda())
}

/// Outer solution sampled on a `zeta` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterProfile {
    /// Wave speed used.
    pub c: f64,
    /// Increasing coordinates.
    pub zeta: Vec<f64>,
    /// Porosity.
    pub phi: Vec<f64>,
    /// Porosity slope from the first integral.
    pub dphi: Vec<f64>,
    /// Reactant fraction.
    pub psi: Vec<f64>,
}

/// Integrates the outer problem downward from `phi(zstar) = phi0` and samples
/// it at the (increasing) coordinates `zeta`, all of which must be `<= zstar`.
pub fn solve_outer_at(c: f64, params: &BasinParams, zeta: &[f64]) -> Result<OuterProfile> {
    let top = params.zstar();
    let targets: Vec<f64> = zeta.iter().rev().copied().collect();
    let tol = Tolerances {
        rtol: 1e-12,
        atol: 1e-14,
        max_step: 0.02,
    };
    let mut phi = integrate(
        |_, p| outer_ode_rhs(p, c, params),
        top,
        params.phi0(),
        &targets,
        tol,
    )?;
    phi.reverse();
    let carry = params.lambda() / (1.0 - params.phi0());
    let mut dphi = Vec::with_capacity(zeta.len());
    let mut psi = Vec::with_capacity(zeta.len());
    for (&z, &p) in zeta.iter().zip(&phi) {
        if !(p > 0.0 && p <= params.phi0() * (1.0 + 1e-12)) {
            return Err(Error::Domain { at: z, value: p });
        }
        let slope = outer_ode_rhs(p, c, params)?;
        let denominator = c - carry * params.permeability(p) * (slope - p);
        if denominator.abs() < 1e-12 {
            return Err(Error::SingularProfile { zeta: z });
        }
        dphi.push(slope);
        psi.push(params.sdot() * params.psi0() / denominator);
    }
    Ok(OuterProfile {
        c,
        zeta: zeta.to_vec(),
        phi,
        dphi,
        psi,
    })
}

/// Outer solution at `n_points` uniformly spaced nodes on `(0, zstar]`.
pub fn solve_outer(c: f64, params: &BasinParams, n_points: usize) -> Result<OuterProfile> {
    let n = n_points.max(1);
    let zeta: Vec<f64> = (1..=n)
        .map(|j| params.zstar() * j as f64 / n as f64)
        .collect();
    solve_outer_at(c, params, &zeta)
}

/// Log-porosity below the front: `ln((1 + m z) / (1 + m lambda t))`.
pub fn below_zone_log_porosity(z: f64, t: f64, params: &BasinParams) -> f64 {
    let m = f64::from(params.m());
    libm::log((1.0 + m * z) / (1.0 + m * params.lambda() * t))
}

/// `phistar exp(Phi / m)`.
pub fn phi_from_log_porosity(log_phi: f64, params: &BasinParams) -> f64 {
    params.phistar() * libm::exp(log_phi / f64::from(params.m()))
}

/// Far-field log-porosity `ln(c / lambda)` below the front.
pub fn phi_infinity(c: f64, params: &BasinParams) -> f64 {
    libm::log(c / params.lambda())
}

/// Inner coordinate of the basin top, `beta zstar + ln beta`.
pub fn eta_top(params: &BasinParams) -> f64 {
    params.beta() * params.zstar() + libm::log(params.beta())
}

/// Reactant normalisation `C` chosen so that the inner reactant equals `psi0` at the basin top.
pub fn inner_c(c: f64, params: &BasinParams) -> f64 {
    params.psi0() * libm::exp(libm::exp(-eta_top(params)) / c)
}

/// Inner reactant `C exp(-(1/c) e^{-eta})`.
pub fn inner_psi(eta: f64, c: f64, c_norm: f64) -> f64 {
    c_norm * libm::exp(-libm::exp(-eta) / c)
}

/// Constants of the once-integrated inner porosity equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerConstants {
    /// Wave speed.
    pub c: f64,
    /// `ln(c / lambda)`.
    pub phi_inf: f64,
    /// `c phistar Phi_inf - lambda phistar exp(Phi_inf)`.
    pub b: f64,
    /// Reactant normalisation.
    pub c_norm: f64,
    /// Full jump `c a0 C / A`.
    pub jump: f64,
}

impl InnerConstants {
    /// Constants for speed `c` and normalisation `c_norm`.
    pub fn new(c: f64, params: &BasinParams, c_norm: f64) -> Self {
        let phi_inf = phi_infinity(c, params);
        let ps = params.phistar();
        let b = c * ps * phi_inf - params.lambda() * ps * libm::exp(phi_inf);
        let jump = c * params.a0() * c_norm / params.a_ratio();
        Self {
            c,
            phi_inf,
            b,
            c_norm,
            jump,
        }
    }

    /// Fraction of the reactant consumed below `eta`: `exp(-(1/c) e^{-eta})`.
    pub fn released(&self, eta: f64) -> f64 {
        libm::exp(-libm::exp(-eta) / self.c)
    }

    /// `d Phi / d eta`.
    pub fn rhs(&self, eta: f64, log_phi: f64, params: &BasinParams) -> Result<f64> {
        if log_phi < -STIFF_EXPONENT {
            return Err(Error::Stiffness {
                value: log_phi,
                what: "exp(Phi)",
            });
        }
        // 1 + (B - c phistar Phi - jump * released) / (lambda phistar e^Phi), written
        // as deviations from Phi_inf so that Phi_inf is an exact fixed point
        let ps = params.phistar();
        let scale = params.lambda() * ps;
        let e = libm::exp(log_phi);
        let numerator = scale * (e - libm::exp(self.phi_inf))
            + self.c * ps * (self.phi_inf - log_phi)
            - self.jump * self.released(eta);
        Ok(numerator / (scale * e * params.a_ratio()))
    }

    /// `c phistar Phi + lambda phistar e^Phi (A Phi_eta - 1)`.
    pub fn bracket(&self, log_phi: f64, dlog_phi: f64, params: &BasinParams) -> f64 {
        let ps = params.phistar();
        self.c * ps * log_phi
            + params.lambda() * ps * libm::exp(log_phi) * (params.a_ratio() * dlog_phi - 1.0)
    }
}

/// Inner solution sampled on a uniform `eta` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerProfile {
    /// Constants used.
    pub constants: InnerConstants,
    /// Increasing coordinates.
    pub eta: Vec<f64>,
    /// Log-porosity `Phi`.
    pub log_phi: Vec<f64>,
    /// Reactant.
    pub psi: Vec<f64>,
}

/// Integrates the inner log-porosity equation upward from `Phi = Phi_inf` at
/// `eta_span.0` and samples it at the coordinates `eta` (increasing, starting at or above `eta_span.0`).
pub fn inner_log_porosity_at(
    c: f64,
    params: &BasinParams,
    c_norm: f64,
    start: f64,
    eta: &[f64],
) -> Result<InnerProfile> {
    let k = InnerConstants::new(c, params, c_norm);
    let tol = Tolerances {
        rtol: 1e-12,
        atol: 1e-14,
        max_step: 0.1,
    };
    let log_phi = integrate(|e, p| k.rhs(e, p, params), start, k.phi_inf, eta, tol)?;
    let psi = eta.iter().map(|&e| inner_psi(e, c, c_norm)).collect();
    Ok(InnerProfile {
        constants: k,
        eta: eta.to_vec(),
        log_phi,
        psi,
    })
}

/// Inner solution at `n` uniformly spaced points of `eta_span`.
pub fn inner_log_porosity(
    c: f64,
    params: &BasinParams,
    c_norm: f64,
    eta_span: (f64, f64),
    n: usize,
) -> Result<InnerProfile> {
    let (lo, hi) = eta_span;
    let n = n.max(2);
    let eta: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    inner_log_porosity_at(c, params, c_norm, lo, &eta)
}

/// Defect of the jump condition over `eta_span`.
///
/// The bracket `c phistar Phi + lambda phistar e^Phi (A Phi_eta - 1)` is
/// evaluated at both ends of the integrated profile, with `Phi_eta` taken by
/// second-order one-sided differences of the samples; the returned value is
/// its increase minus `-c a0 C / A`.
pub fn jump_residual_on(c: f64, params: &BasinParams, eta_span: (f64, f64)) -> Result<f64> {
    let c_norm = inner_c(c, params);
    let (lo, hi) = eta_span;
    let d = 1e-2;
    let eta = [lo, lo + d, lo + 2.0 * d, hi - 2.0 * d, hi - d, hi];
    let prof = inner_log_porosity_at(c, params, c_norm, lo, &eta)?;
    let p = &prof.log_phi;
    let slope_lo = (4.0 * (p[1] - p[0]) - (p[2] - p[0])) / (2.0 * d);
    let slope_hi = (4.0 * (p[5] - p[4]) - (p[5] - p[3])) / (2.0 * d);
    let k = &prof.constants;
    let rise = k.bracket(p[5], slope_hi, params) - k.bracket(p[0], slope_lo, params);
    Ok(rise + k.jump)
}

/// [`jump_residual_on`] over [`INNER_SPAN`].
pub fn jump_residual(c: f64, params: &BasinParams) -> Result<f64> {
    jump_residual_on(c, params, INNER_SPAN)
}

/// Denominator of the fixed-point form, `1 + phistar - phistar ln(c/lambda) + a0 C(c) / A`.
fn speed_denominator(c: f64, params: &BasinParams) -> f64 {
    let ps = params.phistar();
    1.0 + ps - ps * phi_infinity(c, params) + params.a0() * inner_c(c, params) / params.a_ratio()
}

/// Matching residual `c * denominator(c) - sdot (1 - phi0)`; zero at the wave speed.
pub fn matching_residual(c: f64, params: &BasinParams) -> f64 {
    c * speed_denominator(c, params) - params.sdot() * (1.0 - params.phi0())
}

/// Fixed-point map `c -> sdot (1 - phi0) / denominator(c)`.
pub fn speed_map(c: f64, params: &BasinParams) -> f64 {
    params.sdot() * (1.0 - params.phi0()) / speed_denominator(c, params)
}

/// Solved wave speed with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchResult {
    /// Wave speed (bisection answer).
    pub c: f64,
    /// `ln(c / lambda)`.
    pub phi_inf: f64,
    /// Inner reactant normalisation.
    pub c_norm: f64,
    /// Inner integration constant `c phistar Phi_inf - lambda phistar exp(Phi_inf)`.
    pub b: f64,
    /// Matching residual at `c`.
    pub residual: f64,
    /// Bisection iterations.
    pub iterations: usize,
    /// Bracket handed to bisection.
    pub bracket: (f64, f64),
    /// Fixed-point answer.
    pub c_fixed_point: f64,
    /// Fixed-point iterations.
    pub fixed_point_iterations: usize,
}

/// Smallest admissible speed: `max(C_MIN, exp(-eta_top))`.
///
/// Below `exp(-eta_top)` the reaction layer would sit above the basin top and
/// `C` grows double-exponentially, producing a spurious root.
pub fn speed_floor(params: &BasinParams) -> f64 {
    C_MIN.max(libm::exp(-eta_top(params)))
}

/// Solves the matching equation for the wave speed.
///
/// Bisection on [`matching_residual`] over `[lo, hi]`, with `hi` doubled
/// from `sdot` until the residual changes sign (at most `1e3 sdot`), is the
/// answer; an independent fixed-point iteration of [`speed_map`] must agree
/// to `10 tol`.
pub fn solve_c(params: &BasinParams, tol: f64) -> Result<MatchResult> {
    let f = |c: f64| matching_residual(c, params);
    let sdot = params.sdot();
    if sdot == 0.0 {
        return Err(Error::NoRoot {
            lo: 0.0,
            hi: 0.0,
            r_lo: 0.0,
            r_hi: 0.0,
        });
    }
    let bracket = expand_bracket(f, speed_floor(params), sdot, 2.0, 1e3 * sdot)?;
    let root = bisect(f, bracket.0, bracket.1, tol, tol, MAX_ITERATIONS)?;
    let fixed = fixed_point(
        |c| speed_map(c, params),
        bracket.1.min(sdot),
        tol,
        MAX_ITERATIONS,
    )?;
    if (fixed.x - root.x).abs() > 10.0 * tol {
        return Err(Error::NoConvergence {
            iterations: fixed.iterations,
            residual: (fixed.x - root.x).abs(),
        });
    }
    let c = root.x;
    let k = InnerConstants::new(c, params, inner_c(c, params));
    Ok(MatchResult {
        c,
        phi_inf: k.phi_inf,
        c_norm: k.c_norm,
        b: k.b,
        residual: root.residual,
        iterations: root.iterations,
        bracket,
        c_fixed_point: fixed.x,
        fixed_point_iterations: fixed.iterations,
    })
}

/// Region tag of a travelling-wave node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Above the reaction front: outer quadrature.
    OuterAbove,
    /// Inside the reaction front: stretched inner solution.
    Inner,
    /// Below the front: far-field limit.
    Below,
}

impl Region {
    /// Label used in output files.
    pub fn label(self) -> &'static str {
        match self {
            Region::OuterAbove => "outer-above",
            Region::Inner => "inner",
            Region::Below => "below",
        }
    }
}

/// Composite travelling-wave profile on `[-zstar, zstar]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TravellingWaveProfile {
    /// Wave speed.
    pub c: f64,
    /// Increasing coordinates relative to the front.
    pub zeta: Vec<f64>,
    /// Porosity.
    pub phi: Vec<f64>,
    /// Reactant.
    pub psi: Vec<f64>,
    /// Region of each node.
    pub region: Vec<Region>,
    /// Seam half-width: nodes with `|zeta| <= seam` are inner.
    pub seam: f64,
    /// `|phi_outer - phi_inner| / phi_outer` at `zeta = seam`.
    pub seam_defect: f64,
}

/// Stitches the outer, inner and far-field solutions for `matched` on `n` nodes.
pub fn build_wave_profile(
    matched: &MatchResult,
    params: &BasinParams,
    n: usize,
) -> Result<TravellingWaveProfile> {
    let c = matched.c;
    let beta = params.beta();
    let ln_beta = libm::log(beta);
    let top = params.zstar();
    let seam = (SEAM_LAYERS / beta).min(top);
    let n = n.max(3);
    let zeta: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 == n {
                top
            } else {
                -top + 2.0 * top * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let region: Vec<Region> = zeta
        .iter()
        .map(|&z| {
            if z > seam {
                Region::OuterAbove
            } else if z >= -seam {
                Region::Inner
            } else {
                Region::Below
            }
        })
        .collect();

    let mut outer_z: Vec<f64> = alloc::vec![seam];
    outer_z.extend(
        zeta.iter()
            .zip(&region)
            .filter(|(_, r)| **r == Region::OuterAbove)
            .map(|(z, _)| *z),
    );
    let outer = solve_outer_at(c, params, &outer_z)?;

    let to_eta = |z: f64| beta * z + ln_beta;
    let mut inner_eta: Vec<f64> = zeta
        .iter()
        .zip(&region)
        .filter(|(_, r)| **r == Region::Inner)
        .map(|(z, _)| to_eta(*z))
        .collect();
    inner_eta.push(to_eta(seam));
    let start = INNER_SPAN.0.min(to_eta(-seam));
    let inner = inner_log_porosity_at(c, params, matched.c_norm, start, &inner_eta)?;

    let deep_phi = phi_from_log_porosity(matched.phi_inf, params);
    let mut phi = Vec::with_capacity(n);
    let mut psi = Vec::with_capacity(n);
    let (mut oi, mut ii) = (1usize, 0usize);
    for (&z, r) in zeta.iter().zip(&region) {
        match r {
            Region::Below => {
                phi.push(deep_phi);
                psi.push(inner_psi(to_eta(z), c, matched.c_norm));
            }
            Region::Inner => {
                phi.push(phi_from_log_porosity(inner.log_phi[ii], params));
                psi.push(inner.psi[ii]);
                ii += 1;
            }
            Region::OuterAbove => {
                phi.push(outer.phi[oi]);
                psi.push(outer.psi[oi]);
                oi += 1;
            }
        }
    }
    let outer_seam = outer.phi[0];
    let inner_seam = phi_from_log_porosity(*inner.log_phi.last().expect("seam sample"), params);
    let seam_defect = (outer_seam - inner_seam).abs() / outer_seam;
    Ok(TravellingWaveProfile {
        c,
        zeta,
        phi,
        psi,
        region,
        seam,
        seam_defect,
    })
}
