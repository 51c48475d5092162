use alloc::vec::Vec;

use super::*;
use crate::params::DEFAULT_EXP_CLAMP;
use crate::tridiag::Tridiagonal;
use crate::RawParams;

fn params(f: impl FnOnce(&mut RawParams)) -> BasinParams {
    let mut raw = RawParams::default();
    f(&mut raw);
    BasinParams::derive(raw).unwrap()
}

fn small_config() -> RunConfig {
    RunConfig {
        n_nodes: 201,
        t_end: 0.5,
        output_every: 0.01,
        ..RunConfig::default()
    }
}

/// State whose porosity is linear in `z` with slope `g` and equals `phi0` at the top.
fn linear_top(p: &BasinParams, g: f64) -> BasinState {
    let h = 2.0;
    BasinState::from_profiles(0.0, h, 64, |z| p.phi0() + g * (z - h), |_| p.psi0())
}

#[test]
fn uniform_porosity_rate_is_pure_source() {
    let p = params(|_| {});
    let mut s = BasinState::uniform(&p, 101, 1.5);
    s.h = 1.5;
    let r = sigma_transform_rates(&s, &p, 0.8, DEFAULT_EXP_CLAMP).unwrap();
    let yield_ = p.a0() / p.beta();
    for (k, d) in r.dphi.iter().enumerate() {
        let i = k + 1;
        let source = yield_ * reaction_rate_at(&s, &p, i) * s.psi[i];
        assert!(
            (d - source).abs() < 1e-12 * (1.0 + source),
            "node {i}: {d} vs {source}"
        );
    }
}

fn reaction_rate_at(s: &BasinState, p: &BasinParams, i: usize) -> f64 {
    crate::reaction_rate(s.depth(i), s.h, p, DEFAULT_EXP_CLAMP)
}

#[test]
fn zero_reactant_has_zero_rate() {
    let p = params(|_| {});
    let s = BasinState::from_profiles(0.0, 3.0, 80, |z| 0.3 + 0.05 * libm::sin(z), |_| 0.0);
    let r = sigma_transform_rates(&s, &p, 0.6, DEFAULT_EXP_CLAMP).unwrap();
    assert!(r.dpsi.iter().all(|&v| v == 0.0));
}

#[test]
fn non_finite_field_is_reported() {
    let p = params(|_| {});
    let mut s = BasinState::uniform(&p, 40, 1.0);
    s.phi[7] = f64::NAN;
    assert_eq!(
        sigma_transform_rates(&s, &p, 1.0, DEFAULT_EXP_CLAMP),
        Err(Error::NonFinite {
            node: 7,
            term: "phi"
        })
    );
    let s = BasinState::uniform(&p, 40, 1.0);
    assert!(matches!(
        sigma_transform_rates(&s, &p, f64::INFINITY, DEFAULT_EXP_CLAMP),
        Err(Error::NonFinite { .. })
    ));
}

fn flux_null(p: &BasinParams, n: usize, h: f64) -> BasinState {
    let phi0 = p.phi0();
    BasinState::from_profiles(0.0, h, n, |z| phi0 * libm::exp(z - h), |_| 0.0)
}

/// Rates on `phi0 e^{z-h}` must equal the frame term `x hdot phi_z`; returns the max error.
fn flux_null_rate_error(n: usize, hdot_value: f64, expected_sign: f64) -> f64 {
    let p = params(|r| {
        r.a0 = 0.0;
        r.psi0 = 0.0;
    });
    let s = flux_null(&p, n, 1.0);
    let r = sigma_transform_rates(&s, &p, hdot_value, DEFAULT_EXP_CLAMP).unwrap();
    r.dphi
        .iter()
        .enumerate()
        .map(|(k, d)| (d - expected_sign * s.x[k + 1] * hdot_value * s.phi[k + 1]).abs())
        .fold(0.0, f64::max)
}

#[test]
fn flux_null_profile_rates_converge_at_second_order() {
    let errors: Vec<f64> = [81, 161, 321]
        .iter()
        .map(|&n| flux_null_rate_error(n, 0.7, 1.0))
        .collect();
    for w in errors.windows(2) {
        let order = libm::log2(w[0] / w[1]);
        assert!(order >= 1.9, "order {order} from {errors:?}");
    }
}

#[test]
fn frame_correction_sign_matters() {
    // the same profile checked against the opposite frame term misses by O(1)
    let right = flux_null_rate_error(161, 0.7, 1.0);
    let wrong = flux_null_rate_error(161, 0.7, -1.0);
    assert!(right < 1e-4);
    assert!(wrong > 0.1, "{wrong}");
}

#[test]
fn hdot_examples() {
    let p = params(|_| {});
    assert!((hdot(&linear_top(&p, p.phi0()), &p) - p.sdot()).abs() < 1e-12);
    let c = 0.37;
    let g = p.phi0() + (c - p.sdot()) * (1.0 - p.phi0()) / p.lambda();
    assert!((hdot(&linear_top(&p, g), &p) - c).abs() < 1e-12);
    // 1 + (1/0.5) * 1 * (0.25 - 0.5)
    assert!((hdot(&linear_top(&p, 0.25), &p) - 0.5).abs() < 1e-12);
}

#[test]
fn closure_rows() {
    let p = params(|_| {});
    let n = 30;
    let mut sys = Tridiagonal::zeros(n);
    let mut rhs = alloc::vec![0.0; n];
    for i in 0..n {
        sys.lower[i] = -1.0;
        sys.diag[i] = 3.0;
        sys.upper[i] = -1.0;
        rhs[i] = 0.1 * i as f64;
    }
    let h = 2.5;
    apply_boundary_closure(&mut sys, &mut rhs, h, &p);
    let phi = sys.solve(&rhs).unwrap();
    assert_eq!(phi[n - 1], p.phi0());
    let s = BasinState {
        t: 0.0,
        h,
        x: uniform_grid(n),
        phi: phi.clone(),
        psi: alloc::vec![0.0; n],
    };
    assert!(bottom_robin_residual(&s).abs() < 1e-12);
    // interior rows untouched
    let applied = Tridiagonal {
        lower: alloc::vec![-1.0; n],
        diag: alloc::vec![3.0; n],
        upper: alloc::vec![-1.0; n],
    }
    .apply(&phi);
    for i in 1..n - 1 {
        assert!((applied[i] - 0.1 * i as f64).abs() < 1e-12);
    }
}

#[test]
fn exponential_profile_meets_robin_at_second_order() {
    let mut scaled = Vec::new();
    for n in [41, 81, 161] {
        for k in [0.01, 1.0, 7.0] {
            let s = BasinState::from_profiles(0.0, 1.0, n, |z| k * libm::exp(z), |_| 0.0);
            let dx = s.dx();
            scaled.push(bottom_robin_residual(&s).abs() / (k * dx * dx));
        }
    }
    let (lo, hi) = scaled
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    // residual / (K dx^2) is the same constant for every K and grid
    assert!(hi < 1.0 && hi / lo < 1.05, "{scaled:?}");
}

#[test]
fn zero_reactant_stays_zero() {
    let p = params(|r| r.psi0 = 0.0);
    let cfg = small_config();
    let sim = Simulation::new(p, cfg).unwrap();
    let series = sim
        .run_observed(|s| assert!(s.psi.iter().all(|&v| v == 0.0)))
        .unwrap();
    assert!(series.final_state.h > cfg.h0);
}

#[test]
fn shallow_unreactive_run_matches_compaction_only() {
    // h stays below zstar, so the clamped reaction factor never matters
    let p = params(|r| {
        r.a0 = 0.0;
        r.psi0 = 0.0;
        r.zstar = 5.0;
    });
    let cfg = small_config();
    let coupled = Simulation::new(p, cfg).unwrap().run().unwrap();
    let dry = Simulation::new(p, cfg)
        .unwrap()
        .compaction_only()
        .run()
        .unwrap();
    assert!(coupled.final_state.h < p.zstar());
    assert_eq!(coupled.samples, dry.samples);
    assert_eq!(coupled.final_state.phi, dry.final_state.phi);
}

#[test]
fn manufactured_single_step_order() {
    let p = params(|r| {
        r.a0 = 0.0;
        r.psi0 = 0.0;
        r.sdot = 0.0;
    });
    let cfg = RunConfig::default();
    let errors: Vec<f64> = [81, 161, 321]
        .iter()
        .map(|&n| {
            let s = flux_null(&p, n, 1.0);
            let (next, _) =
                step_predictor_corrector(&s, cfg.dt, &p, &cfg, Reactant::Absent).unwrap();
            next.phi
                .iter()
                .zip(&s.phi)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errors.windows(2) {
        assert!(libm::log2(w[0] / w[1]) >= 1.9, "{errors:?}");
    }
}

#[test]
fn accepted_steps_keep_boundary_data_and_positivity() {
    let p = params(|_| {});
    let cfg = RunConfig {
        h0: 1.2,
        ..small_config()
    };
    let mut steps = 0;
    Simulation::new(p, cfg)
        .unwrap()
        .run_observed(|s| {
            steps += 1;
            assert_eq!(s.phi[s.len() - 1], p.phi0());
            assert_eq!(s.psi[s.len() - 1], p.psi0());
            assert!(s.psi.iter().all(|&v| v >= 0.0));
            assert!(s.phi.iter().all(|&v| v > 0.0));
        })
        .unwrap();
    assert!(steps > 50);
}

#[test]
fn reactant_positive_for_huge_steps() {
    let p = params(|r| r.beta = 60.0);
    let cfg = RunConfig {
        n_nodes: 120,
        newton_max: 200,
        ..RunConfig::default()
    };
    let s = BasinState::uniform(&p, cfg.n_nodes, 1.5);
    let mut accepted = 0;
    for dt in [1e-3, 1e-1, 1.0] {
        if let Ok((next, _)) = step_predictor_corrector(&s, dt, &p, &cfg, Reactant::Coupled) {
            assert!(next.psi.iter().all(|&v| v >= 0.0), "dt = {dt}");
            accepted += 1;
        }
    }
    assert!(accepted >= 2, "only {accepted} steps accepted");
}

#[test]
fn short_horizon_gives_initial_sample_only() {
    let p = params(|_| {});
    let cfg = RunConfig {
        t_end: 1e-3,
        dt: 5e-3,
        ..small_config()
    };
    let s = run_simulation(&p, &cfg).unwrap();
    assert_eq!(s.samples.len(), 1);
    assert_eq!(s.samples[0].t, 0.0);
    assert_eq!(s.samples[0].h, cfg.h0);
}

#[test]
fn samples_are_strictly_increasing_and_land_on_cadence() {
    let p = params(|_| {});
    let cfg = small_config();
    let s = Simulation::new(p, cfg)
        .unwrap()
        .snapshots(10)
        .run()
        .unwrap();
    assert!(s.samples.windows(2).all(|w| w[1].t > w[0].t));
    assert_eq!(s.samples.len(), 51);
    assert_eq!(s.last().t, cfg.t_end);
    assert_eq!(s.snapshots.len(), 6);
}

#[test]
fn invalid_config_is_rejected() {
    let p = params(|_| {});
    assert!(run_simulation(
        &p,
        &RunConfig {
            n_nodes: 4,
            ..small_config()
        }
    )
    .is_err());
}

fn series_from(points: impl Iterator<Item = (f64, f64)>) -> TimeSeries {
    let samples: Vec<Sample> = points.map(|(t, h)| Sample { t, h, hdot: 0.0 }).collect();
    let p = params(|_| {});
    TimeSeries {
        samples,
        snapshots: Vec::new(),
        final_state: BasinState::uniform(&p, 16, 1.0),
        stats: RunStats::default(),
    }
}

#[test]
fn speed_fit_of_exact_line() {
    let s = series_from((0..100).map(|i| {
        let t = 0.1 * i as f64;
        (t, 0.5 * t + 1.0)
    }));
    let f = estimate_wave_speed(&s, 0.3).unwrap();
    assert!((f.c_num - 0.5).abs() < 1e-12);
    assert!((f.r_squared - 1.0).abs() < 1e-12);
    assert_eq!(f.samples, 30);
}

#[test]
fn speed_fit_of_constant_depth() {
    let s = series_from((0..40).map(|i| (i as f64, 2.0)));
    let f = estimate_wave_speed(&s, 0.5).unwrap();
    assert_eq!(f.c_num, 0.0);
    assert_eq!(f.r_squared, 1.0);
}

#[test]
fn speed_fit_of_noisy_line() {
    // deterministic noise bounded by 1e-6
    let s = series_from((0..200).map(|i| {
        let t = 0.05 * i as f64;
        (t, 0.5 * t + 1e-6 * libm::sin(12.9898 * i as f64 * 78.233))
    }));
    let f = estimate_wave_speed(&s, 0.3).unwrap();
    assert!((f.c_num - 0.5).abs() <= 1e-4);
}

#[test]
fn speed_fit_needs_ten_samples() {
    let s = series_from((0..20).map(|i| (i as f64, i as f64)));
    assert_eq!(
        estimate_wave_speed(&s, 0.3),
        Err(Error::InsufficientSamples {
            got: 6,
            need: MIN_FIT_SAMPLES
        })
    );
}

#[test]
fn guard_shrinks_with_grid() {
    let p = params(|_| {});
    let coarse = BasinState::uniform(&p, 51, 1.0);
    let fine = BasinState::uniform(&p, 101, 1.0);
    let ratio = step_guard(&coarse, &p) / step_guard(&fine, &p);
    assert!((ratio - 4.0).abs() < 1e-12);
}
