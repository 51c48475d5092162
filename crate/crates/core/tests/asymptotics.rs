use compaction_core::asymptotics::{
    build_wave_profile, inner_c, jump_residual_on, outer_flux, outer_flux_constant,
    phi_from_log_porosity, solve_c, solve_outer, speed_map, Region,
};
use compaction_core::{BasinParams, RawParams};
use proptest::prelude::*;

const C_DEFAULT: f64 = 0.249_449_628_821_332_7;
const C_PURE: f64 = 0.265_931_083_080_393;

fn params(raw: RawParams) -> BasinParams {
    BasinParams::derive(raw).unwrap()
}

/// Independent slope of the outer problem: solves the flux first integral directly.
fn slope(phi: f64, c: f64, raw: &RawParams) -> f64 {
    let k = (phi / raw.phi0).powi(raw.m as i32);
    let q = c * raw.phi0 + (c - raw.sdot) * (1.0 - raw.phi0);
    phi + (q - c * phi) / (raw.lambda * k)
}

fn rk4_down(c: f64, raw: &RawParams, steps: usize) -> Vec<f64> {
    let h = -raw.zstar / steps as f64;
    let mut phi = raw.phi0;
    let mut out = vec![phi];
    for _ in 0..steps {
        let k1 = slope(phi, c, raw);
        let k2 = slope(phi + 0.5 * h * k1, c, raw);
        let k3 = slope(phi + 0.5 * h * k2, c, raw);
        let k4 = slope(phi + h * k3, c, raw);
        phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(phi);
    }
    out
}

#[test]
fn speed_matches_frozen_oracle() {
    let m = solve_c(&params(RawParams::default()), 1e-12).unwrap();
    assert!((m.c - C_DEFAULT).abs() < 1e-10, "{}", m.c);
    assert!(m.bracket.0 < m.c && m.c < m.bracket.1);
    let pure = solve_c(
        &params(RawParams {
            a0: 0.0,
            psi0: 0.0,
            ..RawParams::default()
        }),
        1e-12,
    )
    .unwrap();
    assert!((pure.c - C_PURE).abs() < 1e-10, "{}", pure.c);
}

#[test]
fn fixed_point_contracts_quickly_from_a_nearby_guess() {
    let p = params(RawParams::default());
    let mut c = 0.35;
    for _ in 0..6 {
        c = speed_map(c, &p);
    }
    assert!((c - C_DEFAULT).abs() < 1e-4, "{c}");
}

#[test]
fn speed_rejects_zero_sedimentation() {
    assert!(solve_c(
        &params(RawParams {
            sdot: 0.0,
            ..RawParams::default()
        }),
        1e-10
    )
    .is_err());
}

#[test]
fn outer_profile_agrees_with_fine_rk4() {
    let raw = RawParams::default();
    let p = params(raw);
    let n = 50;
    let prof = solve_outer(C_DEFAULT, &p, n).unwrap();
    let fine = rk4_down(C_DEFAULT, &raw, 10 * n);
    for (j, &phi) in prof.phi.iter().enumerate() {
        // prof.zeta[j] = zstar (j + 1) / n sits 10 (n - 1 - j) fine steps below the top
        let reference = fine[10 * (n - 1 - j)];
        assert!(
            (phi - reference).abs() < 1e-9,
            "node {j}: {phi} vs {reference}"
        );
    }
    assert_eq!(*prof.phi.last().unwrap(), raw.phi0);
}

#[test]
fn outer_profile_preserves_flux_and_compacts_downward() {
    let p = params(RawParams::default());
    let prof = solve_outer(C_DEFAULT, &p, 200).unwrap();
    let q = outer_flux_constant(C_DEFAULT, &p);
    for j in 0..prof.phi.len() {
        assert!((outer_flux(prof.phi[j], prof.dphi[j], C_DEFAULT, &p) - q).abs() <= 1e-8);
        assert!(prof.psi[j] > 0.0);
    }
    assert!(prof.phi.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn jump_is_reproduced_on_a_shorter_inner_span() {
    let p = params(RawParams::default());
    let c = solve_c(&p, 1e-12).unwrap().c;
    assert!(jump_residual_on(c, &p, (-10.0, 12.0)).unwrap().abs() <= 1e-6);
}

#[test]
fn wave_profile_limits_and_regions() {
    let p = params(RawParams::default());
    let m = solve_c(&p, 1e-12).unwrap();
    let prof = build_wave_profile(&m, &p, 401).unwrap();
    assert_eq!(prof.zeta.len(), 401);
    assert_eq!(*prof.zeta.last().unwrap(), p.zstar());
    assert_eq!(*prof.phi.last().unwrap(), p.phi0());
    let deep = phi_from_log_porosity(m.phi_inf, &p);
    assert_eq!(prof.phi[0], deep);
    assert!(
        prof.psi[0] < 1e-12,
        "reactant exhausted deep: {}",
        prof.psi[0]
    );
    assert_eq!(prof.region[0], Region::Below);
    assert_eq!(*prof.region.last().unwrap(), Region::OuterAbove);
    assert!(prof.region.contains(&Region::Inner));
    assert!(prof
        .phi
        .iter()
        .chain(&prof.psi)
        .all(|v| v.is_finite() && *v >= 0.0));
    assert!((inner_c(m.c, &p) - m.c_norm).abs() == 0.0);
}

/// The composite should join within five reaction lengths. The matching
/// condition conflicts with solid conservation at the default parameters,
/// so the outer and inner porosities disagree at the seam by about 0.42.
#[test]
#[ignore = "seam defect is 0.42 against a 5/beta = 0.24 target; see README"]
fn wave_profile_seam_defect_within_five_reaction_lengths() {
    let p = params(RawParams::default());
    let m = solve_c(&p, 1e-12).unwrap();
    let prof = build_wave_profile(&m, &p, 401).unwrap();
    assert!(prof.seam_defect <= 5.0 / p.beta(), "{}", prof.seam_defect);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn speed_grows_with_sedimentation(s1 in 0.2f64..3.0, ds in 0.05f64..1.0) {
        let lo = solve_c(&params(RawParams { sdot: s1, ..RawParams::default() }), 1e-12).unwrap().c;
        let hi = solve_c(&params(RawParams { sdot: s1 + ds, ..RawParams::default() }), 1e-12).unwrap().c;
        prop_assert!(hi > lo);
    }

    #[test]
    fn matched_speed_is_a_fixed_point(beta in 10.0f64..40.0, psi0 in 0.0f64..0.4, a0 in 0.0f64..2.0) {
        let p = params(RawParams { beta, psi0, a0, ..RawParams::default() });
        let m = solve_c(&p, 1e-12).unwrap();
        prop_assert!((speed_map(m.c, &p) - m.c).abs() < 1e-9);
    }
}
