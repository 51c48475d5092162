//! Implicit predictor/corrector time step.
//!
//! Predictor: backward Euler with coefficients, reaction factor and `hdot`
//! frozen at the old level. Each corrector sweep re-evaluates them at the
//! average of the old state and the latest iterate and solves the
//! Crank–Nicolson (`theta = 1/2`) porosity system. The reactant is first
//! multiplied by `exp(-R dt)` and then transported implicitly, so it stays
//! non-negative for any `dt`; the water released is exactly what that
//! factor removed.

use alloc::vec::Vec;

use super::discrete::{apply_boundary_closure, hdot_from, phi_stencil, psi_stencil, Coefficients};
use super::BasinState;
use crate::tridiag::Tridiagonal;
use crate::{BasinParams, Error, Result, RunConfig};

/// Whether the reactant field is carried along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reactant {
    /// Full coupled porosity/reactant system.
    Coupled,
    /// Porosity only; `psi` is left untouched and releases no water.
    Absent,
}

/// Diagnostics of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// Corrector sweeps performed.
    pub sweeps: usize,
    /// Largest relative update of the final sweep.
    pub last_update: f64,
    /// Trapezoidal boundary speed used to advance `h`.
    pub hdot: f64,
}

struct Level {
    phi: Vec<f64>,
    psi: Vec<f64>,
    h: f64,
    hdot: f64,
}

fn solve_reactant(
    old: &BasinState,
    c: &Coefficients,
    dt: f64,
    params: &BasinParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = old.len();
    let mut sys = Tridiagonal::zeros(n);
    let mut rhs = Vec::with_capacity(n);
    let mut consumed = Vec::with_capacity(n);
    for i in 0..n {
        let survive = libm::exp(-c.rate[i] * dt);
        let kept = old.psi[i] * survive;
        consumed.push(old.psi[i] - kept);
        rhs.push(kept);
        if i + 1 < n {
            let (l, d, u) = psi_stencil(i, c);
            sys.lower[i] = -dt * l;
            sys.diag[i] = 1.0 - dt * d;
            sys.upper[i] = -dt * u;
        }
    }
    sys.diag[n - 1] = 1.0;
    rhs[n - 1] = params.psi0();
    let psi = sys.solve(&rhs).ok_or(Error::NonFinite {
        node: 0,
        term: "reactant system",
    })?;
    if let Some(i) = psi.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            node: i,
            term: "reactant",
        });
    }
    Ok((psi, consumed))
}

#[allow(clippy::too_many_arguments)]
fn solve_porosity(
    old: &BasinState,
    c: &Coefficients,
    theta: f64,
    dt: f64,
    h_new: f64,
    consumed: Option<&[f64]>,
    params: &BasinParams,
) -> Result<Vec<f64>> {
    let n = old.len();
    let yield_ = params.a0() / params.beta();
    let mut sys = Tridiagonal::zeros(n);
    let mut rhs = alloc::vec![0.0; n];
    for i in 1..n - 1 {
        let (l, d, u) = phi_stencil(i, &old.x, c, params);
        sys.lower[i] = -theta * dt * l;
        sys.diag[i] = 1.0 - theta * dt * d;
        sys.upper[i] = -theta * dt * u;
        let explicit = l * old.phi[i - 1] + d * old.phi[i] + u * old.phi[i + 1];
        let mut b = old.phi[i] + (1.0 - theta) * dt * explicit;
        if let Some(consumed) = consumed {
            b += yield_ * consumed[i];
        }
        rhs[i] = b;
    }
    apply_boundary_closure(&mut sys, &mut rhs, h_new, params);
    let phi = sys.solve(&rhs).ok_or(Error::NonFinite {
        node: 0,
        term: "porosity system",
    })?;
    for (i, &v) in phi.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                node: i,
                term: "porosity",
            });
        }
        if v <= 0.0 {
            return Err(Error::NegativePorosity { node: i, value: v });
        }
    }
    Ok(phi)
}

fn solve_level(
    old: &BasinState,
    c: &Coefficients,
    theta: f64,
    dt: f64,
    reactant: Reactant,
    params: &BasinParams,
) -> Result<Level> {
    let h_new = old.h + dt * c.hdot;
    let (psi, consumed) = match reactant {
        Reactant::Coupled => {
            let (psi, consumed) = solve_reactant(old, c, dt, params)?;
            (psi, Some(consumed))
        }
        Reactant::Absent => (old.psi.clone(), None),
    };
    let phi = solve_porosity(old, c, theta, dt, h_new, consumed.as_deref(), params)?;
    Ok(Level {
        phi,
        psi,
        h: h_new,
        hdot: c.hdot,
    })
}

fn max_relative_update(a: &Level, b: &Level, psi_scale: f64) -> f64 {
    let mut worst = ((a.h - b.h) / b.h).abs();
    for (x, y) in a.phi.iter().zip(&b.phi) {
        worst = worst.max(((x - y) / y).abs());
    }
    for (x, y) in a.psi.iter().zip(&b.psi) {
        worst = worst.max((x - y).abs() / psi_scale);
    }
    worst
}

/// Advances `state` by `dt`.
///
/// Fails with [`Error::NegativePorosity`] or [`Error::CorrectorDiverged`]
/// when the step should be retried with a smaller `dt`.
pub fn step_predictor_corrector(
    state: &BasinState,
    dt: f64,
    params: &BasinParams,
    config: &RunConfig,
    reactant: Reactant,
) -> Result<(BasinState, StepInfo)> {
    let dx = state.dx();
    let hdot_old = hdot_from(&state.phi, state.h, dx, params);
    let frozen = Coefficients::new(
        &state.x,
        &state.phi,
        state.h,
        hdot_old,
        params,
        config.exp_clamp,
    );
    let mut level = solve_level(state, &frozen, 1.0, dt, reactant, params)?;

    let psi_scale = if params.psi0() > 0.0 {
        params.psi0()
    } else {
        1.0
    };
    let mut update = f64::INFINITY;
    let mut sweeps = 0;
    let mut mid_phi = alloc::vec![0.0; state.len()];
    while sweeps < config.newton_max {
        for (m, (a, b)) in mid_phi.iter_mut().zip(state.phi.iter().zip(&level.phi)) {
            *m = 0.5 * (a + b);
        }
        let h_mid = 0.5 * (state.h + level.h);
        let hdot_mid = hdot_from(&mid_phi, h_mid, dx, params);
        let c = Coefficients::new(
            &state.x,
            &mid_phi,
            h_mid,
            hdot_mid,
            params,
            config.exp_clamp,
        );
        let next = solve_level(state, &c, 0.5, dt, reactant, params)?;
        update = max_relative_update(&next, &level, psi_scale);
        level = next;
        sweeps += 1;
        if sweeps >= config.corrector_iters && update < config.newton_tol {
            break;
        }
    }
    if update.is_nan() || update >= config.newton_tol {
        return Err(Error::CorrectorDiverged {
            sweeps,
            max_update: update,
        });
    }
    if let Some(i) = level.psi.iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeReactant {
            node: i,
            value: level.psi[i],
        });
    }
    let info = StepInfo {
        sweeps,
        last_update: update,
        hdot: level.hdot,
    };
    let next = BasinState {
        t: state.t + dt,
        h: level.h,
        x: state.x.clone(),
        phi: level.phi,
        psi: level.psi,
    };
    Ok((next, info))
}
