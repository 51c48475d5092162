//! Semi-discrete operators on the fixed grid `x = z / h(t)`.
//!
//! Porosity: centred flux form for `lambda [(phi/phi0)^m (phi_z - phi)]_z`
//! with fluxes at half nodes, plus the centred frame correction
//! `(x hdot / h) phi_x`. Reactant: donor-cell fluxes of `psi` carried with the
//! solid velocity relative to the stretching grid, which keeps the implicit
//! transport matrix an M-matrix.

use alloc::vec::Vec;

use super::BasinState;
use crate::tridiag::Tridiagonal;
use crate::{reaction_rate, BasinParams, Error, Result};

/// Second-order one-sided `phi_z` at the top node.
pub(crate) fn top_gradient(phi: &[f64], h: f64, dx: f64) -> f64 {
    let n = phi.len();
    (3.0 * phi[n - 1] - 4.0 * phi[n - 2] + phi[n - 3]) / (2.0 * h * dx)
}

/// Second-order one-sided `phi_z - phi` at the bottom node.
pub fn bottom_robin_residual(state: &BasinState) -> f64 {
    let p = &state.phi;
    (-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * state.h * state.dx()) - p[0]
}

pub(crate) fn hdot_from(phi: &[f64], h: f64, dx: f64, params: &BasinParams) -> f64 {
    let top = phi[phi.len() - 1];
    let flux = params.permeability(top) * (top_gradient(phi, h, dx) - top);
    params.sdot() + params.lambda() / (1.0 - params.phi0()) * flux
}

/// Boundary velocity `sdot + lambda/(1-phi0) (phi/phi0)^m (phi_z - phi)` at the top node.
pub fn hdot(state: &BasinState, params: &BasinParams) -> f64 {
    hdot_from(&state.phi, state.h, state.dx(), params)
}

/// Frozen coefficients of the linearised operators.
#[derive(Debug, Clone)]
pub(crate) struct Coefficients {
    pub h: f64,
    pub hdot: f64,
    pub dx: f64,
    /// `(phi/phi0)^m` at half nodes `i + 1/2`.
    pub perm_half: Vec<f64>,
    /// Solid velocity relative to the grid at half nodes.
    pub velocity_half: Vec<f64>,
    /// Reaction factor at nodes.
    pub rate: Vec<f64>,
}

impl Coefficients {
    /// Coefficients evaluated on `(phi, h)` with boundary speed `hdot`.
    pub fn new(
        x: &[f64],
        phi: &[f64],
        h: f64,
        hdot: f64,
        params: &BasinParams,
        exp_clamp: f64,
    ) -> Self {
        let n = phi.len();
        let dx = 1.0 / (n - 1) as f64;
        let hdx = h * dx;
        let perm_half: Vec<f64> = phi
            .windows(2)
            .map(|w| params.permeability(0.5 * (w[0] + w[1])))
            .collect();
        let carry = params.lambda() / (1.0 - params.phi0());
        let velocity_half = (0..n - 1)
            .map(|i| {
                let flux =
                    perm_half[i] * ((phi[i + 1] - phi[i]) / hdx - 0.5 * (phi[i] + phi[i + 1]));
                let xh = 0.5 * (x[i] + x[i + 1]);
                carry * flux - xh * hdot
            })
            .collect();
        let rate = x
            .iter()
            .map(|&xi| reaction_rate(xi * h, h, params, exp_clamp))
            .collect();
        Self {
            h,
            hdot,
            dx,
            perm_half,
            velocity_half,
            rate,
        }
    }
}

/// Stencil `(lower, diag, upper)` of the porosity operator at interior node `i`.
#[inline]
pub(crate) fn phi_stencil(
    i: usize,
    x: &[f64],
    c: &Coefficients,
    params: &BasinParams,
) -> (f64, f64, f64) {
    let hdx = c.h * c.dx;
    let k = params.lambda() / hdx;
    let (dm, dp) = (c.perm_half[i - 1], c.perm_half[i]);
    let inv = 1.0 / hdx;
    let adv = x[i] * c.hdot / c.h / (2.0 * c.dx);
    let lower = k * dm * (inv + 0.5) - adv;
    let diag = -k * (dp * (inv + 0.5) + dm * (inv - 0.5));
    let upper = k * dp * (inv - 0.5) + adv;
    (lower, diag, upper)
}

/// Stencil of the reactant transport operator (no reaction) at node `i < n - 1`.
#[inline]
pub(crate) fn psi_stencil(i: usize, c: &Coefficients) -> (f64, f64, f64) {
    let hdx = c.h * c.dx;
    let dilution = c.hdot / c.h;
    let vp = c.velocity_half[i];
    if i == 0 {
        // half cell against the basement, zero flux through z = 0
        let s = 2.0 / hdx;
        return (0.0, -s * vp.max(0.0) - dilution, -s * vp.min(0.0));
    }
    let vm = c.velocity_half[i - 1];
    let s = 1.0 / hdx;
    let lower = s * vm.max(0.0);
    let diag = -s * (vp.max(0.0) - vm.min(0.0)) - dilution;
    let upper = -s * vp.min(0.0);
    (lower, diag, upper)
}

/// Time derivatives at fixed `x`, interior nodes `1..n-1` (index 0 of each
/// vector is node 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    /// `d phi / dt` at fixed `x`.
    pub dphi: Vec<f64>,
    /// `d psi / dt` at fixed `x`.
    pub dpsi: Vec<f64>,
}

/// Semi-discrete right-hand sides of the porosity and reactant equations in
/// the stretched coordinate, with boundary speed `hdot` supplied by the caller.
pub fn sigma_transform_rates(
    state: &BasinState,
    params: &BasinParams,
    hdot: f64,
    exp_clamp: f64,
) -> Result<Rates> {
    state.check()?;
    if !hdot.is_finite() {
        return Err(Error::NonFinite {
            node: state.len() - 1,
            term: "hdot",
        });
    }
    let c = Coefficients::new(&state.x, &state.phi, state.h, hdot, params, exp_clamp);
    let n = state.len();
    let yield_ = params.a0() / params.beta();
    let mut dphi = Vec::with_capacity(n - 2);
    let mut dpsi = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        let (l, d, u) = phi_stencil(i, &state.x, &c, params);
        let transport = l * state.phi[i - 1] + d * state.phi[i] + u * state.phi[i + 1];
        if !transport.is_finite() {
            return Err(Error::NonFinite {
                node: i,
                term: "porosity flux",
            });
        }
        let reaction = c.rate[i] * state.psi[i];
        if !reaction.is_finite() {
            return Err(Error::NonFinite {
                node: i,
                term: "reaction",
            });
        }
        dphi.push(transport + yield_ * reaction);
        let (l, d, u) = psi_stencil(i, &c);
        let carried = l * state.psi[i - 1] + d * state.psi[i] + u * state.psi[i + 1];
        if !carried.is_finite() {
            return Err(Error::NonFinite {
                node: i,
                term: "reactant flux",
            });
        }
        dpsi.push(carried - reaction);
    }
    Ok(Rates { dphi, dpsi })
}

/// Replaces the first and last rows of a porosity system.
///
/// Row `n-1` becomes the Dirichlet condition `phi = phi0`. Row 0 becomes the
/// second-order one-sided Robin condition `phi_z - phi = 0` at depth `h`;
/// its `phi[2]` term is eliminated through row 1 so the system stays
/// tridiagonal. Requires `n >= 3` and a non-zero `upper[1]`.
pub fn apply_boundary_closure(
    system: &mut Tridiagonal,
    rhs: &mut [f64],
    h: f64,
    params: &BasinParams,
) {
    let n = system.len();
    let dx = 1.0 / (n - 1) as f64;
    let s = 1.0 / (2.0 * h * dx);
    let (r0, r1, r2) = (-3.0 * s - 1.0, 4.0 * s, -s);
    let (l1, d1, u1, b1) = (system.lower[1], system.diag[1], system.upper[1], rhs[1]);
    system.lower[0] = 0.0;
    system.diag[0] = r0 - r2 * l1 / u1;
    system.upper[0] = r1 - r2 * d1 / u1;
    rhs[0] = -r2 * b1 / u1;

    system.lower[n - 1] = 0.0;
    system.diag[n - 1] = 1.0;
    system.upper[n - 1] = 0.0;
    rhs[n - 1] = params.phi0();
}
