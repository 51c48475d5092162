use alloc::vec::Vec;

use crate::{BasinParams, Error, Result};

/// Snapshot of the basin on the fixed computational grid `x = z / h`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinState {
    /// Time.
    pub t: f64,
    /// Basin depth (position of the top boundary).
    pub h: f64,
    /// Uniform grid on `[0, 1]`.
    pub x: Vec<f64>,
    /// Porosity at each node.
    pub phi: Vec<f64>,
    /// Reactant fraction at each node.
    pub psi: Vec<f64>,
}

/// Uniform grid with `n` nodes, exact endpoints.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { 1.0 } else { i as f64 / last })
        .collect()
}

impl BasinState {
    /// Uniform column `phi = phi0`, `psi = psi0` of depth `h0` at `t = 0`.
    pub fn uniform(params: &BasinParams, n_nodes: usize, h0: f64) -> Self {
        Self {
            t: 0.0,
            h: h0,
            x: uniform_grid(n_nodes),
            phi: alloc::vec![params.phi0(); n_nodes],
            psi: alloc::vec![params.psi0(); n_nodes],
        }
    }

    /// Builds a state by sampling `phi(z)` and `psi(z)` at the grid depths `z = x h`.
    pub fn from_profiles<F, G>(t: f64, h: f64, n_nodes: usize, phi: F, psi: G) -> Self
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let x = uniform_grid(n_nodes);
        let phi = x.iter().map(|&xi| phi(xi * h)).collect();
        let psi = x.iter().map(|&xi| psi(xi * h)).collect();
        Self { t, h, x, phi, psi }
    }

    /// Number of grid nodes.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    /// True when the grid is empty.
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Grid spacing in `x`.
    pub fn dx(&self) -> f64 {
        1.0 / (self.len() - 1) as f64
    }

    /// Depth `z = x h` of node `i`.
    pub fn depth(&self, i: usize) -> f64 {
        self.x[i] * self.h
    }

    /// Checks grid shape, lengths and finiteness.
    pub fn check(&self) -> Result<()> {
        let n = self.len();
        if n < 3 || self.phi.len() != n || self.psi.len() != n {
            return Err(Error::InvalidConfig {
                field: "state",
                reason: "inconsistent array lengths",
            });
        }
        if self.x[0] != 0.0 || self.x[n - 1] != 1.0 || self.x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig {
                field: "state.x",
                reason: "grid must increase from 0 to 1",
            });
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidConfig {
                field: "state.h",
                reason: "depth must be positive",
            });
        }
        for i in 0..n {
            if !self.phi[i].is_finite() {
                return Err(Error::NonFinite {
                    node: i,
                    term: "phi",
                });
            }
            if !self.psi[i].is_finite() {
                return Err(Error::NonFinite {
                    node: i,
                    term: "psi",
                });
            }
        }
        Ok(())
    }

    /// Largest `phi + psi` over the column (physical fill diagnostic).
    pub fn max_fill(&self) -> f64 {
        self.phi
            .iter()
            .zip(&self.psi)
            .map(|(a, b)| a + b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
