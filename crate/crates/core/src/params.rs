//! Physical constants, run settings and the reaction kernel.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Default cap on the exponent of the reaction factor.
pub const DEFAULT_EXP_CLAMP: f64 = 50.0;

/// Below this activation energy the thin-reaction-zone picture is doubtful.
pub const BETA_WARN_THRESHOLD: f64 = 10.0;

/// Grid nodes required per unit depth per unit `beta` to resolve the reaction layer.
pub const NODES_PER_LAYER: f64 = 8.0;

/// Constants as supplied by the user, before validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    /// Compaction constant.
    pub lambda: f64,
    /// Non-dimensional activation energy.
    pub beta: f64,
    /// Permeability exponent.
    pub m: u32,
    /// Porosity at the basin top.
    pub phi0: f64,
    /// Reactant fraction at the basin top.
    pub psi0: f64,
    /// Water released per unit reactant consumed.
    pub a0: f64,
    /// Depth below the top at which the reaction switches on.
    pub zstar: f64,
    /// Sedimentation rate.
    pub sdot: f64,
}

impl Default for RawParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            beta: 21.0,
            m: 7,
            phi0: 0.5,
            psi0: 0.3,
            a0: 1.0,
            zstar: 1.0,
            sdot: 1.0,
        }
    }
}

/// Validated constants together with the derived quantities `phistar` and `A`.
///
/// Fields are private so the derived values can never go stale; build one
/// with [`BasinParams::derive`] and change it through [`BasinParams::raw`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasinParams {
    raw: RawParams,
    phistar: f64,
    a_ratio: f64,
}

/// Non-fatal diagnostics produced during validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    /// `beta` is below [`BETA_WARN_THRESHOLD`].
    WeakActivation {
        /// The supplied value.
        beta: f64,
    },
    /// The grid does not resolve the reaction layer over the whole run.
    UnderResolved {
        /// Nodes configured.
        n_nodes: usize,
        /// Nodes required by the resolution rule.
        required: usize,
    },
    /// `phi0 + psi0` is close to or above one somewhere.
    Overfilled {
        /// The offending sum.
        sum: f64,
    },
}

fn check_nonneg(value: f64, field: &'static str) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::InvalidParams {
            field,
            reason: "must be finite",
        });
    }
    if value < 0.0 {
        return Err(Error::InvalidParams {
            field,
            reason: "must be non-negative",
        });
    }
    Ok(())
}

impl BasinParams {
    /// Validates `raw` and fills in `phistar = phi0 * m^(-1/m)` and `A = beta / m`.
    pub fn derive(raw: RawParams) -> Result<Self> {
        check_nonneg(raw.lambda, "lambda")?;
        check_nonneg(raw.beta, "beta")?;
        check_nonneg(raw.phi0, "phi0")?;
        check_nonneg(raw.psi0, "psi0")?;
        check_nonneg(raw.a0, "a0")?;
        check_nonneg(raw.zstar, "zstar")?;
        check_nonneg(raw.sdot, "sdot")?;
        if raw.lambda == 0.0 {
            return Err(Error::InvalidParams {
                field: "lambda",
                reason: "must be positive",
            });
        }
        if raw.beta == 0.0 {
            return Err(Error::InvalidParams {
                field: "beta",
                reason: "must be positive",
            });
        }
        if !(raw.phi0 > 0.0 && raw.phi0 < 1.0) {
            return Err(Error::InvalidParams {
                field: "phi0",
                reason: "must lie in (0, 1)",
            });
        }
        if raw.m < 7 {
            return Err(Error::InvalidParams {
                field: "m",
                reason: "must be at least 7",
            });
        }
        if raw.phi0 + raw.psi0 > 1.0 {
            return Err(Error::InvalidParams {
                field: "psi0",
                reason: "phi0 + psi0 exceeds 1",
            });
        }
        let m = f64::from(raw.m);
        let phistar = raw.phi0 * libm::exp(-libm::log(m) / m);
        Ok(Self {
            raw,
            phistar,
            a_ratio: raw.beta / m,
        })
    }

    /// The validated input constants.
    pub fn raw(&self) -> RawParams {
        self.raw
    }

    /// Non-fatal diagnostics for these constants.
    pub fn warnings(&self) -> Vec<Warning> {
        let mut out = Vec::new();
        if self.raw.beta < BETA_WARN_THRESHOLD {
            out.push(Warning::WeakActivation {
                beta: self.raw.beta,
            });
        }
        let sum = self.raw.phi0 + self.raw.psi0;
        if sum > 0.99 {
            out.push(Warning::Overfilled { sum });
        }
        out
    }

    /// Compaction constant.
    pub fn lambda(&self) -> f64 {
        self.raw.lambda
    }
    /// Activation energy.
    pub fn beta(&self) -> f64 {
        self.raw.beta
    }
    /// Permeability exponent.
    pub fn m(&self) -> u32 {
        self.raw.m
    }
    /// Top porosity.
    pub fn phi0(&self) -> f64 {
        self.raw.phi0
    }
    /// Top reactant fraction.
    pub fn psi0(&self) -> f64 {
        self.raw.psi0
    }
    /// Water yield of the reaction.
    pub fn a0(&self) -> f64 {
        self.raw.a0
    }
    /// Critical reaction depth.
    pub fn zstar(&self) -> f64 {
        self.raw.zstar
    }
    /// Sedimentation rate.
    pub fn sdot(&self) -> f64 {
        self.raw.sdot
    }
    /// Typical porosity below the reaction zone.
    pub fn phistar(&self) -> f64 {
        self.phistar
    }
    /// `beta / m`.
    pub fn a_ratio(&self) -> f64 {
        self.a_ratio
    }

    /// Relative permeability `(phi / phi0)^m`, computed as `exp(m ln(phi/phi0))`.
    #[inline]
    pub fn permeability(&self, phi: f64) -> f64 {
        libm::exp(f64::from(self.raw.m) * libm::log(phi / self.raw.phi0))
    }
}

/// Reaction factor `exp(beta (h - z - zstar))` with its exponent clamped to `±exp_clamp`.
#[inline]
pub fn reaction_rate(z: f64, h: f64, params: &BasinParams, exp_clamp: f64) -> f64 {
    let arg = params.beta() * (h - z - params.zstar());
    libm::exp(arg.clamp(-exp_clamp, exp_clamp))
}

/// Discretization, tolerances and output cadence for a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    /// Grid nodes on `x in [0, 1]`.
    pub n_nodes: usize,
    /// Largest time step the controller may take.
    pub dt: f64,
    /// Final time.
    pub t_end: f64,
    /// Corrector sweeps always performed after the predictor.
    pub corrector_iters: usize,
    /// Relative update below which the corrector is converged.
    pub newton_tol: f64,
    /// Cap on the total number of corrector sweeps.
    pub newton_max: usize,
    /// Largest reaction-factor exponent.
    pub exp_clamp: f64,
    /// Time between recorded samples.
    pub output_every: f64,
    /// Initial basin depth.
    pub h0: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_nodes: 1800,
            dt: 5e-3,
            t_end: 10.0,
            corrector_iters: 2,
            newton_tol: 1e-10,
            newton_max: 30,
            exp_clamp: DEFAULT_EXP_CLAMP,
            output_every: 0.05,
            h0: 0.1,
        }
    }
}

impl RunConfig {
    /// Checks every setting; returns resolution warnings for `params`.
    pub fn validate(&self, params: &BasinParams) -> Result<Vec<Warning>> {
        let positive = |v: f64, field: &'static str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig {
                    field,
                    reason: "must be positive and finite",
                })
            }
        };
        if self.n_nodes < 16 {
            return Err(Error::InvalidConfig {
                field: "n_nodes",
                reason: "must be at least 16",
            });
        }
        positive(self.dt, "dt")?;
        positive(self.t_end, "t_end")?;
        positive(self.newton_tol, "newton_tol")?;
        positive(self.exp_clamp, "exp_clamp")?;
        positive(self.output_every, "output_every")?;
        positive(self.h0, "h0")?;
        if self.exp_clamp > 700.0 {
            return Err(Error::InvalidConfig {
                field: "exp_clamp",
                reason: "must not exceed 700",
            });
        }
        if self.corrector_iters == 0 {
            return Err(Error::InvalidConfig {
                field: "corrector_iters",
                reason: "must be positive",
            });
        }
        if self.newton_max < self.corrector_iters {
            return Err(Error::InvalidConfig {
                field: "newton_max",
                reason: "must be at least corrector_iters",
            });
        }
        let required = self.required_nodes(params);
        let mut warnings = Vec::new();
        if self.n_nodes < required {
            warnings.push(Warning::UnderResolved {
                n_nodes: self.n_nodes,
                required,
            });
        }
        Ok(warnings)
    }

    /// Upper bound on the basin depth reached by `t_end` (`hdot <= sdot` while compacting).
    pub fn h_max_bound(&self, params: &BasinParams) -> f64 {
        self.h0 + params.sdot() * self.t_end
    }

    /// Nodes needed so that `dz <= 1 / (8 beta)` at the deepest basin.
    pub fn required_nodes(&self, params: &BasinParams) -> usize {
        libm::ceil(NODES_PER_LAYER * params.beta() * self.h_max_bound(params)) as usize
    }
}
