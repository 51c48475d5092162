use core::fmt;

/// Crate-wide result alias.
pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failures raised by parameter validation and the solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical constant violates its admissible range.
    InvalidParams {
        /// Offending field.
        field: &'static str,
        /// What is wrong with it.
        reason: &'static str,
    },
    /// A discretization or solver setting is out of range.
    InvalidConfig {
        /// Offending field.
        field: &'static str,
        /// What is wrong with it.
        reason: &'static str,
    },
    /// A field value or a term of the semi-discrete system is NaN or infinite.
    NonFinite {
        /// Grid node index.
        node: usize,
        /// Which term produced it.
        term: &'static str,
    },
    /// The implicit solve produced a non-positive porosity.
    NegativePorosity {
        /// Grid node index.
        node: usize,
        /// Offending value.
        value: f64,
    },
    /// The reactant went negative.
    NegativeReactant {
        /// Grid node index.
        node: usize,
        /// Offending value.
        value: f64,
    },
    /// Corrector sweeps did not settle.
    CorrectorDiverged {
        /// Sweeps performed.
        sweeps: usize,
        /// Largest relative update in the last sweep.
        max_update: f64,
    },
    /// A time step failed even at the smallest admissible `dt`.
    StepFailed {
        /// Time at the start of the failing step.
        t: f64,
        /// Step size of the last attempt.
        dt: f64,
        /// Underlying failure.
        cause: alloc::boxed::Box<Error>,
    },
    /// Too few samples to fit.
    InsufficientSamples {
        /// Samples available.
        got: usize,
        /// Samples required.
        need: usize,
    },
    /// The residual does not change sign over the bracket.
    NoRoot {
        /// Lower bracket end.
        lo: f64,
        /// Upper bracket end.
        hi: f64,
        /// Residual at `lo`.
        r_lo: f64,
        /// Residual at `hi`.
        r_hi: f64,
    },
    /// An iteration hit its cap.
    NoConvergence {
        /// Iterations performed.
        iterations: usize,
        /// Last residual or update size.
        residual: f64,
    },
    /// The outer-region reactant formula divides by (nearly) zero.
    SingularProfile {
        /// Coordinate where it happened.
        zeta: f64,
    },
    /// A profile left its admissible range.
    Domain {
        /// Coordinate where it happened.
        at: f64,
        /// Offending value.
        value: f64,
    },
    /// A stiff factor overflowed or underflowed.
    Stiffness {
        /// Value of the state variable that triggered it.
        value: f64,
        /// Which factor.
        what: &'static str,
    },
    /// The adaptive integrator could not meet its tolerance.
    StepSizeUnderflow {
        /// Coordinate where the step collapsed.
        at: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams { field, reason } => {
                write!(f, "invalid parameter `{field}`: {reason}")
            }
            Error::InvalidConfig { field, reason } => {
                write!(f, "invalid run configuration `{field}`: {reason}")
            }
            Error::NonFinite { node, term } => {
                write!(f, "non-finite value in {term} at node {node}")
            }
            Error::NegativePorosity { node, value } => {
                write!(f, "porosity {value:e} at node {node} is not positive")
            }
            Error::NegativeReactant { node, value } => {
                write!(f, "reactant {value:e} at node {node} is negative")
            }
            Error::CorrectorDiverged { sweeps, max_update } => write!(
                f,
                "corrector not converged after {sweeps} sweeps (max relative update {max_update:e})"
            ),
            Error::StepFailed { t, dt, cause } => {
                write!(f, "time step failed at t = {t} (dt = {dt:e}): {cause}")
            }
            Error::InsufficientSamples { got, need } => {
                write!(f, "need at least {need} samples, got {got}")
            }
            Error::NoRoot { lo, hi, r_lo, r_hi } => write!(
                f,
                "no sign change on [{lo:e}, {hi:e}] (residuals {r_lo:e}, {r_hi:e})"
            ),
            Error::NoConvergence {
                iterations,
                residual,
            } => {
                write!(
                    f,
                    "no convergence after {iterations} iterations (residual {residual:e})"
                )
            }
            Error::SingularProfile { zeta } => {
                write!(f, "reactant denominator vanishes at zeta = {zeta}")
            }
            Error::Domain { at, value } => {
                write!(f, "porosity {value} left (0, phi0] at {at}")
            }
            Error::Stiffness { value, what } => {
                write!(f, "{what} overflows at state value {value:e}")
            }
            Error::StepSizeUnderflow { at } => {
                write!(f, "adaptive step size underflow at {at}")
            }
        }
    }
}

impl core::error::Error for Error {}
