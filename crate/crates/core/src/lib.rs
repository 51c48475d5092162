//! Reactive compaction of a growing sediment column.
//!
//! The crate couples two independent descriptions of the same physical
//! system: porosity `phi` and reactant fraction `psi` in a 1-D basin whose
//! top `h(t)` grows by sedimentation while the pore space compacts and a
//! thin, strongly temperature-activated dehydration reaction releases water.
//!
//! * [`pde`] solves the full moving-boundary problem with an implicit
//!   predictor/corrector finite-difference scheme on the fixed coordinate
//!   `x = z / h(t)`.
//! * [`asymptotics`] builds the leading-order travelling-wave solution
//!   (outer, inner and deep regions) and solves the implicit matching
//!   equation for the wave speed `c`.
//! * [`verify`] cross-checks the two and collects residual batteries.
//!
//! The crate is `no_std` (it needs `alloc`); file formats and the command
//! line live in the `compaction-cli` crate.

#![no_std]
#![deny(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod asymptotics;
mod error;
pub mod ode;
pub mod params;
pub mod pde;
pub mod roots;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
pub use params::{reaction_rate, BasinParams, RawParams, RunConfig, Warning};
