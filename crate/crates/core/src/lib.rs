//! Essential spectra of generalized N-body Hamiltonians `h(P) + Σ_Y V_Y(π_Y x)`
//! through localization at infinity.
//!
//! - [`geometry`]: subspaces, quotients and directions at infinity.
//! - [`potentials`]: functions with radial limits and the algebra they generate.
//! - [`localization`]: the maps `τ_α`, chains, characters and direction sampling.
//! - [`spectral`]: periodic discretization, eigensolvers and the numerical checks.
//! - [`selfcheck`]: the property suites behind `hvz selfcheck`.

pub mod error;
pub mod geometry;
pub mod localization;
pub mod potentials;
pub mod selfcheck;
pub mod spectral;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
