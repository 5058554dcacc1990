//! Null-vector and spectral-vector initializers for phase retrieval with
//! complex Gaussian measurements.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex matrices, seeded Gaussian sampling and
//!   Hermitian extreme eigenpairs.
//! - [`estimators`]: measurement ensembles, the weak/strong index split,
//!   the null and spectral estimates, the projector error metric and the
//!   per-instance error certificate.
//! - [`bounds`]: closed-form chi-square quantities, the non-asymptotic
//!   error/probability bound, and Monte Carlo checks of the concentration
//!   steps behind it.
//! - [`harness`]: seeded, parallel trial runner and parameter sweeps.
//! - [`cli`]: configuration, CSV output and subcommand implementations.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;

pub use error::{Error, Result};
