//! Coarsening of misfitting precipitates: microelasticity kernels, sharp-interface
//! estimates, a Cahn-Hilliard solver, Kawasaki Monte Carlo and morphology analysis.

// `!(x > 0.0)` rejects NaN on purpose; tensor code indexes by component.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod atomic;
pub mod config;
pub mod diffuse;
pub mod elastic;
pub mod error;
pub mod fft;
pub mod grid;
pub mod kernel;
pub mod lsw;
pub mod sharp;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use config::KvConfig;
pub use error::{Error, Result};
pub use grid::{GridSpec, ScalarField};
