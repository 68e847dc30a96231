//! Nonlocal p-Laplacian variational regularization on graphs.
//!
//! The crate covers both sides of the discrete-to-continuum story:
//!
//! * [`graphon`]: kernels on `[0,1]²`, continuum signals, partitions, and the
//!   cell-average projector / piecewise-constant injector pair with exact
//!   L² geometry for step functions.
//! * [`graph`]: deterministic weighted, simple `{0,1}` and random
//!   inhomogeneous graphs built from a kernel, plus coordinate graphs.
//! * [`operators`]: the weighted nonlocal gradient and its adjoint
//!   divergence, discrete energies and operator-norm estimation.
//! * [`prox`]: proximal maps of the dual penalty for every exponent regime.
//! * [`solver`]: the dual accelerated proximal-gradient (FISTA) solver and
//!   the closed-form `p = 2` oracle.
//! * [`consistency`]: reference/subsample experiments measuring how fast
//!   discrete solutions approach the continuum one.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default); see [`Execution`].

pub mod consistency;
mod error;
mod exec;
mod matrix;
pub mod graph;
pub mod graphon;
pub mod operators;
pub mod prox;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Execution;
pub use matrix::SquareMatrix;

/// Version string recorded in run manifests and reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
