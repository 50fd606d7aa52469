//! Exact accelerated k-means.
//!
//! [`solvers::run_gkmeans`] filters each point against a per-centroid
//! neighbor set and the bisecting hyperplanes between neighbor pairs, then
//! computes distances only for centroids that can still win. From the same
//! initial centroids it produces exactly the assignments of
//! [`solvers::run_lloyd`]. [`solvers::run_hamerly`] is a bound-based
//! baseline with the same guarantee.

pub mod bench;
pub mod centroids;
pub mod cli;
pub mod data;
pub mod datagen;
pub mod error;
pub mod kernels;
pub mod metrics;
pub mod neighbors;
pub mod solvers;

pub use centroids::CentroidSet;
pub use data::DataMatrix;
pub use error::{Error, Result};
pub use kernels::OpCounters;
pub use solvers::{Algorithm, InitMethod, IterationTelemetry, Solution, SolverParams};
