//! Simulation and inference for the planted dense cycle model.
//!
//! Vertices carry hidden positions on the unit circle; pairs closer than
//! `tau / 2` form the cycle `X`, and the observed graph `A` has edge density
//! `p` on the cycle and `q` elsewhere. The crate provides samplers, exact
//! likelihood and second-moment machinery, the overlap U-statistic and its
//! block decomposition, realizable-cycle feasible sets, the scan
//! detector/estimator, and exact small-`n` Bayes computations.

pub mod bayes;
pub mod cli;
pub mod error;
pub mod feasible;
pub mod inference;
pub mod likelihood;
pub mod model;
pub mod phase;
pub mod rng;
pub mod ustat;

pub use error::{Error, Result};
pub use model::{Adjacency, LatentPositions, Params};
