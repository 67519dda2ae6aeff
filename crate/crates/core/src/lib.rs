//! Counting orientations of a graph with a prescribed imbalance sequence.
//!
//! The asymptotic count combines the Bradley–Terry merits solving the
//! balance equations, the determinant of a weighted Laplacian and a
//! Gaussian correction exponent. Exact oracles (brute force, coefficient
//! extraction, contour quadrature) cover small instances.

pub mod correction;
pub mod enumerate;
pub mod error;
pub mod feasibility;
pub mod graph;
mod maxflow;
pub mod mle;
pub mod sampler;
pub mod validate;

pub use error::{Error, Result};
pub use graph::{Graph, ImbalanceSeq};
