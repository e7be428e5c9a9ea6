//! Sparse and dense exchangeable random graphs built from completely random
//! measures of the generalized gamma process (GGP) family.
//!
//! The crate covers three jobs:
//!
//! * [`crm`]: Lévy intensity, tail intensity and its inverse, Laplace
//!   exponent, and exact samplers for (tilted) total masses.
//! * [`graph`] and [`simulate`]: graph value types and every generative path
//!   (truncated inverse-Lévy, gamma-process urn, Kallenberg thinning,
//!   Erdős–Rényi and compound-Poisson special cases, bipartite graphs).
//! * [`inference`] and [`diagnostics`]: HMC-within-Gibbs posterior sampling,
//!   convergence checks, the sparsity test and posterior predictive checks.
//!
//! [`io`] holds the file formats shared with the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of)]

pub mod crm;
pub mod diagnostics;
pub mod error;
pub mod graph;
pub mod inference;
pub mod io;
pub mod rng;
pub mod simulate;

pub use crm::{GgpParams, TiltedStableSpec};
pub use error::{Error, Result};
pub use graph::{BipartiteGraph, CrmSample, DirectedMultigraph, UndirectedGraph};
pub use inference::{ChainTrace, McmcConfig, McmcState};
pub use rng::RngStream;
pub use simulate::{SimConfig, SimPath};

/// Version string written into sidecar and result metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
