//! Posterior sampling for GGP graphs.
//!
//! Undirected graphs use HMC on the log-sociabilities, a joint
//! Metropolis–Hastings move on `(α, σ, τ, w*)` whose proposal for `w*` is the
//! exponentially tilted total-mass law (so its density never appears), and
//! zero-truncated Poisson latent counts. Bipartite graphs use a collapsed Gibbs
//! sampler.

mod bipartite;
mod chain;
mod kernels;
mod state;

pub use bipartite::{bipartite_log_marginal, run_bipartite_gibbs, BipartiteState};
pub use chain::{run_chain, run_chain_from, run_chains, DualAveraging};
pub use kernels::{
    grad_log_posterior, hmc_update, hyper_update, latent_update, log_posterior, HmcOutcome,
};
pub use state::{
    AcceptanceCounts, ChainTrace, HyperPrior, InitSpec, LatentMode, McmcConfig, McmcState,
    OmegaSnapshot, Param, TraceRecord,
};
