//! Fixtures shared by the benchmarks.

use crmgraph::graph::UndirectedGraph;
use crmgraph::inference::McmcState;
use crmgraph::simulate::sample_graph;
use crmgraph::{GgpParams, RngStream, SimConfig};

/// GGP graph drawn with the default truncation.
pub fn ggp_graph(alpha: f64, sigma: f64, tau: f64, seed: u64) -> UndirectedGraph {
    let mut cfg = SimConfig::new(GgpParams::new(alpha, sigma, tau).expect("valid parameters"));
    cfg.seed = seed;
    sample_graph(&cfg, &mut RngStream::new(seed, 0)).expect("non-degenerate draw")
}

/// Sampler state at its default initialization.
pub fn initial_state(graph: &UndirectedGraph) -> McmcState {
    McmcState::initialize(graph, &Default::default()).expect("graph has edges")
}
