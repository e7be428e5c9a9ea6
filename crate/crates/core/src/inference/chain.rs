use rand::Rng;
use rayon::prelude::*;

use super::kernels::{hmc_update, hyper_update, latent_update, log_post_at};
use super::state::{ChainTrace, McmcConfig, McmcState, OmegaSnapshot, TraceRecord};
use crate::error::Result;
use crate::graph::UndirectedGraph;
use crate::rng::RngStream;

/// Nesterov dual averaging of the log stepsize.
#[derive(Clone, Debug)]
pub struct DualAveraging {
    mu: f64,
    target: f64,
    log_eps: f64,
    log_eps_bar: f64,
    h_bar: f64,
    t: f64,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    pub fn new(initial: f64, target: f64) -> Self {
        Self {
            mu: (10.0 * initial).ln(),
            target,
            log_eps: initial.ln(),
            log_eps_bar: 0.0,
            h_bar: 0.0,
            t: 0.0,
        }
    }

    pub fn stepsize(&self) -> f64 {
        self.log_eps.exp()
    }

    /// Averaged stepsize, used once adaptation stops.
    pub fn final_stepsize(&self) -> f64 {
        if self.t == 0.0 {
            self.stepsize()
        } else {
            self.log_eps_bar.exp()
        }
    }

    pub fn update(&mut self, accept_prob: f64) {
        self.t += 1.0;
        let eta = 1.0 / (self.t + Self::T0);
        self.h_bar = (1.0 - eta) * self.h_bar + eta * (self.target - accept_prob);
        self.log_eps = self.mu - self.t.sqrt() / Self::GAMMA * self.h_bar;
        let x = self.t.powf(-Self::KAPPA);
        self.log_eps_bar = x * self.log_eps + (1.0 - x) * self.log_eps_bar;
    }
}

/// Runs one chain from the default initialization.
pub fn run_chain<R: Rng + ?Sized>(
    graph: &UndirectedGraph,
    config: &McmcConfig,
    chain: u64,
    rng: &mut R,
) -> Result<ChainTrace> {
    config.validate()?;
    let state = McmcState::initialize(graph, &config.init)?;
    run_chain_from(graph, config, state, chain, rng)
}

/// Runs one chain from `state`. Records are kept after the adaptation phase,
/// every `thin` iterations.
pub fn run_chain_from<R: Rng + ?Sized>(
    graph: &UndirectedGraph,
    config: &McmcConfig,
    mut state: McmcState,
    chain: u64,
    rng: &mut R,
) -> Result<ChainTrace> {
    config.validate()?;
    state.check(graph)?;
    let burn = config.burn_in();
    let mut da = DualAveraging::new(config.initial_stepsize, config.target_accept);
    let mut trace = ChainTrace {
        chain,
        stepsize: config.initial_stepsize,
        ..ChainTrace::default()
    };
    let mut kept = 0usize;
    for t in 1..=config.n_iter {
        let adapting = t <= burn;
        let eps = if adapting {
            da.stepsize()
        } else {
            da.final_stepsize()
        };
        let hmc = hmc_update(&mut state, config.leapfrog_steps, eps, rng);
        if adapting {
            da.update(hmc.accept_prob);
        }
        let hyper = hyper_update(&mut state, config.rw_sd, &config.prior, rng);
        let lat = latent_update(&mut state, graph, config.latent_mode, rng);
        if adapting {
            continue;
        }
        let a = &mut trace.acceptance;
        a.hmc_proposed += 1;
        a.hmc_accepted += hmc.accepted as u64;
        a.hyper_proposed += 1;
        a.hyper_accepted += hyper as u64;
        a.latent_proposed += graph.n_edges() as u64;
        a.latent_accepted += lat;
        if (t - burn) % config.thin != 0 {
            continue;
        }
        trace.records.push(TraceRecord {
            iteration: t as u64,
            chain,
            alpha: state.alpha,
            sigma: state.sigma,
            tau: state.tau,
            w_star: state.w_star,
            log_post: log_post_at(&state, &state.omega),
        });
        if config.omega_stride > 0 && kept % config.omega_stride == 0 {
            trace.omega.push(OmegaSnapshot {
                iteration: t as u64,
                omega: state.omega.clone(),
            });
        }
        kept += 1;
    }
    trace.stepsize = da.final_stepsize();
    if cfg!(debug_assertions) {
        state.check(graph)?;
    }
    trace.final_state = Some(state);
    Ok(trace)
}

/// Runs `config.n_chains` chains in parallel; chain `c` uses stream `c` of
/// `config.seed`.
pub fn run_chains(graph: &UndirectedGraph, config: &McmcConfig) -> Result<Vec<ChainTrace>> {
    config.validate()?;
    (0..config.n_chains as u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(config.seed, c);
            run_chain(graph, config, c, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::state::{node_exponents, InitSpec};

    #[test]
    fn zero_iterations_returns_initial_state() {
        let g = UndirectedGraph::from_pairs([(0, 1), (1, 2)]);
        let cfg = McmcConfig {
            n_iter: 0,
            ..McmcConfig::default()
        };
        let tr = run_chain(&g, &cfg, 0, &mut RngStream::new(0, 0)).unwrap();
        assert!(tr.records.is_empty());
        let init = McmcState::initialize(&g, &InitSpec::default()).unwrap();
        assert_eq!(tr.final_state.unwrap(), init);
    }

    #[test]
    fn initialization_matches_edge_count() {
        let g = UndirectedGraph::from_pairs([(0, 1), (1, 2), (2, 2), (3, 0)]);
        let st = McmcState::initialize(&g, &InitSpec::default()).unwrap();
        let s: f64 = st.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-12);
        assert_eq!(st.m, node_exponents(&g, &st.latent));
        let expect = 4.0 / crate::crm::levy::psi(0.0, 1.0, 2.0 * s + 0.1);
        assert!((st.alpha - expect).abs() < 1e-12);
    }

    #[test]
    fn empty_graph_rejected() {
        let cfg = McmcConfig::default();
        assert!(matches!(
            run_chain(
                &UndirectedGraph::empty(),
                &cfg,
                0,
                &mut RngStream::new(0, 0)
            ),
            Err(crate::Error::EmptyGraph)
        ));
    }

    #[test]
    fn record_count_and_determinism() {
        let g = UndirectedGraph::from_pairs([(0, 1), (1, 2), (0, 2), (2, 3)]);
        let cfg = McmcConfig {
            n_iter: 400,
            adapt_iters: Some(100),
            thin: 3,
            omega_stride: 2,
            ..Default::default()
        };
        let a = run_chain(&g, &cfg, 0, &mut RngStream::new(5, 0)).unwrap();
        let b = run_chain(&g, &cfg, 0, &mut RngStream::new(5, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 100);
        assert_eq!(a.omega.len(), 50);
        assert_eq!(a.acceptance.hmc_proposed, 300);
        assert!(a.records.iter().all(|r| r.log_post.is_finite()));
        let fs = a.final_state.unwrap();
        assert_eq!(fs.m, node_exponents(&g, &fs.latent));
    }

    #[test]
    fn dual_averaging_hits_target() {
        let g = UndirectedGraph::from_pairs((0..40).map(|i| (i, (i * 7 + 3) % 40)));
        let cfg = McmcConfig {
            n_iter: 4000,
            adapt_iters: Some(2000),
            ..Default::default()
        };
        let tr = run_chain(&g, &cfg, 0, &mut RngStream::new(9, 0)).unwrap();
        let rate = tr.acceptance.hmc_rate();
        assert!((0.4..0.85).contains(&rate), "{rate}");
    }

    #[test]
    fn parallel_chains_use_distinct_streams() {
        let g = UndirectedGraph::from_pairs([(0, 1), (1, 2)]);
        let cfg = McmcConfig {
            n_iter: 50,
            n_chains: 3,
            ..Default::default()
        };
        let tr = run_chains(&g, &cfg).unwrap();
        assert_eq!(tr.len(), 3);
        assert_ne!(tr[0].records, tr[1].records);
        let solo = run_chain(&g, &cfg, 2, &mut RngStream::new(cfg.seed, 2)).unwrap();
        assert_eq!(solo, tr[2]);
    }
}
