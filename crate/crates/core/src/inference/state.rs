use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::crm::levy::psi;
use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatentMode {
    /// Direct zero-truncated Poisson draws.
    #[default]
    Exact,
    /// ±1 random-walk Metropolis–Hastings.
    Mh,
}

impl FromStr for LatentMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "mh" => Ok(Self::Mh),
            _ => Err(Error::domain(format!("unknown latent mode `{s}`"))),
        }
    }
}

/// Priors on `α`, `τ` and `1 − σ`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HyperPrior {
    /// `p(α) ∝ 1/α`, `p(τ) ∝ 1/τ`, `p(σ) ∝ 1/(1−σ)`.
    #[default]
    Improper,
    /// `ln α`, `ln τ`, `ln(1−σ)` each `N(0, sd²)`.
    LogNormal { sd: f64 },
}

impl HyperPrior {
    /// Log prior minus the improper log prior, as a function of
    /// `(ln α, ln τ, ln(1−σ))`.
    pub(crate) fn log_excess(&self, ln_alpha: f64, ln_tau: f64, ln_one_minus_sigma: f64) -> f64 {
        match *self {
            HyperPrior::Improper => 0.0,
            HyperPrior::LogNormal { sd } => {
                -(ln_alpha * ln_alpha + ln_tau * ln_tau + ln_one_minus_sigma * ln_one_minus_sigma)
                    / (2.0 * sd * sd)
            }
        }
    }
}

/// Starting point of a chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitSpec {
    pub sigma: f64,
    pub tau: f64,
    /// `None`: `N / ψ(2 Σw + w*)`.
    pub alpha: Option<f64>,
    pub w_star: f64,
}

impl Default for InitSpec {
    fn default() -> Self {
        Self {
            sigma: 0.0,
            tau: 1.0,
            alpha: None,
            w_star: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub n_iter: usize,
    pub n_chains: usize,
    pub leapfrog_steps: usize,
    pub target_accept: f64,
    /// Stepsize adaptation length, also the burn-in. `None`: `n_iter / 4`.
    pub adapt_iters: Option<usize>,
    /// Random-walk sd on `ln τ` and `ln(1−σ)`.
    pub rw_sd: f64,
    pub thin: usize,
    pub seed: u64,
    pub latent_mode: LatentMode,
    pub init: InitSpec,
    pub prior: HyperPrior,
    /// Keep `ω` every this many kept records; 0 keeps none.
    pub omega_stride: usize,
    pub initial_stepsize: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            n_iter: 10_000,
            n_chains: 3,
            leapfrog_steps: 10,
            target_accept: 0.6,
            adapt_iters: None,
            rw_sd: 0.02,
            thin: 1,
            seed: 0,
            latent_mode: LatentMode::Exact,
            init: InitSpec::default(),
            prior: HyperPrior::Improper,
            omega_stride: 0,
            initial_stepsize: 0.01,
        }
    }
}

impl McmcConfig {
    pub fn burn_in(&self) -> usize {
        self.adapt_iters.unwrap_or(self.n_iter / 4).min(self.n_iter)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::domain(m.to_string()));
        if self.n_chains == 0 {
            return bad("n_chains must be positive");
        }
        if self.leapfrog_steps == 0 {
            return bad("leapfrog_steps must be positive");
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return bad("target_accept must lie in (0, 1)");
        }
        if !(self.rw_sd > 0.0) || !self.rw_sd.is_finite() {
            return bad("rw_sd must be positive");
        }
        if self.thin == 0 {
            return bad("thin must be positive");
        }
        if !(self.initial_stepsize > 0.0) {
            return bad("initial_stepsize must be positive");
        }
        if let HyperPrior::LogNormal { sd } = self.prior {
            if !(sd > 0.0) {
                return bad("prior sd must be positive");
            }
        }
        let i = &self.init;
        if !crate::crm::in_region(i.sigma, i.tau)
            || !(i.w_star >= 0.0)
            || i.alpha.is_some_and(|a| !(a > 0.0))
        {
            return bad("initial hyperparameters outside the admissible region");
        }
        Ok(())
    }
}

/// Sampler state for an undirected graph.
///
/// `latent[e]` is the count on `graph.edges()[e]`; `m[i]` sums the counts of
/// the edges at node `i`, a loop contributing twice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McmcState {
    pub omega: Vec<f64>,
    pub w_star: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub tau: f64,
    pub latent: Vec<u64>,
    pub m: Vec<u64>,
}

pub(crate) fn node_exponents(graph: &UndirectedGraph, latent: &[u64]) -> Vec<u64> {
    let mut m = vec![0u64; graph.n_nodes()];
    for (&(i, j), &n) in graph.edges().iter().zip(latent) {
        m[i] += n;
        m[j] += n;
    }
    m
}

impl McmcState {
    /// Degree-proportional weights with `Σw = √N^(e)`, unit latent counts.
    pub fn initialize(graph: &UndirectedGraph, init: &InitSpec) -> Result<Self> {
        if graph.n_edges() == 0 {
            return Err(Error::EmptyGraph);
        }
        let latent = vec![1u64; graph.n_edges()];
        let m = node_exponents(graph, &latent);
        let total_deg: usize = graph.degrees().iter().sum();
        let scale = (graph.n_edges() as f64).sqrt() / total_deg as f64;
        let omega: Vec<f64> = graph
            .degrees()
            .iter()
            .map(|&d| (d as f64 * scale).ln())
            .collect();
        let s: f64 = omega.iter().map(|o| o.exp()).sum();
        let alpha = match init.alpha {
            Some(a) => a,
            None => graph.n_nodes() as f64 / psi(init.sigma, init.tau, 2.0 * s + init.w_star),
        };
        let st = Self {
            omega,
            w_star: init.w_star,
            alpha,
            sigma: init.sigma,
            tau: init.tau,
            latent,
            m,
        };
        st.check(graph)?;
        Ok(st)
    }

    pub fn n_nodes(&self) -> usize {
        self.omega.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.omega.iter().map(|o| o.exp()).collect()
    }

    pub fn check(&self, graph: &UndirectedGraph) -> Result<()> {
        let bad = |m: String| Err(Error::InconsistentState(m));
        if self.omega.len() != graph.n_nodes() || self.m.len() != graph.n_nodes() {
            return bad(format!(
                "{} weights for {} nodes",
                self.omega.len(),
                graph.n_nodes()
            ));
        }
        if self.latent.len() != graph.n_edges() {
            return bad(format!(
                "{} latent counts for {} edges",
                self.latent.len(),
                graph.n_edges()
            ));
        }
        if self.latent.contains(&0) {
            return bad("latent count zero on an observed edge".into());
        }
        if node_exponents(graph, &self.latent) != self.m {
            return bad("node exponents disagree with latent counts".into());
        }
        if !crate::crm::in_region(self.sigma, self.tau)
            || !(self.alpha > 0.0)
            || !(self.w_star >= 0.0)
        {
            return bad("hyperparameters outside the admissible region".into());
        }
        if self.omega.iter().any(|o| !o.is_finite()) {
            return bad("non-finite log weight".into());
        }
        Ok(())
    }
}

/// Scalar record of one kept iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: u64,
    pub chain: u64,
    pub alpha: f64,
    pub sigma: f64,
    pub tau: f64,
    pub w_star: f64,
    pub log_post: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaSnapshot {
    pub iteration: u64,
    pub omega: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptanceCounts {
    pub hmc_accepted: u64,
    pub hmc_proposed: u64,
    pub hyper_accepted: u64,
    pub hyper_proposed: u64,
    pub latent_accepted: u64,
    pub latent_proposed: u64,
}

fn rate(a: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        a as f64 / n as f64
    }
}

impl AcceptanceCounts {
    pub fn hmc_rate(&self) -> f64 {
        rate(self.hmc_accepted, self.hmc_proposed)
    }

    pub fn hyper_rate(&self) -> f64 {
        rate(self.hyper_accepted, self.hyper_proposed)
    }

    pub fn latent_rate(&self) -> f64 {
        rate(self.latent_accepted, self.latent_proposed)
    }
}

/// Output of one chain.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub chain: u64,
    pub records: Vec<TraceRecord>,
    pub omega: Vec<OmegaSnapshot>,
    /// Counted over the kept (post-adaptation) iterations.
    pub acceptance: AcceptanceCounts,
    pub stepsize: f64,
    pub final_state: Option<McmcState>,
    /// Hyperparameters of the second node set (bipartite chains only).
    pub prime_records: Vec<TraceRecord>,
}

/// Scalar selectable from a trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Param {
    Alpha,
    Sigma,
    Tau,
    WStar,
    LogPost,
    /// `ς₂ = −σ/τ`
    SigmaOverTau,
    /// Weight of node `i`, from the `ω` snapshots.
    Weight(usize),
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Alpha => f.write_str("alpha"),
            Param::Sigma => f.write_str("sigma"),
            Param::Tau => f.write_str("tau"),
            Param::WStar => f.write_str("w_star"),
            Param::LogPost => f.write_str("log_post"),
            Param::SigmaOverTau => f.write_str("neg_sigma_over_tau"),
            Param::Weight(i) => write!(f, "w[{i}]"),
        }
    }
}

impl FromStr for Param {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "alpha" => Param::Alpha,
            "sigma" => Param::Sigma,
            "tau" => Param::Tau,
            "w_star" => Param::WStar,
            "log_post" => Param::LogPost,
            "neg_sigma_over_tau" => Param::SigmaOverTau,
            _ => {
                let inner = s.strip_prefix("w[").and_then(|r| r.strip_suffix(']'));
                match inner.and_then(|i| i.parse().ok()) {
                    Some(i) => Param::Weight(i),
                    None => return Err(Error::domain(format!("unknown parameter `{s}`"))),
                }
            }
        })
    }
}

impl ChainTrace {
    /// Kept values of `p`; `None` when a weight was not snapshotted.
    pub fn series(&self, p: Param) -> Option<Vec<f64>> {
        let f: fn(&TraceRecord) -> f64 = match p {
            Param::Alpha => |r| r.alpha,
            Param::Sigma => |r| r.sigma,
            Param::Tau => |r| r.tau,
            Param::WStar => |r| r.w_star,
            Param::LogPost => |r| r.log_post,
            Param::SigmaOverTau => |r| -r.sigma / r.tau,
            Param::Weight(i) => {
                if self.omega.is_empty() {
                    return None;
                }
                return self
                    .omega
                    .iter()
                    .map(|s| s.omega.get(i).map(|o| o.exp()))
                    .collect();
            }
        };
        Some(self.records.iter().map(f).collect())
    }
}
