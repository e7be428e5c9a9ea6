use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::state::{ChainTrace, HyperPrior, McmcConfig, TraceRecord};
use crate::crm::levy::{ln_kappa_unchecked, psi};
use crate::crm::mass::{gamma_draw, sample_total_mass, truncated_poisson};
use crate::crm::{in_region, GgpParams};
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;

/// `ln[α^N e^{−αψ(z)} Π_i κ(m_i, z)]`: log-probability of the counts `m` of
/// the observed atoms, given the total weight `z` of the other side.
pub fn bipartite_log_marginal(alpha: f64, sigma: f64, tau: f64, m: &[u64], z: f64) -> f64 {
    let n = m.len() as f64;
    n * alpha.ln() - alpha * psi(sigma, tau, z)
        + m.iter()
            .map(|&k| ln_kappa_unchecked(sigma, tau, k as f64, z))
            .sum::<f64>()
}

/// Gibbs state for a bipartite graph. Unprimed fields describe the left
/// nodes, primed fields the right nodes (whose `τ'` stays at 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipartiteState {
    pub w: Vec<f64>,
    pub w_star: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub tau: f64,
    pub w_prime: Vec<f64>,
    pub w_star_prime: f64,
    pub alpha_prime: f64,
    pub sigma_prime: f64,
    pub tau_prime: f64,
    pub latent: Vec<u64>,
    pub m: Vec<u64>,
    pub m_prime: Vec<u64>,
}

impl BipartiteState {
    pub fn initialize(graph: &BipartiteGraph) -> Result<Self> {
        if graph.n_edges() == 0 {
            return Err(Error::EmptyGraph);
        }
        let root = (graph.n_edges() as f64).sqrt();
        let w: Vec<f64> = graph
            .left_degrees()
            .iter()
            .map(|&d| d as f64 / root)
            .collect();
        let w_prime: Vec<f64> = graph
            .right_degrees()
            .iter()
            .map(|&d| d as f64 / root)
            .collect();
        let latent = vec![1u64; graph.n_edges()];
        let (m, m_prime) = exponents(graph, &latent);
        let w_star = 0.1;
        let w_star_prime = 0.1;
        let z = w_prime.iter().sum::<f64>() + w_star_prime;
        let zp = w.iter().sum::<f64>() + w_star;
        Ok(Self {
            alpha: w.len() as f64 / psi(0.0, 1.0, z),
            alpha_prime: w_prime.len() as f64 / psi(0.0, 1.0, zp),
            w,
            w_star,
            sigma: 0.0,
            tau: 1.0,
            w_prime,
            w_star_prime,
            sigma_prime: 0.0,
            tau_prime: 1.0,
            latent,
            m,
            m_prime,
        })
    }
}

fn exponents(graph: &BipartiteGraph, latent: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let mut m = vec![0u64; graph.n_left()];
    let mut mp = vec![0u64; graph.n_right()];
    for (&(i, j), &n) in graph.edges().iter().zip(latent) {
        m[i] += n;
        mp[j] += n;
    }
    (m, mp)
}

/// MH on `(α, σ, τ)` with the weights integrated out. `τ̃`, `1−σ̃` are
/// log-normal random walks (`τ` frozen when `move_tau` is false) and
/// `α̃ ~ Gamma(N, ψ̃(z))`, giving `r = (ψ/ψ̃)^N Π κ̃/κ` under the improper priors.
#[allow(clippy::too_many_arguments)]
pub(crate) fn hyper_mh<R: Rng + ?Sized>(
    (alpha, sigma, tau): (f64, f64, f64),
    move_tau: bool,
    m: &[u64],
    z: f64,
    rw_sd: f64,
    prior: &HyperPrior,
    rng: &mut R,
) -> Option<(f64, f64, f64)> {
    let n = m.len() as f64;
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    let tau_new = if move_tau {
        tau * (rw_sd * z1).exp()
    } else {
        tau
    };
    let oms_new = (1.0 - sigma) * (rw_sd * z2).exp();
    let sigma_new = 1.0 - oms_new;
    if !in_region(sigma_new, tau_new) {
        return None;
    }
    let p_old = psi(sigma, tau, z);
    let p_new = psi(sigma_new, tau_new, z);
    let alpha_new = gamma_draw(n, p_new, rng);
    let kappa_diff: f64 = m
        .iter()
        .map(|&k| {
            ln_kappa_unchecked(sigma_new, tau_new, k as f64, z)
                - ln_kappa_unchecked(sigma, tau, k as f64, z)
        })
        .sum();
    let log_r = n * (p_old.ln() - p_new.ln())
        + kappa_diff
        + prior.log_excess(alpha_new.ln(), tau_new.ln(), oms_new.ln())
        - prior.log_excess(alpha.ln(), tau.ln(), (1.0 - sigma).ln());
    (log_r.is_finite() && rng.random::<f64>().ln() < log_r)
        .then_some((alpha_new, sigma_new, tau_new))
}

/// `w_i ~ Gamma(m_i − σ, rate)`.
pub(crate) fn sample_weights<R: Rng + ?Sized>(
    m: &[u64],
    sigma: f64,
    rate: f64,
    rng: &mut R,
) -> Vec<f64> {
    m.iter()
        .map(|&k| gamma_draw(k as f64 - sigma, rate, rng))
        .collect()
}

/// One Gibbs sweep. Returns the number of accepted hyperparameter moves (0–2).
pub(crate) fn gibbs_sweep<R: Rng + ?Sized>(
    st: &mut BipartiteState,
    graph: &BipartiteGraph,
    rw_sd: f64,
    prior: &HyperPrior,
    rng: &mut R,
) -> Result<u32> {
    let mut accepted = 0;
    let z = st.w_prime.iter().sum::<f64>() + st.w_star_prime;
    if let Some((a, s, t)) = hyper_mh(
        (st.alpha, st.sigma, st.tau),
        true,
        &st.m,
        z,
        rw_sd,
        prior,
        rng,
    ) {
        (st.alpha, st.sigma, st.tau) = (a, s, t);
        accepted += 1;
    }
    st.w = sample_weights(&st.m, st.sigma, st.tau + z, rng);
    st.w_star = sample_total_mass(&GgpParams::new(st.alpha, st.sigma, st.tau + z)?, rng);

    let zp = st.w.iter().sum::<f64>() + st.w_star;
    let cur = (st.alpha_prime, st.sigma_prime, st.tau_prime);
    if let Some((a, s, _)) = hyper_mh(cur, false, &st.m_prime, zp, rw_sd, prior, rng) {
        (st.alpha_prime, st.sigma_prime) = (a, s);
        accepted += 1;
    }
    st.w_prime = sample_weights(&st.m_prime, st.sigma_prime, st.tau_prime + zp, rng);
    st.w_star_prime = sample_total_mass(
        &GgpParams::new(st.alpha_prime, st.sigma_prime, st.tau_prime + zp)?,
        rng,
    );

    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        let new = truncated_poisson(st.w[i] * st.w_prime[j], rng);
        let old = st.latent[e];
        st.latent[e] = new;
        st.m[i] = st.m[i] + new - old;
        st.m_prime[j] = st.m_prime[j] + new - old;
    }
    Ok(accepted)
}

/// Gibbs sampler for a bipartite graph. `records` hold the left-side
/// hyperparameters, `prime_records` the right side; `log_post` is the
/// respective [`bipartite_log_marginal`].
pub fn run_bipartite_gibbs<R: Rng + ?Sized>(
    graph: &BipartiteGraph,
    config: &McmcConfig,
    chain: u64,
    rng: &mut R,
) -> Result<ChainTrace> {
    config.validate()?;
    let graph = graph.binarized();
    let mut st = BipartiteState::initialize(&graph)?;
    let burn = config.burn_in();
    let mut trace = ChainTrace {
        chain,
        ..ChainTrace::default()
    };
    for t in 1..=config.n_iter {
        let acc = gibbs_sweep(&mut st, &graph, config.rw_sd, &config.prior, rng)?;
        if t <= burn {
            continue;
        }
        trace.acceptance.hyper_proposed += 2;
        trace.acceptance.hyper_accepted += acc as u64;
        if (t - burn) % config.thin != 0 {
            continue;
        }
        let z = st.w_prime.iter().sum::<f64>() + st.w_star_prime;
        let zp = st.w.iter().sum::<f64>() + st.w_star;
        trace.records.push(TraceRecord {
            iteration: t as u64,
            chain,
            alpha: st.alpha,
            sigma: st.sigma,
            tau: st.tau,
            w_star: st.w_star,
            log_post: bipartite_log_marginal(st.alpha, st.sigma, st.tau, &st.m, z),
        });
        trace.prime_records.push(TraceRecord {
            iteration: t as u64,
            chain,
            alpha: st.alpha_prime,
            sigma: st.sigma_prime,
            tau: st.tau_prime,
            w_star: st.w_star_prime,
            log_post: bipartite_log_marginal(
                st.alpha_prime,
                st.sigma_prime,
                st.tau_prime,
                &st.m_prime,
                zp,
            ),
        });
    }
    debug_assert_eq!(
        exponents(&graph, &st.latent),
        (st.m.clone(), st.m_prime.clone())
    );
    Ok(trace)
}
