use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::state::{HyperPrior, LatentMode, McmcState};
use crate::crm::levy::psi;
use crate::crm::mass::{gamma_draw, sample_total_mass, truncated_poisson};
use crate::crm::special::ln_gamma;
use crate::crm::{in_region, GgpParams};
use crate::error::Result;
use crate::graph::UndirectedGraph;

/// Log posterior of `ω` (with the log-Jacobian `Σ ω_i`) up to terms free of
/// the weights, and without the total-mass density of `w*`:
///
/// `Σ_i [m_i ω_i + ln ρ(w_i)] + Σ_i ω_i − (Σ_i w_i + w*)²`.
pub fn log_posterior(state: &McmcState, graph: &UndirectedGraph) -> Result<f64> {
    state.check(graph)?;
    Ok(log_post_at(state, &state.omega))
}

pub(crate) fn log_post_at(state: &McmcState, omega: &[f64]) -> f64 {
    let lg = ln_gamma(1.0 - state.sigma);
    let mut s = 0.0;
    let mut acc = 0.0;
    for (&o, &m) in omega.iter().zip(&state.m) {
        let w = o.exp();
        s += w;
        acc += (m as f64 - state.sigma) * o - state.tau * w - lg;
    }
    acc - (s + state.w_star).powi(2)
}

/// `∂/∂ω_i = m_i − σ − w_i (τ + 2 Σ_j w_j + 2 w*)`, the sum running over all
/// `j` including `i`.
pub fn grad_log_posterior(state: &McmcState) -> Vec<f64> {
    let mut g = vec![0.0; state.omega.len()];
    grad_into(state, &state.omega, &mut g);
    g
}

fn grad_into(state: &McmcState, omega: &[f64], out: &mut [f64]) {
    let s: f64 = omega.iter().map(|o| o.exp()).sum();
    let c = state.tau + 2.0 * (s + state.w_star);
    for ((g, &o), &m) in out.iter_mut().zip(omega).zip(&state.m) {
        *g = m as f64 - state.sigma - o.exp() * c;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HmcOutcome {
    pub accepted: bool,
    /// `min(1, r)`, zero when the trajectory diverged.
    pub accept_prob: f64,
}

/// One HMC transition of `ω` with unit mass matrix: half momentum step, `L`
/// position steps interleaved with `L − 1` full momentum steps, closing half
/// step. Non-finite energies count as rejections.
pub fn hmc_update<R: Rng + ?Sized>(
    state: &mut McmcState,
    steps: usize,
    stepsize: f64,
    rng: &mut R,
) -> HmcOutcome {
    let n = state.omega.len();
    let p0: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let mut p = p0.clone();
    let mut w = state.omega.clone();
    let mut g = vec![0.0; n];
    grad_into(state, &w, &mut g);
    for (pi, gi) in p.iter_mut().zip(&g) {
        *pi += 0.5 * stepsize * gi;
    }
    for l in 1..=steps {
        for (wi, pi) in w.iter_mut().zip(&p) {
            *wi += stepsize * pi;
        }
        grad_into(state, &w, &mut g);
        let h = if l < steps { stepsize } else { 0.5 * stepsize };
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi += h * gi;
        }
    }
    let lp0 = log_post_at(state, &state.omega);
    let lp1 = log_post_at(state, &w);
    let k0: f64 = p0.iter().map(|x| x * x).sum::<f64>() * 0.5;
    let k1: f64 = p.iter().map(|x| x * x).sum::<f64>() * 0.5;
    let log_r = lp1 - lp0 - (k1 - k0);
    if !log_r.is_finite() || w.iter().any(|x| !x.is_finite()) {
        return HmcOutcome {
            accepted: false,
            accept_prob: 0.0,
        };
    }
    let accept_prob = log_r.exp().min(1.0);
    let accepted = rng.random::<f64>().ln() < log_r;
    if accepted {
        state.omega = w;
    }
    HmcOutcome {
        accepted,
        accept_prob,
    }
}

/// Joint move on `(α, σ, τ, w*)`.
///
/// `τ̃` and `1 − σ̃` are log-normal random walks with sd `rw_sd`,
/// `α̃ ~ Gamma(N, ψ̃(2Σw + w*))`, and `w̃*` follows the `(α̃, σ̃, τ̃)` total-mass law
/// tilted by `2Σw + w*`. The reverse proposal uses the tilt `2Σw + w̃*`; the
/// normalizers of both tilted laws cancel against the target, leaving
///
/// `ln r = w*² − w̃*² − (τ̃−τ)Σw + (σ−σ̃)Σ ln w_i + N[ln Γ(1−σ) − ln Γ(1−σ̃)]
///        + N[ln ψ(2Σw + w̃*) − ln ψ̃(2Σw + w*)]`
///
/// under the improper priors.
pub fn hyper_update<R: Rng + ?Sized>(
    state: &mut McmcState,
    rw_sd: f64,
    prior: &HyperPrior,
    rng: &mut R,
) -> bool {
    let n = state.omega.len() as f64;
    let (sigma, tau) = (state.sigma, state.tau);
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    let tau_new = tau * (rw_sd * z1).exp();
    let oms_new = (1.0 - sigma) * (rw_sd * z2).exp();
    let sigma_new = 1.0 - oms_new;
    if !in_region(sigma_new, tau_new) {
        return false;
    }
    let s: f64 = state.omega.iter().map(|o| o.exp()).sum();
    let sum_ln_w: f64 = state.omega.iter().sum();
    let c = 2.0 * s + state.w_star;
    let r_new = psi(sigma_new, tau_new, c);
    let alpha_new = gamma_draw(n, r_new, rng);
    let tilted = match GgpParams::new(alpha_new, sigma_new, tau_new + c) {
        Ok(p) => p,
        Err(_) => return false,
    };
    let w_star_new = sample_total_mass(&tilted, rng);
    let r_old = psi(sigma, tau, 2.0 * s + w_star_new);
    let mut log_r = state.w_star.powi(2) - w_star_new.powi(2) - (tau_new - tau) * s
        + (sigma - sigma_new) * sum_ln_w
        + n * (ln_gamma(1.0 - sigma) - ln_gamma(1.0 - sigma_new))
        + n * (r_old.ln() - r_new.ln());
    log_r += prior.log_excess(alpha_new.ln(), tau_new.ln(), oms_new.ln())
        - prior.log_excess(state.alpha.ln(), tau.ln(), (1.0 - sigma).ln());
    if !log_r.is_finite() {
        return false;
    }
    if rng.random::<f64>().ln() < log_r {
        state.alpha = alpha_new;
        state.sigma = sigma_new;
        state.tau = tau_new;
        state.w_star = w_star_new;
        true
    } else {
        false
    }
}

/// Refreshes the latent counts and keeps `m` in step. Returns the number of
/// accepted changes (every edge counts as accepted in exact mode).
///
/// The count on `{i, j}` has law `tPoisson((2 − δ_ij) w_i w_j)`. The MH mode
/// proposes `n ± 1` with equal probability, and always `2` from `1`.
pub fn latent_update<R: Rng + ?Sized>(
    state: &mut McmcState,
    graph: &UndirectedGraph,
    mode: LatentMode,
    rng: &mut R,
) -> u64 {
    let w = state.weights();
    let mut accepted = 0;
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        let lambda = if i == j {
            w[i] * w[i]
        } else {
            2.0 * w[i] * w[j]
        };
        let old = state.latent[e];
        let new = match mode {
            LatentMode::Exact => truncated_poisson(lambda, rng),
            LatentMode::Mh => {
                let up = old == 1 || rng.random::<bool>();
                let (cand, log_r) = if up {
                    // from 1 the move is forced, from 2 the way back has probability ½
                    let q = if old == 1 { 0.5f64.ln() } else { 0.0 };
                    (old + 1, lambda.ln() - ((old + 1) as f64).ln() + q)
                } else {
                    let q = if old == 2 { 2.0f64.ln() } else { 0.0 };
                    (old - 1, (old as f64).ln() - lambda.ln() + q)
                };
                if rng.random::<f64>().ln() < log_r {
                    cand
                } else {
                    old
                }
            }
        };
        if new != old || mode == LatentMode::Exact {
            accepted += 1;
        }
        if new != old {
            state.latent[e] = new;
            state.m[i] = state.m[i] + new - old;
            state.m[j] = state.m[j] + new - old;
        }
    }
    accepted
}
