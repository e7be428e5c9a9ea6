//! Convergence checks, posterior summaries, the sparsity test, posterior
//! predictive degree bands, and the empirical scaling and power-law studies.

pub mod stats;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crm::special::ln_gamma;
use crate::crm::GgpParams;
use crate::error::{Error, Result};
use crate::graph::{degree_histogram, multigraph_degree_fractions, UndirectedGraph};
use crate::inference::{ChainTrace, Param};
use crate::rng::RngStream;
use crate::simulate::{
    sample_crm_truncated, sample_directed_conditional, sample_graph, SimConfig, SimPath,
};

pub use stats::{chi_square_gof, ks_two_sample, TestResult};

const MIN_PSRF_SAMPLES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsrfEntry {
    pub param: String,
    pub psrf: f64,
    pub chain_means: Vec<f64>,
    pub chain_vars: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsrfReport {
    pub entries: Vec<PsrfEntry>,
    pub max: f64,
}

/// Between/within potential scale reduction for one scalar.
///
/// With `n` draws per chain, `W` the mean within-chain variance and `B/n` the
/// variance of the chain means, `R = √((W + B/n)/W)`. Identical chains give
/// exactly one; a degenerate scalar (`W = B = 0`) also reports one.
pub fn psrf_series(chains: &[&[f64]]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    if chains.len() < 2 {
        return Err(Error::TooFewChains {
            needed: 2,
            got: chains.len(),
        });
    }
    let n = chains[0].len();
    if chains.iter().any(|c| c.len() != n) {
        return Err(Error::domain("PSRF needs equal-length chains"));
    }
    if n < MIN_PSRF_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_PSRF_SAMPLES,
            got: n,
        });
    }
    let nf = n as f64;
    let means: Vec<f64> = chains.iter().map(|c| c.iter().sum::<f64>() / nf).collect();
    let vars: Vec<f64> = chains
        .iter()
        .zip(&means)
        .map(|(c, m)| c.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (nf - 1.0))
        .collect();
    let k = chains.len() as f64;
    let w = vars.iter().sum::<f64>() / k;
    let grand = means.iter().sum::<f64>() / k;
    let b_over_n = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (k - 1.0);
    let r = if w > 0.0 {
        (1.0 + b_over_n / w).sqrt()
    } else if b_over_n == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok((r, means, vars))
}

pub fn psrf(traces: &[ChainTrace], params: &[Param]) -> Result<PsrfReport> {
    if traces.len() < 2 {
        return Err(Error::TooFewChains {
            needed: 2,
            got: traces.len(),
        });
    }
    let mut entries = Vec::with_capacity(params.len());
    for &p in params {
        let series: Vec<Vec<f64>> = traces
            .iter()
            .map(|t| {
                t.series(p)
                    .ok_or_else(|| Error::domain(format!("trace has no data for {p}")))
            })
            .collect::<Result<_>>()?;
        let refs: Vec<&[f64]> = series.iter().map(Vec::as_slice).collect();
        let (r, chain_means, chain_vars) = psrf_series(&refs)?;
        entries.push(PsrfEntry {
            param: p.to_string(),
            psrf: r,
            chain_means,
            chain_vars,
        });
    }
    let max = entries
        .iter()
        .map(|e| e.psrf)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(PsrfReport { entries, max })
}

/// Linear-interpolation quantile of sorted data (`q ∈ [0, 1]`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Equal-tailed interval at `level`.
pub fn credible_interval(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!(
            "level must lie in (0, 1), got {level}"
        )));
    }
    let needed = (2.0 / (1.0 - level)).ceil() as usize;
    if samples.len() < needed {
        return Err(Error::TooFewSamples {
            needed,
            got: samples.len(),
        });
    }
    let mut s = samples.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    let a = 0.5 * (1.0 - level);
    Ok((quantile_sorted(&s, a), quantile_sorted(&s, 1.0 - a)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsityTestResult {
    /// Posterior probability that `σ ≥ 0`.
    pub p_sparse: f64,
    /// Equal-tailed 99% interval for `σ`.
    pub ci_sigma: (f64, f64),
    pub max_psrf: Option<f64>,
    pub n_draws: usize,
}

/// Pools the kept draws of all chains.
pub fn sparsity_test(traces: &[ChainTrace]) -> Result<SparsityTestResult> {
    let sigma: Vec<f64> = traces
        .iter()
        .flat_map(|t| t.records.iter().map(|r| r.sigma))
        .collect();
    if sigma.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let p_sparse = sigma.iter().filter(|&&s| s >= 0.0).count() as f64 / sigma.len() as f64;
    let ci_sigma = credible_interval(&sigma, 0.99)?;
    let max_psrf = psrf(
        traces,
        &[Param::Alpha, Param::Sigma, Param::Tau, Param::WStar],
    )
    .ok()
    .map(|r| r.max);
    if let Some(r) = max_psrf {
        if r > 1.1 {
            log::warn!("max PSRF {r:.3} > 1.1; chains may not have converged");
        }
    }
    Ok(SparsityTestResult {
        p_sparse,
        ci_sigma,
        max_psrf,
        n_draws: sigma.len(),
    })
}

/// Unit bins for degrees 1–16, then `[2^k + 1, 2^{k+1}]`.
pub fn degree_bins(max_degree: usize) -> Vec<(usize, usize)> {
    let mut bins: Vec<(usize, usize)> = (1..=16.min(max_degree.max(1))).map(|d| (d, d)).collect();
    let mut lo = 17;
    while lo <= max_degree {
        let hi = 2 * (lo - 1);
        bins.push((lo, hi));
        lo = hi + 1;
    }
    bins
}

fn bin_counts(hist: &BTreeMap<usize, usize>, bins: &[(usize, usize)]) -> Vec<f64> {
    bins.iter()
        .map(|&(lo, hi)| {
            hist.range(lo..=hi)
                .map(|(_, &c)| c as f64)
                .fold(0.0, |a, b| a + b)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeBand {
    pub bin_lo: usize,
    pub bin_hi: usize,
    pub lo: f64,
    pub median: f64,
    pub hi: f64,
    pub observed: Option<f64>,
}

/// Degree-count bands (2.5%, 50%, 97.5%) from graphs simulated at posterior
/// draws of `(α, σ, τ)` picked uniformly from the pooled kept records.
///
/// `template` supplies the truncation level and self-loop flag; its path is
/// overridden when the drawn `σ` needs another construction.
pub fn posterior_predictive_degrees(
    traces: &[ChainTrace],
    n_draws: usize,
    template: &SimConfig,
    observed: Option<&UndirectedGraph>,
    seed: u64,
) -> Result<Vec<DegreeBand>> {
    if n_draws == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let pool: Vec<(f64, f64, f64)> = traces
        .iter()
        .flat_map(|t| t.records.iter().map(|r| (r.alpha, r.sigma, r.tau)))
        .collect();
    if pool.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let root = RngStream::new(seed, 0);
    let hists: Vec<BTreeMap<usize, usize>> = (0..n_draws)
        .into_par_iter()
        .map(|k| {
            use rand::Rng;
            let mut rng = root.child(k as u64);
            let (a, s, t) = pool[rng.random_range(0..pool.len())];
            let mut cfg = SimConfig {
                params: GgpParams::new(a, s, t)?,
                ..*template
            };
            if s < 0.0 {
                cfg.path = SimPath::Urn;
            } else if cfg.path == SimPath::Urn && s > 0.0 {
                cfg.path = SimPath::Truncated;
            }
            Ok(degree_histogram(&sample_graph(&cfg, &mut rng)?))
        })
        .collect::<Result<_>>()?;
    let obs_hist = observed.map(degree_histogram);
    let max_deg = hists
        .iter()
        .chain(obs_hist.iter())
        .filter_map(|h| h.keys().next_back().copied())
        .max()
        .unwrap_or(1);
    let bins = degree_bins(max_deg);
    let per_draw: Vec<Vec<f64>> = hists.iter().map(|h| bin_counts(h, &bins)).collect();
    let obs = obs_hist.map(|h| bin_counts(&h, &bins));
    Ok(bins
        .iter()
        .enumerate()
        .map(|(b, &(bin_lo, bin_hi))| {
            let mut col: Vec<f64> = per_draw.iter().map(|c| c[b]).collect();
            col.sort_unstable_by(f64::total_cmp);
            DegreeBand {
                bin_lo,
                bin_hi,
                lo: quantile_sorted(&col, 0.025),
                median: quantile_sorted(&col, 0.5),
                hi: quantile_sorted(&col, 0.975),
                observed: obs.as_ref().map(|o| o[b]),
            }
        })
        .collect())
}

/// Ordinary least-squares slope of `ys` on `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub sigma: f64,
    pub tau: f64,
    pub alpha: f64,
    pub seed: u64,
    pub n_nodes: usize,
    pub n_edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub sigma: f64,
    pub tau: f64,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub fits: Vec<ScalingFit>,
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    quantile_sorted(xs, 0.5)
}

/// Slope of `ln N^(e)` on `ln N` from per-`α` medians over seeds.
pub fn fit_scaling_slope(rows: &[ScalingRow]) -> f64 {
    let mut by_alpha: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        let e = by_alpha.entry(r.alpha.to_bits()).or_default();
        e.0.push(r.n_nodes as f64);
        e.1.push(r.n_edges as f64);
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (_, (mut n, mut e)) in by_alpha {
        xs.push(median(&mut n).ln());
        ys.push(median(&mut e).ln());
    }
    ols_slope(&xs, &ys)
}

/// Node and edge counts over an `α` grid for each `(σ, τ)`. Finite-activity
/// settings are drawn exactly; the others are truncated at `eps`.
pub fn scaling_experiment(
    params: &[(f64, f64)],
    alphas: &[f64],
    seeds: &[u64],
    eps: f64,
) -> Result<ScalingReport> {
    if alphas.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: alphas.len(),
        });
    }
    if seeds.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: seeds.len(),
        });
    }
    let jobs: Vec<(usize, usize, u64)> = (0..params.len())
        .flat_map(|p| (0..alphas.len()).flat_map(move |a| seeds.iter().map(move |&s| (p, a, s))))
        .collect();
    let rows: Vec<ScalingRow> = jobs
        .into_par_iter()
        .map(|(p, a, seed)| {
            let (sigma, tau) = params[p];
            let mut cfg = SimConfig::new(GgpParams::new(alphas[a], sigma, tau)?);
            cfg.truncation_eps = eps;
            cfg.seed = seed;
            if sigma < 0.0 {
                cfg.path = SimPath::Urn;
            }
            let mut rng = RngStream::new(seed, ((p as u64) << 32) | a as u64);
            let g = sample_graph(&cfg, &mut rng)?;
            Ok(ScalingRow {
                sigma,
                tau,
                alpha: alphas[a],
                seed,
                n_nodes: g.n_nodes(),
                n_edges: g.n_edges(),
            })
        })
        .collect::<Result<_>>()?;
    let fits = params
        .iter()
        .map(|&(sigma, tau)| {
            let sub: Vec<ScalingRow> = rows
                .iter()
                .filter(|r| r.sigma == sigma && r.tau == tau)
                .cloned()
                .collect();
            ScalingFit {
                sigma,
                tau,
                slope: fit_scaling_slope(&sub),
            }
        })
        .collect();
    Ok(ScalingReport { rows, fits })
}

/// Limit fraction `p_{σ,j} = σ Γ(j−σ) / (Γ(1−σ) Γ(j+1))` of multigraph nodes
/// with `j` incident edges.
pub fn powerlaw_probability(sigma: f64, j: usize) -> f64 {
    let j = j as f64;
    (sigma.ln() + ln_gamma(j - sigma) - ln_gamma(1.0 - sigma) - ln_gamma(j + 1.0)).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerlawRow {
    pub j: usize,
    pub empirical: f64,
    pub theoretical: f64,
    pub gap: f64,
}

/// Mean multigraph degree fractions over seeds against their limits.
pub fn powerlaw_check(
    params: &GgpParams,
    seeds: &[u64],
    j_max: usize,
    eps: f64,
) -> Result<Vec<PowerlawRow>> {
    let sigma = params.sigma();
    if !(sigma > 0.0) {
        return Err(Error::domain("power-law limit needs 0 < σ < 1"));
    }
    if seeds.is_empty() || j_max == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let fractions: Vec<Vec<f64>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = RngStream::new(seed, 0);
            let sample = sample_crm_truncated(params, eps, &mut rng)?;
            let d = sample_directed_conditional(&sample, &mut rng)?;
            Ok(multigraph_degree_fractions(&d, j_max))
        })
        .collect::<Result<_>>()?;
    let k = fractions.len() as f64;
    Ok((1..=j_max)
        .map(|j| {
            let empirical = fractions.iter().map(|f| f[j - 1]).sum::<f64>() / k;
            let theoretical = powerlaw_probability(sigma, j);
            PowerlawRow {
                j,
                empirical,
                theoretical,
                gap: (empirical - theoretical).abs(),
            }
        })
        .collect())
}
