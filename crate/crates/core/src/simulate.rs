//! Generative paths for GGP graphs.
//!
//! * Truncated inverse-Lévy: atoms above `ε`, then the conditional Poisson
//!   construction of the directed multigraph and its undirected projection.
//! * Gamma-process urn: exact for `σ = 0`, no truncation.
//! * Kallenberg construction: marks of a unit-rate process mapped through the
//!   inverse tail intensity, pairs thinned with `1 − e^{−2 w_i w_j}`.
//! * Erdős–Rényi and compound-Poisson special cases, bipartite graphs.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma as GammaDist};
use statrs::function::gamma::gamma_ur;

use crate::crm::levy::{inv_tail_from, ln_tail_unchecked, mass_below};
use crate::crm::mass::{gamma_draw, poisson_draw};
use crate::crm::GgpParams;
use crate::error::{Error, Result};
use crate::graph::{to_undirected, BipartiteGraph, CrmSample, DirectedMultigraph, UndirectedGraph};

pub const DEFAULT_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimPath {
    #[default]
    Truncated,
    Urn,
    Kallenberg,
    CompoundPoisson,
}

impl std::str::FromStr for SimPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truncated" => Ok(Self::Truncated),
            "urn" => Ok(Self::Urn),
            "kallenberg" => Ok(Self::Kallenberg),
            "compound-poisson" => Ok(Self::CompoundPoisson),
            _ => Err(Error::domain(format!("unknown simulation path `{s}`"))),
        }
    }
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

fn yes() -> bool {
    true
}

/// Everything needed to draw one undirected GGP graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub params: GgpParams,
    #[serde(default = "default_eps")]
    pub truncation_eps: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub path: SimPath,
    #[serde(default = "yes")]
    pub include_self_loops: bool,
}

impl SimConfig {
    pub fn new(params: GgpParams) -> Self {
        Self {
            params,
            truncation_eps: DEFAULT_EPS,
            seed: 0,
            path: SimPath::Truncated,
            include_self_loops: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.params.sigma();
        if !(self.truncation_eps > 0.0) || !self.truncation_eps.is_finite() {
            return Err(Error::domain(format!(
                "truncation eps must be positive, got {}",
                self.truncation_eps
            )));
        }
        match self.path {
            SimPath::Urn if s > 0.0 => Err(Error::domain("urn path needs σ ≤ 0")),
            SimPath::Kallenberg if s < 0.0 => Err(Error::domain("Kallenberg path needs σ ≥ 0")),
            SimPath::CompoundPoisson if s >= 0.0 => {
                Err(Error::domain("compound-Poisson path needs σ < 0"))
            }
            _ => Ok(()),
        }
    }
}

/// Expected total weight of the atoms dropped by truncation at `eps`.
pub fn expected_lost_mass(params: &GgpParams, eps: f64) -> f64 {
    params.alpha() * mass_below(params, eps)
}

/// i.i.d. draws from `ρ` restricted to `(ε, ∞)` and normalized.
///
/// Below `x0 = max(ε, 1/τ)` the proposal is the truncated power law
/// `w^{−1−σ}` accepted with `e^{−τ(w−ε)} ≥ e^{−1}`; above `x0` it is
/// `x0 + Exp(τ)` accepted with `(w/x0)^{−1−σ}` (or a conditioned gamma when
/// `σ < −1`). The piece is picked with its exact share of `ρ̄(ε)`.
#[derive(Clone, Debug)]
pub(crate) struct TruncatedJumps {
    sigma: f64,
    tau: f64,
    ln_eps: f64,
    eps: f64,
    x0: f64,
    ln_ratio: f64,
    p_low: f64,
    upper: Upper,
    /// `ln ρ̄(ε)`
    pub ln_tail_eps: f64,
}

#[derive(Clone, Debug)]
enum Upper {
    ShiftedExp,
    Gamma,
    Inverse(f64),
}

impl TruncatedJumps {
    pub(crate) fn new(sigma: f64, tau: f64, eps: f64) -> Self {
        let ln_tail_eps = ln_tail_unchecked(sigma, tau, eps);
        let x0 = if tau > 0.0 { eps.max(1.0 / tau) } else { eps };
        let p_low = if x0 > eps {
            -(ln_tail_unchecked(sigma, tau, x0) - ln_tail_eps).exp_m1()
        } else {
            0.0
        };
        let upper = if sigma >= -1.0 {
            Upper::ShiftedExp
        } else if gamma_ur(-sigma, tau * x0) > 0.05 {
            Upper::Gamma
        } else {
            Upper::Inverse(ln_tail_unchecked(sigma, tau, x0))
        };
        Self {
            sigma,
            tau,
            ln_eps: eps.ln(),
            eps,
            x0,
            ln_ratio: (x0 / eps).ln(),
            p_low,
            upper,
            ln_tail_eps,
        }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = self.sigma;
        if self.tau == 0.0 {
            let u: f64 = rng.random();
            return (self.ln_eps - (1.0 - u).ln() / s).exp();
        }
        if self.p_low > 0.0 && rng.random::<f64>() < self.p_low {
            loop {
                let u: f64 = rng.random();
                let ln_w = if s == 0.0 {
                    self.ln_eps + u * self.ln_ratio
                } else {
                    self.ln_eps - (u * (-s * self.ln_ratio).exp_m1()).ln_1p() / s
                };
                let w = ln_w.exp().min(self.x0);
                let e: f64 = Exp1.sample(rng);
                if self.tau * (w - self.eps) <= e {
                    return w;
                }
            }
        }
        match self.upper {
            Upper::ShiftedExp => loop {
                let e: f64 = Exp1.sample(rng);
                let w = self.x0 + e / self.tau;
                let v: f64 = Exp1.sample(rng);
                if (1.0 + s) * (w / self.x0).ln() <= v {
                    return w;
                }
            },
            Upper::Gamma => loop {
                let w = gamma_draw(-s, self.tau, rng);
                if w > self.x0 {
                    return w;
                }
            },
            Upper::Inverse(ln_tail_x0) => {
                let u: f64 = rng.random();
                inv_tail_from(s, self.tau, ln_tail_x0 + (1.0 - u).ln(), None)
            }
        }
    }
}

fn uniform_locations<R: Rng + ?Sized>(alpha: f64, k: usize, rng: &mut R) -> Vec<f64> {
    (0..k).map(|_| alpha * rng.random::<f64>()).collect()
}

/// Atoms of the restricted GGP with weight above `eps`.
///
/// `K ~ Poisson(α ρ̄(ε))` weights i.i.d. from the normalized restriction of
/// `ρ`, uniform locations on `[0, α]`. The remainder mass is the mean mass of
/// the dropped atoms, `α ∫_0^ε w ρ(dw)`.
pub fn sample_crm_truncated<R: Rng + ?Sized>(
    params: &GgpParams,
    eps: f64,
    rng: &mut R,
) -> Result<CrmSample> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!(
            "truncation eps must be positive, got {eps}"
        )));
    }
    let jumps = TruncatedJumps::new(params.sigma(), params.tau(), eps);
    let k = poisson_draw(params.alpha() * jumps.ln_tail_eps.exp(), rng) as usize;
    let weights: Vec<f64> = (0..k).map(|_| jumps.sample(rng)).collect();
    let locations = uniform_locations(params.alpha(), k, rng);
    Ok(CrmSample {
        weights,
        locations: Some(locations),
        remainder_mass: expected_lost_mass(params, eps),
    })
}

/// Descending weights `ρ̄^{-1}(ϑ_k / α)` for the points `ϑ_1 < ϑ_2 < …` of a
/// unit-rate Poisson process on `[0, α ρ̄(ε)]`.
pub(crate) fn inverse_levy_weights<R: Rng + ?Sized>(
    params: &GgpParams,
    eps: f64,
    rng: &mut R,
) -> Vec<f64> {
    let (s, t) = (params.sigma(), params.tau());
    let ln_tail_eps = ln_tail_unchecked(s, t, eps);
    let k = poisson_draw(params.alpha() * ln_tail_eps.exp(), rng) as usize;
    let mut marks: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    marks.sort_unstable_by(|a, b| a.total_cmp(b));
    let mut warm = None;
    marks
        .into_iter()
        .map(|u| {
            // ϑ/α = u ρ̄(ε); u = 0 has probability zero but maps to +∞
            let ln_y = ln_tail_eps + u.max(f64::MIN_POSITIVE).ln();
            let x = inv_tail_from(s, t, ln_y, warm).max(eps);
            warm = Some(x.ln());
            x
        })
        .collect()
}

/// Same law as [`sample_crm_truncated`] by the inverse Lévy method: ordered
/// points of a unit-rate process pushed through `ρ̄^{-1}`. Weights come out in
/// decreasing order.
pub fn sample_crm_truncated_inverse<R: Rng + ?Sized>(
    params: &GgpParams,
    eps: f64,
    rng: &mut R,
) -> Result<CrmSample> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!(
            "truncation eps must be positive, got {eps}"
        )));
    }
    let weights = inverse_levy_weights(params, eps, rng);
    let locations = uniform_locations(params.alpha(), weights.len(), rng);
    Ok(CrmSample {
        weights,
        locations: Some(locations),
        remainder_mass: expected_lost_mass(params, eps),
    })
}

/// Exact finite-activity draw (`σ < 0`): all `Poisson(α τ^σ/(−σ))` atoms,
/// i.i.d. Gamma(−σ, τ).
pub fn sample_crm_finite<R: Rng + ?Sized>(params: &GgpParams, rng: &mut R) -> Result<CrmSample> {
    let (s, t) = (params.sigma(), params.tau());
    if s >= 0.0 {
        return Err(Error::domain("exact finite CRM needs σ < 0"));
    }
    let k = poisson_draw(params.alpha() * t.powf(s) / -s, rng) as usize;
    let weights = (0..k).map(|_| gamma_draw(-s, t, rng)).collect();
    let locations = uniform_locations(params.alpha(), k, rng);
    Ok(CrmSample {
        weights,
        locations: Some(locations),
        remainder_mass: 0.0,
    })
}

/// Directed multigraph from the atoms plus the atom index of every node.
///
/// Node ids follow first appearance along the edge sequence.
fn directed_with_map<R: Rng + ?Sized>(
    weights: &[f64],
    loops: bool,
    rng: &mut R,
) -> Result<(DirectedMultigraph, Vec<usize>)> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateMass);
    }
    let alias =
        WeightedAliasIndex::new(weights.to_vec()).map_err(|e| Error::domain(e.to_string()))?;
    let d_star = poisson_draw(total * total, rng);
    let mut node_of: HashMap<usize, usize> = HashMap::new();
    let mut atom_of: Vec<usize> = Vec::new();
    let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
    let mut label = |a: usize, atom_of: &mut Vec<usize>| {
        *node_of.entry(a).or_insert_with(|| {
            atom_of.push(a);
            atom_of.len() - 1
        })
    };
    for _ in 0..d_star {
        let a = alias.sample(rng);
        let b = alias.sample(rng);
        if !loops && a == b {
            continue;
        }
        let i = label(a, &mut atom_of);
        let j = label(b, &mut atom_of);
        *counts.entry((i, j)).or_insert(0) += 1;
    }
    let d = DirectedMultigraph::from_counts(counts.into_iter().map(|((i, j), n)| (i, j, n)));
    Ok((d, atom_of))
}

/// `D* ~ Poisson(W²)` with `W` the represented atom mass; the `2D*`
/// endpoints are i.i.d. proportional to the weights. The remainder mass does
/// not generate edges.
pub fn sample_directed_conditional<R: Rng + ?Sized>(
    sample: &CrmSample,
    rng: &mut R,
) -> Result<DirectedMultigraph> {
    directed_with_map(&sample.weights, true, rng).map(|x| x.0)
}

/// Reorders atoms so that atom `k` generated node `k` for every node of the
/// graph; atoms without edges follow in their original order.
fn align_sample(sample: CrmSample, atom_of: &[usize]) -> CrmSample {
    let k = sample.weights.len();
    let mut used = vec![false; k];
    let mut order: Vec<usize> = Vec::with_capacity(k);
    for &a in atom_of {
        used[a] = true;
        order.push(a);
    }
    order.extend((0..k).filter(|&a| !used[a]));
    let weights = order.iter().map(|&a| sample.weights[a]).collect();
    let locations = sample
        .locations
        .map(|l| order.iter().map(|&a| l[a]).collect());
    CrmSample {
        weights,
        locations,
        remainder_mass: sample.remainder_mass,
    }
}

/// Truncated CRM draw followed by the conditional Poisson construction and the
/// undirected projection. The returned sample is reordered so that its first
/// `graph.n_nodes()` atoms are the weights of nodes `0, 1, …`.
pub fn sample_undirected_ggp<R: Rng + ?Sized>(
    config: &SimConfig,
    rng: &mut R,
) -> Result<(UndirectedGraph, CrmSample)> {
    config.validate()?;
    let sample = sample_crm_truncated(&config.params, config.truncation_eps, rng)?;
    graph_from_sample(sample, config.include_self_loops, rng)
}

fn graph_from_sample<R: Rng + ?Sized>(
    sample: CrmSample,
    loops: bool,
    rng: &mut R,
) -> Result<(UndirectedGraph, CrmSample)> {
    if sample.is_empty() {
        return Ok((UndirectedGraph::empty(), sample));
    }
    let (d, atom_of) = directed_with_map(&sample.weights, loops, rng)?;
    Ok((to_undirected(&d), align_sample(sample, &atom_of)))
}

/// Exact gamma-process multigraph (`σ = 0`) through the urn.
///
/// `W* ~ Gamma(α, τ)`, `D* ~ Poisson(W*²)`, and the `2D*` endpoint labels
/// follow the Chinese-restaurant urn: a new node with probability
/// `α/(α+n)`, node `j` with probability `m_j/(α+n)`.
pub fn sample_gamma_urn<R: Rng + ?Sized>(
    alpha: f64,
    tau: f64,
    rng: &mut R,
) -> Result<DirectedMultigraph> {
    let params = GgpParams::new(alpha, 0.0, tau)?;
    let w = gamma_draw(params.alpha(), params.tau(), rng);
    let d_star = poisson_draw(w * w, rng) as usize;
    // labels[k] is the node of the k-th endpoint drawn; picking a uniform past
    // endpoint selects node j with probability m_j / n.
    let mut labels: Vec<usize> = Vec::with_capacity(2 * d_star);
    let mut n_nodes = 0;
    for n in 0..2 * d_star {
        let u: f64 = rng.random::<f64>() * (alpha + n as f64);
        let node = if u < alpha {
            n_nodes += 1;
            n_nodes - 1
        } else {
            labels[((u - alpha) as usize).min(n - 1)]
        };
        labels.push(node);
    }
    Ok(DirectedMultigraph::from_edge_sequence(
        labels.chunks_exact(2).map(|c| (c[0], c[1])),
    ))
}

/// Bernoulli edges with `P(z_ij = 1) = 1 − e^{−2 w_i w_j}` for `i < j` and
/// `1 − e^{−w_i²}` on the diagonal.
///
/// Weights are visited in decreasing order so that the pair probability is
/// nonincreasing along each row; geometric skips with the current probability
/// as an upper bound, then thinning, give cost linear in nodes plus edges.
pub(crate) fn sample_pairs<R: Rng + ?Sized>(
    weights: &[f64],
    loops: bool,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let n = weights.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    let w: Vec<f64> = order.iter().map(|&i| weights[i]).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        if loops && rng.random::<f64>() < -(-w[i] * w[i]).exp_m1() {
            edges.push((order[i], order[i]));
        }
        let mut j = i + 1;
        if j >= n {
            continue;
        }
        // rate of the current bound: P = 1 − e^{−r}
        let mut r = 2.0 * w[i] * w[j];
        while j < n && r > 0.0 {
            let e: f64 = Exp1.sample(rng);
            let skip = (e / r).floor();
            if skip >= (n - j) as f64 {
                break;
            }
            j += skip as usize;
            let q = 2.0 * w[i] * w[j];
            // accept with (1 − e^{−q}) / (1 − e^{−r})
            if rng.random::<f64>() * (-(-r).exp_m1()) < -(-q).exp_m1() {
                edges.push((order[i], order[j]));
            }
            r = q;
            j += 1;
        }
    }
    edges
}

/// Kallenberg construction restricted to marks `ϑ ≤ α ρ̄(ε)`: weights
/// `ρ̄^{-1}(ϑ_i/α)`, pair links `1 − e^{−2 w_i w_j}`, loops `1 − e^{−w_i²}`,
/// isolated marks dropped.
pub fn sample_kallenberg<R: Rng + ?Sized>(
    params: &GgpParams,
    eps: f64,
    rng: &mut R,
) -> Result<UndirectedGraph> {
    sample_kallenberg_with_loops(params, eps, true, rng)
}

pub fn sample_kallenberg_with_loops<R: Rng + ?Sized>(
    params: &GgpParams,
    eps: f64,
    loops: bool,
    rng: &mut R,
) -> Result<UndirectedGraph> {
    if params.sigma() < 0.0 {
        return Err(Error::domain(
            "Kallenberg path needs σ ≥ 0; use the compound-Poisson path",
        ));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::domain(format!(
            "truncation eps must be positive, got {eps}"
        )));
    }
    let weights = inverse_levy_weights(params, eps, rng);
    Ok(UndirectedGraph::from_pairs(sample_pairs(
        &weights, loops, rng,
    )))
}

/// Dirac Lévy measure at `w0`: `Poisson(α)` nodes, every pair linked with
/// probability `1 − e^{−2 w0²}`.
pub fn sample_er_equivalent<R: Rng + ?Sized>(
    alpha: f64,
    w0: f64,
    loops: bool,
    rng: &mut R,
) -> Result<UndirectedGraph> {
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    if !(w0 >= 0.0) || !w0.is_finite() {
        return Err(Error::domain(format!("w0 must be nonnegative, got {w0}")));
    }
    let n = poisson_draw(alpha, rng) as usize;
    Ok(UndirectedGraph::from_pairs(sample_pairs(
        &vec![w0; n],
        loops,
        rng,
    )))
}

/// `Poisson(α)` nodes with weights `H^{-1}(U_i)` for i.i.d. uniforms.
pub fn sample_compound_poisson_graph<R, F>(
    alpha: f64,
    weight_cdf_inverse: F,
    loops: bool,
    rng: &mut R,
) -> Result<UndirectedGraph>
where
    R: Rng + ?Sized,
    F: Fn(f64) -> f64,
{
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    let n = poisson_draw(alpha, rng) as usize;
    let mut weights = Vec::with_capacity(n);
    for _ in 0..n {
        let w = weight_cdf_inverse(rng.random::<f64>());
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::domain(format!("inverse CDF returned {w}")));
        }
        weights.push(w);
    }
    Ok(UndirectedGraph::from_pairs(sample_pairs(
        &weights, loops, rng,
    )))
}

/// Compound-Poisson graph matching a finite-activity GGP (`σ < 0`): rate
/// `α τ^σ/(−σ)`, jumps Gamma(−σ, τ).
pub fn sample_ggp_compound_poisson<R: Rng + ?Sized>(
    params: &GgpParams,
    loops: bool,
    rng: &mut R,
) -> Result<UndirectedGraph> {
    let (s, t) = (params.sigma(), params.tau());
    if s >= 0.0 {
        return Err(Error::domain("compound-Poisson path needs σ < 0"));
    }
    let jumps = GammaDist::new(-s, t).map_err(|e| Error::domain(e.to_string()))?;
    sample_compound_poisson_graph(
        params.alpha() * t.powf(s) / -s,
        |u| jumps.inverse_cdf(u),
        loops,
        rng,
    )
}

/// Bipartite GGP graph: independent truncated atoms on each side,
/// `D* ~ Poisson(W W′)`, endpoints proportional to weights, binarized.
pub fn sample_bipartite<R: Rng + ?Sized>(
    params: &GgpParams,
    params_prime: &GgpParams,
    eps: f64,
    rng: &mut R,
) -> Result<BipartiteGraph> {
    sample_bipartite_with_atoms(params, params_prime, eps, rng).map(|x| x.0)
}

/// [`sample_bipartite`] also returning both atom sets, reordered so that node
/// `k` on each side is atom `k`.
pub fn sample_bipartite_with_atoms<R: Rng + ?Sized>(
    params: &GgpParams,
    params_prime: &GgpParams,
    eps: f64,
    rng: &mut R,
) -> Result<(BipartiteGraph, CrmSample, CrmSample)> {
    let left = sample_crm_truncated(params, eps, rng)?;
    let right = sample_crm_truncated(params_prime, eps, rng)?;
    let (g, latoms, ratoms) = bipartite_multigraph(&left.weights, &right.weights, rng)?;
    Ok((
        g.binarized(),
        align_sample(left, &latoms),
        align_sample(right, &ratoms),
    ))
}

/// Bipartite multigraph from explicit weights, with the atom behind every
/// node on each side.
pub(crate) fn bipartite_multigraph<R: Rng + ?Sized>(
    left: &[f64],
    right: &[f64],
    rng: &mut R,
) -> Result<(BipartiteGraph, Vec<usize>, Vec<usize>)> {
    let (wl, wr): (f64, f64) = (left.iter().sum(), right.iter().sum());
    if !(wl > 0.0 && wr > 0.0) {
        return Ok((BipartiteGraph::from_counts([]), vec![], vec![]));
    }
    let al = WeightedAliasIndex::new(left.to_vec()).map_err(|e| Error::domain(e.to_string()))?;
    let ar = WeightedAliasIndex::new(right.to_vec()).map_err(|e| Error::domain(e.to_string()))?;
    let d_star = poisson_draw(wl * wr, rng);
    let mut lmap: HashMap<usize, usize> = HashMap::new();
    let mut rmap: HashMap<usize, usize> = HashMap::new();
    let (mut latoms, mut ratoms) = (Vec::new(), Vec::new());
    let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
    for _ in 0..d_star {
        let a = al.sample(rng);
        let b = ar.sample(rng);
        let i = *lmap.entry(a).or_insert_with(|| {
            latoms.push(a);
            latoms.len() - 1
        });
        let j = *rmap.entry(b).or_insert_with(|| {
            ratoms.push(b);
            ratoms.len() - 1
        });
        *counts.entry((i, j)).or_insert(0) += 1;
    }
    let g = BipartiteGraph::from_counts(counts.into_iter().map(|((i, j), n)| (i, j, n)));
    Ok((g, latoms, ratoms))
}

/// One undirected graph along the configured path.
pub fn sample_graph<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<UndirectedGraph> {
    config.validate()?;
    let p = &config.params;
    let loops = config.include_self_loops;
    match config.path {
        SimPath::Truncated => sample_undirected_ggp(config, rng).map(|x| x.0),
        SimPath::Urn if p.sigma() == 0.0 => {
            let d = sample_gamma_urn(p.alpha(), p.tau(), rng)?;
            let d = if loops {
                d
            } else {
                DirectedMultigraph::from_counts(d.counts().iter().copied().filter(|c| c.0 != c.1))
            };
            Ok(to_undirected(&d))
        }
        SimPath::Urn => graph_from_sample(sample_crm_finite(p, rng)?, loops, rng).map(|x| x.0),
        SimPath::Kallenberg => sample_kallenberg_with_loops(p, config.truncation_eps, loops, rng),
        SimPath::CompoundPoisson => sample_ggp_compound_poisson(p, loops, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crm::levy::{mass_above, tail_intensity};
    use crate::diagnostics::stats::{chi_square_gof, ks_two_sample};
    use crate::rng::RngStream;
    use approx::assert_relative_eq;

    fn p(a: f64, s: f64, t: f64) -> GgpParams {
        GgpParams::new(a, s, t).unwrap()
    }

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn atom_count_and_mass_match_campbell() {
        let params = p(100.0, 0.5, 0.0);
        let mut rng = RngStream::new(1, 0);
        let ks: Vec<f64> = (0..4000)
            .map(|_| sample_crm_truncated(&params, 1.0, &mut rng).unwrap().len() as f64)
            .collect();
        let (m, se) = mean_se(&ks);
        assert!((m - 112.837_916_709_551_26).abs() < 3.0 * se, "{m} ± {se}");

        let params = p(20.0, 0.3, 2.0);
        let eps = 1e-3;
        let expected = 20.0 * mass_above(&params, eps);
        let sums: Vec<f64> = (0..4000)
            .map(|_| {
                let s = sample_crm_truncated(&params, eps, &mut rng).unwrap();
                assert!(s.weights.iter().all(|&w| w > eps));
                s.atom_mass()
            })
            .collect();
        let (m, se) = mean_se(&sums);
        assert!((m - expected).abs() < 3.0 * se, "{m} vs {expected} ± {se}");
    }

    #[test]
    fn jump_sampler_agrees_with_inverse_method() {
        // one jump per draw from each method keeps the samples independent
        for &(s, t, eps) in &[
            (0.5, 1.0, 1e-4),
            (0.0, 2.0, 1e-3),
            (-0.5, 1.0, 0.05),
            (-2.5, 0.7, 0.01),
            (-3.0, 1.0, 8.0),
        ] {
            let jumps = TruncatedJumps::new(s, t, eps);
            let mut rng = RngStream::new(2, 0);
            let a: Vec<f64> = (0..5000).map(|_| jumps.sample(&mut rng)).collect();
            let b: Vec<f64> = (0..5000)
                .map(|_| {
                    let u: f64 = rng.random();
                    inv_tail_from(s, t, jumps.ln_tail_eps + u.ln(), None)
                })
                .collect();
            let pv = ks_two_sample(&a, &b).p_value;
            assert!(pv > 0.01, "σ={s} τ={t} ε={eps}: p={pv}");
            assert!(a.iter().all(|&w| w > eps));
        }
        let _ = tail_intensity(&p(1.0, 0.5, 1.0), 1.0);
    }

    #[test]
    fn inverse_method_is_sorted_and_above_eps() {
        let mut rng = RngStream::new(3, 0);
        let s = sample_crm_truncated_inverse(&p(50.0, 0.5, 1.0), 1e-3, &mut rng).unwrap();
        assert!(s.weights.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.weights.iter().all(|&w| w >= 1e-3));
    }

    #[test]
    fn conditional_poisson_two_equal_weights() {
        let sample = CrmSample::new(vec![1.0, 1.0], None, 0.0).unwrap();
        let mut rng = RngStream::new(4, 0);
        let mut totals = Vec::new();
        let mut endpoint_counts = [0.0f64; 2];
        let mut n_off = 0.0;
        let reps = 20_000;
        for _ in 0..reps {
            let (d, atom_of) = directed_with_map(&sample.weights, true, &mut rng).unwrap();
            totals.push(d.total_edges() as f64);
            for &(i, j, n) in d.counts() {
                endpoint_counts[atom_of[i]] += n as f64;
                endpoint_counts[atom_of[j]] += n as f64;
                if atom_of[i] == 0 && atom_of[j] == 1 {
                    n_off += n as f64;
                }
            }
        }
        let (m, se) = mean_se(&totals);
        assert!((m - 4.0).abs() < 3.0 * se);
        let total: f64 = endpoint_counts.iter().sum();
        let pv = chi_square_gof(&endpoint_counts, &[total / 2.0, total / 2.0]).p_value;
        assert!(pv > 0.01, "p={pv}");
        // E[n_01] = w_0 w_1 = 1
        assert!((n_off / reps as f64 - 1.0).abs() < 0.03);
    }

    #[test]
    fn ordered_pair_rates() {
        let sample = CrmSample::new(vec![1.0, 2.0], None, 0.0).unwrap();
        let mut rng = RngStream::new(5, 0);
        let reps = 10_000;
        let mut n01 = Vec::with_capacity(reps);
        let mut n10 = Vec::with_capacity(reps);
        for _ in 0..reps {
            let (d, atom_of) = directed_with_map(&sample.weights, true, &mut rng).unwrap();
            let (mut a, mut b) = (0.0, 0.0);
            for &(i, j, n) in d.counts() {
                match (atom_of[i], atom_of[j]) {
                    (0, 1) => a += n as f64,
                    (1, 0) => b += n as f64,
                    _ => {}
                }
            }
            n01.push(a);
            n10.push(b);
        }
        for xs in [&n01, &n10] {
            let (m, se) = mean_se(xs);
            assert!((m - 2.0).abs() < 3.0 * se, "{m} ± {se}");
        }
    }

    #[test]
    fn single_weight_only_self_loops() {
        let sample = CrmSample::new(vec![3.0], None, 0.0).unwrap();
        let mut rng = RngStream::new(6, 0);
        let d = sample_directed_conditional(&sample, &mut rng).unwrap();
        assert!(d.total_edges() > 0);
        assert!(d.counts().iter().all(|c| c.0 == c.1));
        let empty = CrmSample::new(vec![], None, 0.5).unwrap();
        assert!(matches!(
            sample_directed_conditional(&empty, &mut rng),
            Err(Error::DegenerateMass)
        ));
    }

    #[test]
    fn finite_activity_graph_has_no_isolated_nodes() {
        let mut cfg = SimConfig::new(p(50.0, -1.0, 1.0));
        cfg.truncation_eps = 1e-9;
        let mut rng = RngStream::new(7, 0);
        let ks: Vec<f64> = (0..2000)
            .map(|_| {
                sample_crm_truncated(&cfg.params, cfg.truncation_eps, &mut rng)
                    .unwrap()
                    .len() as f64
            })
            .collect();
        let (m, se) = mean_se(&ks);
        // Poisson(α ρ̄(ε)) with ρ̄(0+) = τ^σ/(−σ) = 1
        assert!((m - 50.0).abs() < 3.0 * se + 50.0 * 1e-8);
        let (g, s) = sample_undirected_ggp(&cfg, &mut rng).unwrap();
        assert!(g.degrees().iter().all(|&d| d >= 1));
        assert!(s.len() >= g.n_nodes());
    }

    #[test]
    fn aligned_sample_matches_nodes() {
        let cfg = SimConfig {
            truncation_eps: 1e-3,
            ..SimConfig::new(p(10.0, 0.5, 1.0))
        };
        let mut rng = RngStream::new(8, 0);
        let (g, s) = sample_undirected_ggp(&cfg, &mut rng).unwrap();
        let n = g.n_nodes();
        let observed: f64 = s.weights[..n].iter().sum();
        let unobserved = s.weights[n..].iter().cloned().fold(0.0, f64::max);
        // the heaviest atoms almost surely have edges
        assert!(observed > unobserved);
    }

    #[test]
    fn urn_moments() {
        let mut rng = RngStream::new(9, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_gamma_urn(2.0, 1.0, &mut rng).unwrap().total_edges() as f64)
            .collect();
        let (m, se) = mean_se(&xs);
        assert!((m - 6.0).abs() < 3.0 * se, "{m} ± {se}");
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0);
        assert!((v - 90.0).abs() < 9.0, "var {v}");
        assert!(sample_gamma_urn(2.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn kallenberg_single_mark_loop_probability() {
        let mut rng = RngStream::new(10, 0);
        let hits = (0..20_000)
            .filter(|_| !sample_pairs(&[1.0], true, &mut rng).is_empty())
            .count();
        let p_hat = hits as f64 / 20_000.0;
        assert!((p_hat - 0.632_120_558_828_557_7).abs() < 0.011);
    }

    #[test]
    fn pair_thinning_matches_bernoulli_probabilities() {
        let w = [1.2, 0.05, 0.7, 0.3, 0.3, 0.01];
        let mut rng = RngStream::new(11, 0);
        let reps = 40_000;
        let mut hits = vec![vec![0usize; w.len()]; w.len()];
        for _ in 0..reps {
            for (i, j) in sample_pairs(&w, true, &mut rng) {
                hits[i.min(j)][i.max(j)] += 1;
            }
        }
        for i in 0..w.len() {
            for j in i..w.len() {
                let rate = if i == j {
                    w[i] * w[i]
                } else {
                    2.0 * w[i] * w[j]
                };
                let pr = -(-rate).exp_m1();
                let se = (pr * (1.0 - pr) / reps as f64).sqrt();
                let ph = hits[i][j] as f64 / reps as f64;
                assert!((ph - pr).abs() < 4.0 * se + 1e-12, "({i},{j}) {ph} vs {pr}");
            }
        }
    }

    #[test]
    fn er_density_and_limits() {
        let mut rng = RngStream::new(12, 0);
        let n_pairs_hit: Vec<f64> = (0..100)
            .map(|_| {
                let n = poisson_draw(500.0, &mut rng) as usize;
                let e = sample_pairs(&vec![0.2; n], false, &mut rng).len() as f64;
                e / (n * (n - 1) / 2) as f64
            })
            .collect();
        let (m, se) = mean_se(&n_pairs_hit);
        assert!((m - 0.076_883_653_613_364_2).abs() < 3.0 * se, "{m} ± {se}");
        let g = sample_er_equivalent(500.0, 0.0, true, &mut rng).unwrap();
        assert_eq!(g.n_edges(), 0);
    }

    #[test]
    fn er_edges_grow_quadratically() {
        let mut rng = RngStream::new(13, 0);
        let alphas = [100.0, 200.0, 400.0, 800.0];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &a in &alphas {
            for _ in 0..3 {
                let g = sample_er_equivalent(a, 0.3, true, &mut rng).unwrap();
                xs.push((g.n_nodes() as f64).ln());
                ys.push((g.n_edges() as f64).ln());
            }
        }
        let slope = crate::diagnostics::ols_slope(&xs, &ys);
        assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn compound_poisson_dirac_matches_er() {
        let mut rng = RngStream::new(14, 0);
        let a: Vec<f64> = (0..500)
            .map(|_| {
                sample_compound_poisson_graph(60.0, |_| 0.1, true, &mut rng)
                    .unwrap()
                    .n_edges() as f64
            })
            .collect();
        let b: Vec<f64> = (0..500)
            .map(|_| {
                sample_er_equivalent(60.0, 0.1, true, &mut rng)
                    .unwrap()
                    .n_edges() as f64
            })
            .collect();
        assert!(ks_two_sample(&a, &b).p_value > 0.01);
    }

    #[test]
    fn compound_poisson_matches_finite_ggp() {
        let params = p(40.0, -1.0, 1.0);
        let mut rng = RngStream::new(15, 0);
        let cfg = SimConfig {
            truncation_eps: 1e-12,
            ..SimConfig::new(params)
        };
        let (mut an, mut ae, mut bn, mut be) = (vec![], vec![], vec![], vec![]);
        for _ in 0..500 {
            let g = sample_ggp_compound_poisson(&params, true, &mut rng).unwrap();
            an.push(g.n_nodes() as f64);
            ae.push(g.n_edges() as f64);
            let (h, _) = sample_undirected_ggp(&cfg, &mut rng).unwrap();
            bn.push(h.n_nodes() as f64);
            be.push(h.n_edges() as f64);
        }
        assert!(ks_two_sample(&an, &bn).p_value > 0.01);
        assert!(ks_two_sample(&ae, &be).p_value > 0.01);
    }

    #[test]
    fn bipartite_single_atoms() {
        let mut rng = RngStream::new(16, 0);
        let reps = 20_000;
        let hit = (0..reps)
            .filter(|_| {
                bipartite_multigraph(&[1.0], &[1.0], &mut rng)
                    .unwrap()
                    .0
                    .n_edges()
                    == 1
            })
            .count();
        assert!((hit as f64 / reps as f64 - 0.632_120_558_828_557_7).abs() < 0.011);

        // E[D*] = E[W] E[W′] with the truncated means
        let (a, b) = (p(5.0, 0.3, 2.0), p(4.0, 0.0, 1.0));
        let eps = 1e-6;
        let mut tot = Vec::new();
        for _ in 0..4000 {
            let l = sample_crm_truncated(&a, eps, &mut rng).unwrap();
            let r = sample_crm_truncated(&b, eps, &mut rng).unwrap();
            let (g, la, ra) = bipartite_multigraph(&l.weights, &r.weights, &mut rng).unwrap();
            assert_eq!((g.n_left(), g.n_right()), (la.len(), ra.len()));
            tot.push(g.counts().unwrap().iter().sum::<u64>() as f64);
        }
        let expected = 5.0 * mass_above(&a, eps) * 4.0 * mass_above(&b, eps);
        let (m, se) = mean_se(&tot);
        assert!((m - expected).abs() < 3.0 * se, "{m} vs {expected}");
        let (g, l, r) = sample_bipartite_with_atoms(&a, &b, eps, &mut rng).unwrap();
        assert!(g.counts().is_none() && g.n_left() <= l.len() && g.n_right() <= r.len());
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = SimConfig {
            truncation_eps: 1e-4,
            ..SimConfig::new(p(30.0, 0.5, 1.0))
        };
        let a = sample_graph(&cfg, &mut RngStream::new(17, 0)).unwrap();
        let b = sample_graph(&cfg, &mut RngStream::new(17, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimConfig::new(p(1.0, 0.5, 1.0));
        cfg.path = SimPath::Urn;
        assert!(cfg.validate().is_err());
        cfg.path = SimPath::Kallenberg;
        assert!(cfg.validate().is_ok());
        cfg.truncation_eps = 0.0;
        assert!(cfg.validate().is_err());
        let json = r#"{"params":{"alpha":2,"sigma":0,"tau":1},"path":"urn"}"#;
        let c: SimConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.truncation_eps, DEFAULT_EPS);
        assert!(c.include_self_loops);
        assert!(serde_json::from_str::<SimConfig>(
            r#"{"params":{"alpha":2,"sigma":0,"tau":1},"bogus":1}"#
        )
        .is_err());
        let lost = expected_lost_mass(&p(300.0, 0.5, 1.0), 1e-6);
        assert_relative_eq!(lost, 300.0 * mass_below(&p(1.0, 0.5, 1.0), 1e-6));
    }
}
