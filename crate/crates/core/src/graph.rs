//! Graph value types: the directed multigraph of edge counts, its undirected
//! binary projection, bipartite graphs, and the CRM atoms that generate them.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts `n_ij ≥ 1` over ordered pairs of contiguous node ids.
///
/// Counts are stored sorted by `(i, j)`. Every id below `n_nodes` is an
/// endpoint of at least one stored pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedMultigraph {
    n_nodes: usize,
    counts: Vec<(usize, usize, u64)>,
    total_edges: u64,
}

impl DirectedMultigraph {
    pub fn empty() -> Self {
        Self {
            n_nodes: 0,
            counts: Vec::new(),
            total_edges: 0,
        }
    }

    /// Aggregates a sequence of directed edges. Node ids are relabelled in
    /// order of first appearance along the sequence.
    pub fn from_edge_sequence<I: IntoIterator<Item = (usize, usize)>>(edges: I) -> Self {
        let mut relabel: HashMap<usize, usize> = HashMap::new();
        let mut agg: HashMap<(usize, usize), u64> = HashMap::new();
        for (i, j) in edges {
            let next = relabel.len();
            let a = *relabel.entry(i).or_insert(next);
            let next = relabel.len();
            let b = *relabel.entry(j).or_insert(next);
            *agg.entry((a, b)).or_insert(0) += 1;
        }
        Self::freeze(relabel.len(), agg)
    }

    /// Builds from explicit counts. Zero counts are dropped; ids are compacted
    /// monotonically so that relative order is kept.
    pub fn from_counts<I: IntoIterator<Item = (usize, usize, u64)>>(counts: I) -> Self {
        let mut agg: HashMap<(usize, usize), u64> = HashMap::new();
        for (i, j, n) in counts {
            if n > 0 {
                *agg.entry((i, j)).or_insert(0) += n;
            }
        }
        let mut ids: Vec<usize> = agg.keys().flat_map(|&(i, j)| [i, j]).collect();
        ids.sort_unstable();
        ids.dedup();
        let pos: HashMap<usize, usize> = ids.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let agg = agg
            .into_iter()
            .map(|((i, j), n)| ((pos[&i], pos[&j]), n))
            .collect();
        Self::freeze(ids.len(), agg)
    }

    fn freeze(n_nodes: usize, agg: HashMap<(usize, usize), u64>) -> Self {
        let mut counts: Vec<(usize, usize, u64)> =
            agg.into_iter().map(|((i, j), n)| (i, j, n)).collect();
        counts.sort_unstable();
        let total_edges = counts.iter().map(|c| c.2).sum();
        Self {
            n_nodes,
            counts,
            total_edges,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// `D*`, the sum of all counts.
    pub fn total_edges(&self) -> u64 {
        self.total_edges
    }

    /// Sorted `(i, j, n_ij)` triples.
    pub fn counts(&self) -> &[(usize, usize, u64)] {
        &self.counts
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        match self.counts.binary_search_by(|c| (c.0, c.1).cmp(&(i, j))) {
            Ok(k) => self.counts[k].2,
            Err(_) => 0,
        }
    }

    /// Incident directed-edge count per node, a self edge counting twice.
    pub fn degrees(&self) -> Vec<u64> {
        let mut d = vec![0u64; self.n_nodes];
        for &(i, j, n) in &self.counts {
            d[i] += n;
            d[j] += n;
        }
        d
    }
}

/// Binary undirected graph over contiguous ids, self-loops allowed.
///
/// Edges are unordered pairs stored as `(i, j)` with `i ≤ j`, sorted. A
/// self-loop adds one to its node's degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndirectedGraph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    degree: Vec<usize>,
}

impl UndirectedGraph {
    pub fn empty() -> Self {
        Self {
            n_nodes: 0,
            edges: Vec::new(),
            degree: Vec::new(),
        }
    }

    /// Builds from unordered pairs. Duplicates collapse and ids are compacted
    /// monotonically, so nodes without edges disappear.
    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Self {
        let mut edges: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(i, j)| (i.min(j), i.max(j)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let mut ids: Vec<usize> = edges.iter().flat_map(|&(i, j)| [i, j]).collect();
        ids.sort_unstable();
        ids.dedup();
        let compact = ids.last().map_or(0, |&m| m + 1) == ids.len();
        if !compact {
            let pos: HashMap<usize, usize> = ids.iter().enumerate().map(|(k, &v)| (v, k)).collect();
            for e in edges.iter_mut() {
                *e = (pos[&e.0], pos[&e.1]);
            }
        }
        let n_nodes = ids.len();
        let mut degree = vec![0usize; n_nodes];
        for &(i, j) in &edges {
            degree[i] += 1;
            if i != j {
                degree[j] += 1;
            }
        }
        Self {
            n_nodes,
            edges,
            degree,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// `N^(e)`, the number of distinct unordered pairs (loops included).
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_loops(&self) -> usize {
        self.edges.iter().filter(|e| e.0 == e.1).count()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degree
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i.min(j), i.max(j))).is_ok()
    }

    /// Applies a node permutation `perm[old] = new`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n_nodes);
        Self::from_pairs(self.edges.iter().map(|&(i, j)| (perm[i], perm[j])))
    }
}

/// Graph between two disjoint node sets, optionally with edge multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    edges: Vec<(usize, usize)>,
    counts: Option<Vec<u64>>,
}

impl BipartiteGraph {
    /// Binary graph from `(left, right)` pairs; duplicates collapse and each
    /// side is compacted monotonically.
    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Self {
        Self::build(pairs.into_iter().map(|(i, j)| (i, j, 1)), false)
    }

    /// Multigraph variant keeping the summed multiplicity of each pair.
    pub fn from_counts<I: IntoIterator<Item = (usize, usize, u64)>>(counts: I) -> Self {
        Self::build(counts.into_iter(), true)
    }

    fn build(items: impl Iterator<Item = (usize, usize, u64)>, keep: bool) -> Self {
        let mut agg: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for (i, j, n) in items {
            if n > 0 {
                *agg.entry((i, j)).or_insert(0) += n;
            }
        }
        let compact = |side: Vec<usize>| -> HashMap<usize, usize> {
            let mut ids = side;
            ids.sort_unstable();
            ids.dedup();
            ids.into_iter().enumerate().map(|(k, v)| (v, k)).collect()
        };
        let left = compact(agg.keys().map(|k| k.0).collect());
        let right = compact(agg.keys().map(|k| k.1).collect());
        let mut items: Vec<((usize, usize), u64)> = agg
            .into_iter()
            .map(|((i, j), n)| ((left[&i], right[&j]), n))
            .collect();
        items.sort_unstable();
        let edges = items.iter().map(|x| x.0).collect();
        let counts = keep.then(|| items.iter().map(|x| x.1).collect());
        Self {
            n_left: left.len(),
            n_right: right.len(),
            edges,
            counts,
        }
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    pub fn left_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_left];
        for &(i, _) in &self.edges {
            d[i] += 1;
        }
        d
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_right];
        for &(_, j) in &self.edges {
            d[j] += 1;
        }
        d
    }

    /// Drops multiplicities.
    pub fn binarized(&self) -> Self {
        Self {
            counts: None,
            ..self.clone()
        }
    }
}

/// Finitely many atoms `(w_i, θ_i)` of a CRM plus the mass not represented by
/// them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrmSample {
    pub weights: Vec<f64>,
    pub locations: Option<Vec<f64>>,
    pub remainder_mass: f64,
}

impl CrmSample {
    pub fn new(
        weights: Vec<f64>,
        locations: Option<Vec<f64>>,
        remainder_mass: f64,
    ) -> Result<Self> {
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::domain("weights must be positive and finite"));
        }
        if let Some(l) = &locations {
            if l.len() != weights.len() {
                return Err(Error::domain("locations and weights differ in length"));
            }
        }
        if !(remainder_mass >= 0.0) {
            return Err(Error::domain(format!(
                "remainder mass must be ≥ 0, got {remainder_mass}"
            )));
        }
        Ok(Self {
            weights,
            locations,
            remainder_mass,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Sum of the represented weights.
    pub fn atom_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atom_mass() + self.remainder_mass
    }
}

/// `Z = min(n_ij + n_ji, 1)`; node ids are kept.
pub fn to_undirected(d: &DirectedMultigraph) -> UndirectedGraph {
    UndirectedGraph::from_pairs(d.counts().iter().map(|&(i, j, _)| (i, j)))
}

/// Number of nodes at each degree (self-loop adds one).
pub fn degree_histogram(z: &UndirectedGraph) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for &d in z.degrees() {
        *h.entry(d).or_insert(0) += 1;
    }
    h
}

/// Fractions `N_j / N` for `j = 1..=j_max`, where `N_j` counts nodes of the
/// multigraph with `j` incident directed edges (a self edge counting twice).
pub fn multigraph_degree_fractions(d: &DirectedMultigraph, j_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; j_max];
    if d.n_nodes() == 0 {
        return out;
    }
    for k in d.degrees() {
        let k = k as usize;
        if (1..=j_max).contains(&k) {
            out[k - 1] += 1.0;
        }
    }
    let n = d.n_nodes() as f64;
    out.iter_mut().for_each(|x| *x /= n);
    out
}

/// Probability of at least one edge between groups `a` and `b`:
/// `1 − exp(−2 W(A) W(B))`.
pub fn group_link_probability(sample: &CrmSample, a: &[usize], b: &[usize]) -> Result<f64> {
    let k = sample.len();
    let mut in_a = vec![false; k];
    for &i in a {
        if i >= k {
            return Err(Error::domain(format!("node {i} out of range ({k} atoms)")));
        }
        in_a[i] = true;
    }
    let mut wb = 0.0;
    for &j in b {
        if j >= k {
            return Err(Error::domain(format!("node {j} out of range ({k} atoms)")));
        }
        if in_a[j] {
            return Err(Error::Overlap);
        }
        wb += sample.weights[j];
    }
    let mut seen = vec![false; k];
    let mut wa = 0.0;
    for &i in a {
        if !std::mem::replace(&mut seen[i], true) {
            wa += sample.weights[i];
        }
    }
    Ok(-(-2.0 * wa * wb).exp_m1())
}
