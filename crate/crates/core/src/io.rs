//! File formats: SNAP-style edge lists, trace CSV, run configuration,
//! sampler checkpoints, result tables and sidecar metadata.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{DegreeBand, PowerlawRow, PsrfReport, ScalingRow};
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, DirectedMultigraph, UndirectedGraph};
use crate::inference::{ChainTrace, McmcConfig, McmcState, TraceRecord};
use crate::simulate::SimConfig;

/// Version of every JSON document written by this crate.
pub const SCHEMA_VERSION: u32 = 1;

pub const TRACE_HEADER: &str = "iteration,chain,alpha,sigma,tau,w_star,log_post";

/// Edge-list ingestion options.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeListSource {
    pub path: PathBuf,
    /// Keep every line as a directed edge with multiplicity.
    pub directed: bool,
    pub comment_prefixes: Vec<char>,
}

impl EdgeListSource {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            directed: false,
            comment_prefixes: vec!['#', '%'],
        }
    }

    pub fn directed(mut self, directed: bool) -> Self {
        self.directed = directed;
        self
    }
}

/// Parsed edge list. `ids[k]` is the external id of node `k`; ids are
/// assigned by first appearance.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeList {
    pub graph: UndirectedGraph,
    /// Present when read with `directed`.
    pub multigraph: Option<DirectedMultigraph>,
    pub ids: Vec<u64>,
}

impl EdgeList {
    pub fn id_map(&self) -> HashMap<u64, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(k, &id)| (id, k))
            .collect()
    }
}

fn parse_pairs<R: BufRead>(reader: R, path: &Path, comments: &[char]) -> Result<Vec<(u64, u64)>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with(comments) {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: k + 1,
            msg,
        };
        let mut it = t.split_whitespace();
        let mut next = || -> Result<u64> {
            let tok = it
                .next()
                .ok_or_else(|| err("expected two node ids".into()))?;
            tok.parse()
                .map_err(|_| err(format!("invalid node id `{tok}`")))
        };
        let a = next()?;
        let b = next()?;
        out.push((a, b));
    }
    Ok(out)
}

fn dictionary(pairs: &[(u64, u64)]) -> (Vec<u64>, Vec<(usize, usize)>) {
    let mut map: HashMap<u64, usize> = HashMap::new();
    let mut ids = Vec::new();
    let mut id = |x: u64| {
        *map.entry(x).or_insert_with(|| {
            ids.push(x);
            ids.len() - 1
        })
    };
    let edges: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (id(a), id(b))).collect();
    (ids, edges)
}

/// Parses an edge list from any reader; `path` only labels errors.
pub fn parse_edge_list<R: Read>(reader: R, source: &EdgeListSource) -> Result<EdgeList> {
    let pairs = parse_pairs(
        BufReader::new(reader),
        &source.path,
        &source.comment_prefixes,
    )?;
    if pairs.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let (ids, edges) = dictionary(&pairs);
    let graph = UndirectedGraph::from_pairs(edges.iter().copied());
    debug_assert_eq!(graph.n_nodes(), ids.len());
    let multigraph = source
        .directed
        .then(|| DirectedMultigraph::from_edge_sequence(edges));
    Ok(EdgeList {
        graph,
        multigraph,
        ids,
    })
}

/// Reads an edge list: duplicate and reversed lines collapse to one
/// undirected edge, self-loops are kept, only nodes with an edge exist.
pub fn read_edge_list(source: &EdgeListSource) -> Result<EdgeList> {
    parse_edge_list(open(&source.path)?, source)
}

/// Reads `left right` pairs; the two columns index separate node sets.
pub fn read_bipartite_edge_list(
    source: &EdgeListSource,
) -> Result<(BipartiteGraph, Vec<u64>, Vec<u64>)> {
    let file = open(&source.path)?;
    let pairs = parse_pairs(BufReader::new(file), &source.path, &source.comment_prefixes)?;
    if pairs.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let (mut lmap, mut rmap) = (HashMap::new(), HashMap::new());
    let (mut lids, mut rids) = (Vec::new(), Vec::new());
    let mut edges = Vec::with_capacity(pairs.len());
    for &(a, b) in &pairs {
        let i = *lmap.entry(a).or_insert_with(|| {
            lids.push(a);
            lids.len() - 1
        });
        let j = *rmap.entry(b).or_insert_with(|| {
            rids.push(b);
            rids.len() - 1
        });
        edges.push((i, j));
    }
    Ok((BipartiteGraph::from_pairs(edges), lids, rids))
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// One `i j` line per edge, `i ≤ j`, sorted.
pub fn write_edge_list(graph: &UndirectedGraph, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# nodes {} edges {}", graph.n_nodes(), graph.n_edges())?;
    for &(i, j) in graph.edges() {
        writeln!(w, "{i} {j}")?;
    }
    w.flush()?;
    Ok(())
}

/// One `i j` line per directed edge, repeated by multiplicity.
pub fn write_multigraph(graph: &DirectedMultigraph, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(
        w,
        "# nodes {} directed edges {}",
        graph.n_nodes(),
        graph.total_edges()
    )?;
    for &(i, j, n) in graph.counts() {
        for _ in 0..n {
            writeln!(w, "{i} {j}")?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_bipartite_edge_list(graph: &BipartiteGraph, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(
        w,
        "# left {} right {} edges {}",
        graph.n_left(),
        graph.n_right(),
        graph.n_edges()
    )?;
    for &(i, j) in graph.edges() {
        writeln!(w, "{i} {j}")?;
    }
    w.flush()?;
    Ok(())
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the records of all chains, chain by chain.
pub fn write_trace_csv(traces: &[ChainTrace], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{TRACE_HEADER}")?;
    for r in traces.iter().flat_map(|t| &t.records) {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.iteration,
            r.chain,
            fmt_f64(r.alpha),
            fmt_f64(r.sigma),
            fmt_f64(r.tau),
            fmt_f64(r.w_star),
            fmt_f64(r.log_post)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace file back into one [`ChainTrace`] per chain id, in order of
/// first appearance.
pub fn read_trace_csv(path: &Path) -> Result<Vec<ChainTrace>> {
    let reader = BufReader::new(open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != TRACE_HEADER {
        return Err(Error::Schema(format!(
            "expected header `{TRACE_HEADER}`, found `{}`",
            header.trim()
        )));
    }
    let mut traces: Vec<ChainTrace> = Vec::new();
    let mut slot: HashMap<u64, usize> = HashMap::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: k + 2,
            msg,
        };
        let cols: Vec<&str> = line.trim().split(',').collect();
        if cols.len() != 7 {
            return Err(err(format!("expected 7 columns, found {}", cols.len())));
        }
        let int = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| err(format!("invalid integer `{s}`")))
        };
        let float = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(format!("invalid number `{s}`")))
        };
        let rec = TraceRecord {
            iteration: int(cols[0])?,
            chain: int(cols[1])?,
            alpha: float(cols[2])?,
            sigma: float(cols[3])?,
            tau: float(cols[4])?,
            w_star: float(cols[5])?,
            log_post: float(cols[6])?,
        };
        let idx = *slot.entry(rec.chain).or_insert_with(|| {
            traces.push(ChainTrace {
                chain: rec.chain,
                ..ChainTrace::default()
            });
            traces.len() - 1
        });
        traces[idx].records.push(rec);
    }
    Ok(traces)
}

/// Output locations of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub dir: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Top-level JSON configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub sim: Option<SimConfig>,
    #[serde(default)]
    pub mcmc: Option<McmcConfig>,
    #[serde(default)]
    pub output: OutputPaths,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            sim: None,
            mcmc: None,
            output: OutputPaths::default(),
        }
    }
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "unsupported schema_version {v}, expected {SCHEMA_VERSION}"
        )));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        check_version(c.schema_version)?;
        if let Some(sim) = &c.sim {
            sim.validate()?;
        }
        if let Some(m) = &c.mcmc {
            m.validate()?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut s = String::new();
        open(path)?.read_to_string(&mut s)?;
        Self::from_json(&s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

/// Writes `value` as pretty JSON with a `schema_version` field.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(
        &mut w,
        &Versioned {
            schema_version: SCHEMA_VERSION,
            body: value,
        },
    )?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let v: Versioned<T> = serde_json::from_reader(BufReader::new(open(path)?))?;
    check_version(v.schema_version)?;
    Ok(v.body)
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    chain: u64,
    state: McmcState,
}

/// Saves a sampler state; floats round-trip exactly.
pub fn save_checkpoint(state: &McmcState, chain: u64, path: &Path) -> Result<()> {
    write_json(
        &Checkpoint {
            chain,
            state: state.clone(),
        },
        path,
    )
}

pub fn load_checkpoint(path: &Path) -> Result<(McmcState, u64)> {
    let c: Checkpoint = read_json(path)?;
    Ok((c.state, c.chain))
}

/// Provenance record written next to generated graphs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub generator: SimConfig,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub created: u64,
}

impl Sidecar {
    pub fn new(generator: SimConfig, graph: &UndirectedGraph) -> Self {
        let created = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            generator,
            n_nodes: graph.n_nodes(),
            n_edges: graph.n_edges(),
            version: crate::VERSION.to_string(),
            created,
        }
    }
}

fn write_text(text: &str, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// `param,psrf`
pub fn psrf_csv(report: &PsrfReport) -> String {
    let mut s = String::from("param,psrf\n");
    for e in &report.entries {
        let _ = writeln!(s, "{},{}", e.param, fmt_f64(e.psrf));
    }
    s
}

/// `j,empirical,theoretical`
pub fn powerlaw_csv(rows: &[PowerlawRow]) -> String {
    let mut s = String::from("j,empirical,theoretical\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{}",
            r.j,
            fmt_f64(r.empirical),
            fmt_f64(r.theoretical)
        );
    }
    s
}

/// `alpha,seed,n_nodes,n_edges`
pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut s = String::from("alpha,seed,n_nodes,n_edges\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.alpha, r.seed, r.n_nodes, r.n_edges);
    }
    s
}

/// `degree_bin,lo,median,hi,observed`; bins print as `a-b`, empty observed
/// when no graph was given.
pub fn degree_bands_csv(bands: &[DegreeBand]) -> String {
    let mut s = String::from("degree_bin,lo,median,hi,observed\n");
    for b in bands {
        let obs = b.observed.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            s,
            "{}-{},{},{},{},{}",
            b.bin_lo,
            b.bin_hi,
            fmt_f64(b.lo),
            fmt_f64(b.median),
            fmt_f64(b.hi),
            obs
        );
    }
    s
}

pub fn write_psrf_csv(report: &PsrfReport, path: &Path) -> Result<()> {
    write_text(&psrf_csv(report), path)
}

pub fn write_powerlaw_csv(rows: &[PowerlawRow], path: &Path) -> Result<()> {
    write_text(&powerlaw_csv(rows), path)
}

pub fn write_scaling_csv(rows: &[ScalingRow], path: &Path) -> Result<()> {
    write_text(&scaling_csv(rows), path)
}

pub fn write_degree_bands_csv(bands: &[DegreeBand], path: &Path) -> Result<()> {
    write_text(&degree_bands_csv(bands), path)
}
