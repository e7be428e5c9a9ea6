use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crmgraph::diagnostics::{
    credible_interval, fit_scaling_slope, posterior_predictive_degrees, psrf, scaling_experiment,
    sparsity_test,
};
use crmgraph::inference::{run_bipartite_gibbs, run_chains, ChainTrace, LatentMode, Param};
use crmgraph::io::{self, EdgeListSource, RunConfig, Sidecar};
use crmgraph::simulate::{sample_graph, SimPath, DEFAULT_EPS};
use crmgraph::{GgpParams, McmcConfig, Result, RngStream, SimConfig};

#[derive(Parser, Debug)]
#[command(
    name = "crmgraph",
    version,
    about = "Simulate and fit sparse exchangeable random graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a graph and write it as an edge list with a JSON sidecar.
    Sample(SampleArgs),
    /// Run MCMC chains on an edge list and write the traces.
    Fit(FitArgs),
    /// Fit, then report the posterior probability that the graph is sparse.
    TestSparsity(SparsityArgs),
    /// Posterior predictive degree bands from a stored trace.
    Ppc(PpcArgs),
    /// Node and edge counts over a grid of alpha values.
    Scaling(ScalingArgs),
    /// Convergence report from a stored trace.
    Diag(DiagArgs),
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    /// Truncation level of the jump sizes.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// truncated, urn, kallenberg or compound-poisson.
    #[arg(long)]
    path: Option<SimPath>,
    #[arg(long)]
    no_self_loops: bool,
    /// JSON run configuration; flags override its `sim` section.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge-list output; the sidecar goes to `<out>.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct McmcArgs {
    /// Edge list (two integer ids per line).
    #[arg(long)]
    input: PathBuf,
    /// JSON run configuration; flags override its `mcmc` section.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    leapfrog: Option<usize>,
    #[arg(long)]
    target_accept: Option<f64>,
    /// Stepsize adaptation and burn-in length.
    #[arg(long)]
    adapt: Option<usize>,
    #[arg(long)]
    rw_sd: Option<f64>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// exact or mh.
    #[arg(long)]
    latent: Option<LatentMode>,
}

impl McmcArgs {
    fn config(&self) -> Result<McmcConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?.mcmc.unwrap_or_default(),
            None => McmcConfig::default(),
        };
        if let Some(v) = self.iters {
            c.n_iter = v;
        }
        if let Some(v) = self.chains {
            c.n_chains = v;
        }
        if let Some(v) = self.leapfrog {
            c.leapfrog_steps = v;
        }
        if let Some(v) = self.target_accept {
            c.target_accept = v;
        }
        if self.adapt.is_some() {
            c.adapt_iters = self.adapt;
        }
        if let Some(v) = self.rw_sd {
            c.rw_sd = v;
        }
        if let Some(v) = self.thin {
            c.thin = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.latent {
            c.latent_mode = v;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    mcmc: McmcArgs,
    /// Treat the two columns as separate node sets.
    #[arg(long)]
    bipartite: bool,
    /// Also save the final sampler state of each chain.
    #[arg(long)]
    checkpoint: bool,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct SparsityArgs {
    #[command(flatten)]
    mcmc: McmcArgs,
    /// Result JSON; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PpcArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Edge list to compare against.
    #[arg(long)]
    observed: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    draws: usize,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_self_loops: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[arg(long, allow_negative_numbers = true)]
    sigma: f64,
    #[arg(long, allow_negative_numbers = true)]
    tau: f64,
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400,800")]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// CSV `alpha,seed,n_nodes,n_edges`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DiagArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "alpha,sigma,tau,w_star")]
    params: Vec<Param>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// CSV `param,psrf`.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample(a) => sample(a),
        Command::Fit(a) => fit(a),
        Command::TestSparsity(a) => test_sparsity(a),
        Command::Ppc(a) => ppc(a),
        Command::Scaling(a) => scaling(a),
        Command::Diag(a) => diag(a),
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn sample(a: SampleArgs) -> Result<()> {
    let base = match &a.config {
        Some(p) => RunConfig::load(p)?.sim,
        None => None,
    };
    let (alpha, sigma, tau) = match base {
        Some(c) => (c.params.alpha(), c.params.sigma(), c.params.tau()),
        None => (300.0, 0.5, 1.0),
    };
    let mut cfg = SimConfig::new(GgpParams::new(
        a.alpha.unwrap_or(alpha),
        a.sigma.unwrap_or(sigma),
        a.tau.unwrap_or(tau),
    )?);
    if let Some(c) = base {
        cfg = SimConfig {
            params: cfg.params,
            ..c
        };
    }
    if let Some(e) = a.eps {
        cfg.truncation_eps = e;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(p) = a.path {
        cfg.path = p;
    }
    if a.no_self_loops {
        cfg.include_self_loops = false;
    }
    cfg.validate()?;
    let g = sample_graph(&cfg, &mut RngStream::new(cfg.seed, 0))?;
    io::write_edge_list(&g, &a.out)?;
    io::write_json(&Sidecar::new(cfg, &g), &sidecar_path(&a.out))?;
    println!("nodes {} edges {}", g.n_nodes(), g.n_edges());
    Ok(())
}

#[derive(Serialize)]
struct ChainSummary {
    chain: u64,
    records: usize,
    stepsize: f64,
    hmc_accept: f64,
    hyper_accept: f64,
}

#[derive(Serialize)]
struct FitSummary {
    n_nodes: usize,
    n_edges: usize,
    config: McmcConfig,
    chains: Vec<ChainSummary>,
    version: &'static str,
}

fn summarize(traces: &[ChainTrace]) -> Vec<ChainSummary> {
    traces
        .iter()
        .map(|t| ChainSummary {
            chain: t.chain,
            records: t.records.len(),
            stepsize: t.stepsize,
            hmc_accept: t.acceptance.hmc_rate(),
            hyper_accept: t.acceptance.hyper_rate(),
        })
        .collect()
}

fn fit(a: FitArgs) -> Result<()> {
    let cfg = a.mcmc.config()?;
    let source = EdgeListSource::new(&a.mcmc.input);
    let dir = &a.out_dir;
    if a.bipartite {
        let (g, _, _) = io::read_bipartite_edge_list(&source)?;
        let traces: Vec<ChainTrace> = (0..cfg.n_chains as u64)
            .map(|c| run_bipartite_gibbs(&g, &cfg, c, &mut RngStream::new(cfg.seed, c)))
            .collect::<Result<_>>()?;
        let primes: Vec<ChainTrace> = traces
            .iter()
            .map(|t| ChainTrace {
                chain: t.chain,
                records: t.prime_records.clone(),
                ..ChainTrace::default()
            })
            .collect();
        io::write_trace_csv(&traces, &dir.join("trace.csv"))?;
        io::write_trace_csv(&primes, &dir.join("trace_prime.csv"))?;
        let summary = FitSummary {
            n_nodes: g.n_left() + g.n_right(),
            n_edges: g.n_edges(),
            config: cfg,
            chains: summarize(&traces),
            version: crmgraph::VERSION,
        };
        io::write_json(&summary, &dir.join("fit.json"))?;
        println!(
            "left {} right {} edges {}",
            g.n_left(),
            g.n_right(),
            g.n_edges()
        );
        return Ok(());
    }
    let g = io::read_edge_list(&source)?.graph;
    let traces = run_chains(&g, &cfg)?;
    io::write_trace_csv(&traces, &dir.join("trace.csv"))?;
    if a.checkpoint {
        for t in &traces {
            if let Some(s) = &t.final_state {
                io::save_checkpoint(
                    s,
                    t.chain,
                    &dir.join(format!("chain{}.state.json", t.chain)),
                )?;
            }
        }
    }
    let summary = FitSummary {
        n_nodes: g.n_nodes(),
        n_edges: g.n_edges(),
        config: cfg,
        chains: summarize(&traces),
        version: crmgraph::VERSION,
    };
    io::write_json(&summary, &dir.join("fit.json"))?;
    println!("nodes {} edges {}", g.n_nodes(), g.n_edges());
    Ok(())
}

#[derive(Serialize)]
struct SparsityReport {
    p_sparse: f64,
    ci_sigma: (f64, f64),
    max_psrf: Option<f64>,
    n_draws: usize,
    n_nodes: usize,
    n_edges: usize,
    /// Seconds.
    runtime: f64,
}

fn test_sparsity(a: SparsityArgs) -> Result<()> {
    let t0 = Instant::now();
    let cfg = a.mcmc.config()?;
    let g = io::read_edge_list(&EdgeListSource::new(&a.mcmc.input))?.graph;
    let traces = run_chains(&g, &cfg)?;
    if let Some(p) = &a.trace_out {
        io::write_trace_csv(&traces, p)?;
    }
    let r = sparsity_test(&traces)?;
    let report = SparsityReport {
        p_sparse: r.p_sparse,
        ci_sigma: r.ci_sigma,
        max_psrf: r.max_psrf,
        n_draws: r.n_draws,
        n_nodes: g.n_nodes(),
        n_edges: g.n_edges(),
        runtime: t0.elapsed().as_secs_f64(),
    };
    match &a.out {
        Some(p) => {
            io::write_json(&report, p)?;
            println!("p_sparse {}", report.p_sparse);
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(())
}

fn ppc(a: PpcArgs) -> Result<()> {
    let traces = io::read_trace_csv(&a.trace)?;
    let observed = match &a.observed {
        Some(p) => Some(io::read_edge_list(&EdgeListSource::new(p))?.graph),
        None => None,
    };
    let mut template = SimConfig::new(GgpParams::new(1.0, 0.5, 1.0)?);
    template.truncation_eps = a.eps;
    template.include_self_loops = !a.no_self_loops;
    let bands =
        posterior_predictive_degrees(&traces, a.draws, &template, observed.as_ref(), a.seed)?;
    io::write_degree_bands_csv(&bands, &a.out)?;
    println!("bins {}", bands.len());
    Ok(())
}

fn scaling(a: ScalingArgs) -> Result<()> {
    let rep = scaling_experiment(&[(a.sigma, a.tau)], &a.alphas, &a.seeds, a.eps)?;
    io::write_scaling_csv(&rep.rows, &a.out)?;
    println!("sigma,tau,slope");
    println!(
        "{},{},{}",
        a.sigma,
        a.tau,
        io::fmt_f64(fit_scaling_slope(&rep.rows))
    );
    Ok(())
}

fn diag(a: DiagArgs) -> Result<()> {
    let traces = io::read_trace_csv(&a.trace)?;
    let rep = psrf(&traces, &a.params)?;
    if let Some(p) = &a.out {
        io::write_psrf_csv(&rep, p)?;
    }
    let mut s = String::from("param,psrf,mean,lo,hi\n");
    for (p, e) in a.params.iter().zip(&rep.entries) {
        let pooled: Vec<f64> = traces
            .iter()
            .filter_map(|t| t.series(*p))
            .flatten()
            .collect();
        let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
        let (lo, hi) = credible_interval(&pooled, a.level)?;
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            e.param,
            io::fmt_f64(e.psrf),
            io::fmt_f64(mean),
            io::fmt_f64(lo),
            io::fmt_f64(hi)
        );
    }
    print!("{s}");
    println!("max_psrf {}", io::fmt_f64(rep.max));
    Ok(())
}
