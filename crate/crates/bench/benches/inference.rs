use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use crmgraph::inference::{
    hmc_update, hyper_update, latent_update, run_chain, HyperPrior, LatentMode, McmcConfig,
};
use crmgraph::RngStream;
use crmgraph_bench::{ggp_graph, initial_state};

fn kernels(c: &mut Criterion) {
    let graph = ggp_graph(100.0, 0.5, 1.0, 1);
    let state = initial_state(&graph);
    let mut g = c.benchmark_group("kernels");
    let mut rng = RngStream::new(1, 0);
    g.bench_function("hmc_L10", |b| {
        b.iter_batched(
            || state.clone(),
            |mut s| hmc_update(&mut s, 10, 0.01, &mut rng),
            BatchSize::SmallInput,
        )
    });
    g.bench_function("hyper", |b| {
        b.iter_batched(
            || state.clone(),
            |mut s| hyper_update(&mut s, 0.02, &HyperPrior::Improper, &mut rng),
            BatchSize::SmallInput,
        )
    });
    for mode in [LatentMode::Exact, LatentMode::Mh] {
        g.bench_function(format!("latent_{mode:?}"), |b| {
            b.iter_batched(
                || state.clone(),
                |mut s| latent_update(&mut s, &graph, mode, &mut rng),
                BatchSize::SmallInput,
            )
        });
    }
    g.finish();
}

fn chain(c: &mut Criterion) {
    let graph = ggp_graph(100.0, 0.5, 1.0, 2);
    let cfg = McmcConfig {
        n_iter: 200,
        n_chains: 1,
        ..Default::default()
    };
    let mut g = c.benchmark_group("chain");
    g.sample_size(10);
    g.bench_function("200_iterations", |b| {
        b.iter(|| run_chain(&graph, &cfg, 0, &mut RngStream::new(3, 0)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, kernels, chain);
criterion_main!(benches);
