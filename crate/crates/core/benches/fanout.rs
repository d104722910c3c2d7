//! Sequential versus rayon execution of the three fan-out loops: per-sector
//! estimation with bootstrap, the heterogeneous-gamma counterexample search,
//! and a bootstrap Monte Carlo over independent samples.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ces_ge_core::equilibrium::{remark_search, Attribution, SolverOptions};
use ces_ge_core::estimation::{bootstrap_tfpg, estimate_all, BootstrapConfig, EstimationConfig};
use ces_ge_core::par::Execution;
use ces_ge_core::synthetic::{generate_economy, simulate_linked_observation, SyntheticSpec};
use ces_ge_core::table::{build_regression_samples, SampleOptions};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn estimation(c: &mut Criterion) {
    let spec = SyntheticSpec { n: 60, seed: 1, noise_sd: 0.05, ..Default::default() };
    let e = generate_economy(&spec).unwrap();
    let z = spec.draw_productivity();
    let obs = simulate_linked_observation(&e, &z, spec.noise_sd, 1, &SolverOptions::default()).unwrap();
    let samples = build_regression_samples(&obs, SampleOptions::default());
    let mut g = c.benchmark_group("estimate_all_n60_boot200");
    g.sample_size(10);
    for (name, execution) in MODES {
        let cfg = EstimationConfig {
            bootstrap: Some(BootstrapConfig { reps: 200, ..Default::default() }),
            execution,
            ..Default::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| estimate_all(&obs, &samples, &cfg)));
    }
    g.finish();
}

fn remark(c: &mut Criterion) {
    let spec = SyntheticSpec { n: 30, seed: 2, z_range: (1.0, 2.0), ..Default::default() };
    let e = generate_economy(&spec).unwrap();
    let z = spec.draw_productivity();
    let opts = SolverOptions::default();
    let mut g = c.benchmark_group("remark_search_n30_64_trials");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| remark_search(&e, &z, 2.0, 64, 3, &opts, Attribution::Producing, exec).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let specs: Vec<SyntheticSpec> = (0..16)
        .map(|seed| SyntheticSpec { n: 40, seed, noise_sd: 0.05, ..Default::default() })
        .collect();
    let samples: Vec<_> = specs
        .iter()
        .flat_map(|s| {
            let e = generate_economy(s).unwrap();
            let obs = simulate_linked_observation(&e, &s.draw_productivity(), s.noise_sd, s.seed, &SolverOptions::default()).unwrap();
            build_regression_samples(&obs, SampleOptions::default()).into_iter().take(4)
        })
        .collect();
    let mut g = c.benchmark_group("bootstrap_monte_carlo_64_samples");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                exec.map_slice(&samples, |i, s| {
                    bootstrap_tfpg(s, &BootstrapConfig { reps: 200, seed: i as u64, ..Default::default() }).ok()
                })
            })
        });
    }
    g.finish();
}

criterion_group!(benches, estimation, remark, monte_carlo);
criterion_main!(benches);
