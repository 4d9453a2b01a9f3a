//! Parallel vs sequential throughput of the hot loops.
//!
//! With the default `parallel` feature every workload is measured on the
//! global rayon pool and again inside a one-thread pool. Building with
//! `--no-default-features` measures the plain sequential fallback:
//!
//! ```text
//! cargo bench -p relchange --bench parallel
//! cargo bench -p relchange --bench parallel --no-default-features
//! ```

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use relchange::deviation::{estimate_extremal_set, DeviationCurve, ExtremalSet};
use relchange::kernels::KernelSpec;
use relchange::par;
use relchange::simharness::{generate_series, run_mc, table_scenario, ErrorProcess, MeanFn, Panel, Table};
use relchange::smoothing::{cv_bandwidth_with, CvOptions, Grid};
use relchange::testing::{simulate_gn, Sidedness};

fn full_set(n: usize, h: f64) -> ExtremalSet {
    let g = Grid::data_resolution(n, 0.0, 1.0, h, 1).unwrap();
    let vals = vec![1.0; g.len()];
    let dev = DeviationCurve::from_values(g.points, vals, g.interval, h, g.cell, n);
    estimate_extremal_set(&dev, 0.1)
}

#[cfg(feature = "parallel")]
const MODE: &str = "rayon";
#[cfg(not(feature = "parallel"))]
const MODE: &str = "sequential";

/// Runs `f` under every pool configuration this build supports.
fn modes(c: &mut Criterion, name: &str, f: &(dyn Fn() + Sync)) {
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    group.bench_function(BenchmarkId::new(MODE, par::threads()), |b| b.iter(f));
    #[cfg(feature = "parallel")]
    {
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        group.bench_function(BenchmarkId::new("single-pool", 1), |b| b.iter(|| single.install(f)));
    }
    group.finish();
}

fn cross_validation(c: &mut Criterion) {
    let k = KernelSpec::quartic();
    let series = generate_series(&MeanFn::Mu1(2.0), ErrorProcess::Ar, 1.0, 2000, 1).unwrap();
    let opts = CvOptions::default();
    modes(c, "cv_bandwidth_n2000", &|| {
        black_box(cv_bandwidth_with(&series, &k, &opts).unwrap());
    });
}

fn quantile_simulation(c: &mut Criterion) {
    let k = KernelSpec::quartic();
    let eset = full_set(1000, 0.05);
    modes(c, "simulate_gn_n1000_reps1000", &|| {
        black_box(simulate_gn(&eset, 1000, 0.05, &k, Sidedness::Two, 1000, 7).unwrap());
    });
}

fn monte_carlo(c: &mut Criterion) {
    let mut scenario = table_scenario(Table::Two, Panel::A, 1.5, 500, 3);
    scenario.analysis.test.quantile_reps = 500;
    modes(c, "run_mc_n500_runs16", &|| {
        black_box(run_mc(&scenario, 16).unwrap());
    });
}

criterion_group!(benches, cross_validation, quantile_simulation, monte_carlo);
criterion_main!(benches);
