use serde::{Deserialize, Serialize};

use super::dgp::{generate_series, ErrorProcess, MeanFn};
use crate::benchmarks::BenchmarkSpec;
use crate::deviation::{estimate_extremal_set, DeviationCurve};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::par;
use crate::pipeline::{analyze, AnalysisConfig};
use crate::quadrature::{integrate_pieces, Tolerance};
use crate::rng;
use crate::smoothing::TimeSeries;
use crate::testing::TestVariant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub mean: MeanFn,
    pub errors: ErrorProcess,
    /// Multiplier on the error process.
    pub noise_scale: f64,
    pub n: usize,
    pub kernel: String,
    pub analysis: AnalysisConfig,
    /// Master seed; run `r` uses `rng::derive(seed, r)`.
    pub seed: u64,
}

impl Scenario {
    pub fn new(mean: MeanFn, errors: ErrorProcess, n: usize) -> Self {
        Scenario {
            mean,
            errors,
            noise_scale: 1.0,
            n,
            kernel: "quartic".into(),
            analysis: AnalysisConfig::default(),
            seed: 0,
        }
    }

    pub fn summary(&self) -> String {
        let t = &self.analysis.test;
        format!(
            "{:?}/{:?}/n={}/delta={}/[{}, {}]/{}",
            self.mean, self.errors, self.n, t.delta, t.x0, t.x1, self.analysis.benchmark
        )
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        rng::derive(self.seed, run as u64)
    }
}

/// One replicate of the scenario.
pub fn generate(scenario: &Scenario, seed: u64) -> Result<TimeSeries> {
    if scenario.n < crate::smoothing::MIN_OBSERVATIONS {
        return Err(Error::TooFewObservations { got: scenario.n, need: crate::smoothing::MIN_OBSERVATIONS });
    }
    generate_series(&scenario.mean, scenario.errors, scenario.noise_scale, scenario.n, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCResult {
    pub scenario: String,
    pub variant: TestVariant,
    pub rejection_rate: f64,
    pub runs: usize,
    pub rejections: usize,
    pub se: f64,
    /// Runs whose analysis failed; they count as non-rejections.
    pub failures: usize,
    pub failure_messages: Vec<String>,
    pub mean_bandwidth: f64,
}

const KEPT_MESSAGES: usize = 5;

/// Rejection rates of every variant in `variants`, computed on the same runs.
pub fn run_mc_multi(scenario: &Scenario, runs: usize, variants: &[TestVariant]) -> Result<Vec<MCResult>> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be at least 1".into()));
    }
    if variants.is_empty() {
        return Err(Error::InvalidArgument("no test variant requested".into()));
    }
    let k = KernelSpec::from_name(&scenario.kernel)?;
    let per_run: Vec<std::result::Result<(Vec<bool>, f64), String>> = par::map_range(runs, |r| {
        let seed = scenario.run_seed(r);
        let mut cfg = scenario.analysis.clone();
        cfg.test.seed = seed;
        let series = generate(scenario, seed).map_err(|e| format!("run {r}: {e}"))?;
        let a = analyze(&series, &k, &cfg, variants).map_err(|e| format!("run {r}: {e}"))?;
        Ok((a.outcomes.iter().map(|o| o.reject).collect(), a.bandwidth))
    });

    let failures: Vec<&String> = per_run.iter().filter_map(|r| r.as_ref().err()).collect();
    let ok: Vec<&(Vec<bool>, f64)> = per_run.iter().filter_map(|r| r.as_ref().ok()).collect();
    for msg in &failures {
        log::warn!("{msg}");
    }
    let mean_bandwidth = if ok.is_empty() { f64::NAN } else { ok.iter().map(|o| o.1).sum::<f64>() / ok.len() as f64 };
    let summary = scenario.summary();
    Ok(variants
        .iter()
        .enumerate()
        .map(|(j, &variant)| {
            let rejections = ok.iter().filter(|o| o.0[j]).count();
            let p = rejections as f64 / runs as f64;
            MCResult {
                scenario: summary.clone(),
                variant,
                rejection_rate: p,
                runs,
                rejections,
                se: (p * (1.0 - p) / runs as f64).sqrt(),
                failures: failures.len(),
                failure_messages: failures.iter().take(KEPT_MESSAGES).map(|s| s.to_string()).collect(),
                mean_bandwidth,
            }
        })
        .collect())
}

/// Rejection rate of the scenario's configured test variant.
pub fn run_mc(scenario: &Scenario, runs: usize) -> Result<MCResult> {
    let mut out = run_mc_multi(scenario, runs, &[scenario.analysis.test.variant])?;
    Ok(out.remove(0))
}

/// `g(μ)` for the true mean function.
pub fn true_benchmark(mean: &MeanFn, spec: &BenchmarkSpec) -> Result<f64> {
    // Breakpoints at the kinks of the piecewise models.
    let integral = |hi: f64| {
        let mut breaks = vec![0.0];
        breaks.extend([0.25, 0.75].into_iter().filter(|&b| b < hi));
        breaks.push(hi);
        integrate_pieces(|x| mean.eval(x), &breaks, Tolerance::default())
    };
    Ok(match *spec {
        BenchmarkSpec::InitialValue => mean.eval(0.0),
        BenchmarkSpec::PartialMean(x0) => integral(x0)? / x0,
        BenchmarkSpec::FullMean => integral(1.0)?,
        BenchmarkSpec::Constant(c) => c,
    })
}

/// `sup_{t ∈ [x0, x1]} |μ(t) − g(μ)|` on a grid of `points` points.
pub fn true_sup_deviation(mean: &MeanFn, g: f64, x0: f64, x1: f64, points: usize) -> f64 {
    let m = points.max(2) - 1;
    (0..=m).map(|i| (mean.eval(x0 + (x1 - x0) * i as f64 / m as f64) - g).abs()).fold(0.0, f64::max)
}

/// `λ(Ê_n)/λ(ℰ_n)` for one replicate, where `ℰ_n` is the extremal set of
/// the true deviation evaluated on the same grid with the same `ρ`.
pub fn extremal_ratio(scenario: &Scenario, seed: u64) -> Result<f64> {
    let k = KernelSpec::from_name(&scenario.kernel)?;
    let mut cfg = scenario.analysis.clone();
    cfg.test.seed = seed;
    let series = generate(scenario, seed)?;
    let a = analyze(&series, &k, &cfg, &[])?;
    let g = true_benchmark(&scenario.mean, &cfg.benchmark)?;
    let dev = &a.deviation;
    let truth: Vec<f64> = dev.grid.iter().map(|&t| scenario.mean.eval(t) - g).collect();
    let true_curve =
        DeviationCurve::from_values(dev.grid.clone(), truth, dev.interval, dev.bandwidth, dev.cell, dev.n);
    let e_true = estimate_extremal_set(&true_curve, a.extremal.rho);
    Ok(a.extremal.measure / e_true.measure)
}
