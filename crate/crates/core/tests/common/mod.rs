//! Property checks shared by the proptest suite and the acceptance runner.
//! Each check returns `Err` with a description of the first violation.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use relchange::benchmarks::BenchmarkSpec;
use relchange::changetime::{default_delta_n, first_exceedance};
use relchange::deviation::{deviation_curve, estimate_extremal_set, DeviationCurve};
use relchange::kernels::{kstar_eval, KernelSpec};
use relchange::pipeline::{analyze, AnalysisConfig, BandwidthChoice};
use relchange::quadrature::{integrate_pieces, Tolerance};
use relchange::simharness::{run_mc, table_scenario, Panel, Table};
use relchange::smoothing::{jackknife_curve, local_linear_fit, Grid, TimeSeries};
use relchange::testing::{TestConfig, TestVariant};

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn kernels() -> Vec<KernelSpec> {
    let triweight = KernelSpec::custom("triweight", |x: f64| if x.abs() <= 1.0 { 35.0 / 32.0 * (1.0 - x * x).powi(3) } else { 0.0 }, None).unwrap();
    vec![KernelSpec::quartic(), KernelSpec::epanechnikov(), triweight]
}

/// `∫K* = 1`, `∫xK* = 0`, `∫x²K* = 0`.
pub fn kstar_moments(k: &KernelSpec, tol: f64) -> Check {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let breaks = [-1.0, -s, 0.0, s, 1.0];
    for (p, target) in [(0, 1.0), (1, 0.0), (2, 0.0)] {
        let m = integrate_pieces(|x| x.powi(p) * kstar_eval(k, x), &breaks, Tolerance { abs: 1e-13, rel: 1e-13 })
            .map_err(|e| e.to_string())?;
        ensure((m - target).abs() <= tol, || format!("{}: moment {p} = {m:e}", k.name()))?;
    }
    Ok(())
}

/// Zero-noise affine data: local-linear and jackknife fits reproduce the line.
pub fn affine_exactness(a: f64, b: f64, n: usize, h: f64, tol: f64) -> Check {
    let x = TimeSeries::new((1..=n).map(|i| a + b * i as f64 / n as f64).collect()).map_err(|e| e.to_string())?;
    let k = KernelSpec::quartic();
    let grid = Grid::data_resolution(n, 0.0, 1.0, h, 1).map_err(|e| e.to_string())?;
    let scale = 1.0 + a.abs() + b.abs();
    for &t in grid.points.iter().step_by(7) {
        let (level, slope) = local_linear_fit(&x, &k, h, t).map_err(|e| e.to_string())?;
        ensure((level - (a + b * t)).abs() <= tol * scale, || format!("level at t={t}: {level} vs {}", a + b * t))?;
        ensure((slope - b).abs() <= tol * scale / h, || format!("slope at t={t}: {slope} vs {b}"))?;
    }
    let curve = jackknife_curve(&x, &k, h, &grid).map_err(|e| e.to_string())?;
    for (t, v) in curve.grid.iter().zip(&curve.values) {
        ensure((v - (a + b * t)).abs() <= tol * scale, || format!("jackknife at t={t}: {v} vs {}", a + b * t))?;
    }
    Ok(())
}

/// `μ(t) + noise·N(0,1)` at the design points.
pub fn noisy_series(mu: impl Fn(f64) -> f64, n: usize, noise: f64, seed: u64) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TimeSeries::new(
        (1..=n)
            .map(|i| {
                let z: f64 = rng.sample(StandardNormal);
                mu(i as f64 / n as f64) + noise * z
            })
            .collect(),
    )
    .unwrap()
}

fn decisions(x: &TimeSeries, cfg: &AnalysisConfig) -> Result<Vec<bool>, String> {
    let k = KernelSpec::quartic();
    let a = analyze(x, &k, cfg, &TestVariant::ALL).map_err(|e| e.to_string())?;
    Ok(a.outcomes.iter().map(|o| o.reject).collect())
}

fn base_config(h: f64, seed: u64) -> AnalysisConfig {
    AnalysisConfig {
        benchmark: BenchmarkSpec::Constant(0.0),
        bandwidth: BandwidthChoice::Fixed(h),
        test: TestConfig { quantile_reps: 200, seed, ..TestConfig::default() },
        ..AnalysisConfig::default()
    }
}

/// Rejection at `Δ` implies rejection at every smaller positive `Δ`, for all
/// four tests. `deltas` must be increasing and positive.
pub fn delta_monotone(x: &TimeSeries, h: f64, seed: u64, deltas: &[f64]) -> Check {
    let mut prev: Option<Vec<bool>> = None;
    for &delta in deltas {
        let mut cfg = base_config(h, seed);
        cfg.test.delta = delta;
        let d = decisions(x, &cfg)?;
        if let Some(p) = &prev {
            for (j, (&lo, &hi)) in p.iter().zip(&d).enumerate() {
                ensure(lo || !hi, || format!("{:?} rejects at delta={delta} but not below", TestVariant::ALL[j]))?;
            }
        }
        prev = Some(d);
    }
    Ok(())
}

/// Rejection at level `α` implies rejection at every larger level.
pub fn alpha_monotone(x: &TimeSeries, h: f64, seed: u64, delta: f64, alphas: &[f64]) -> Check {
    let mut prev: Option<Vec<bool>> = None;
    for &alpha in alphas {
        let mut cfg = base_config(h, seed);
        cfg.test.delta = delta;
        cfg.test.alpha = alpha;
        let d = decisions(x, &cfg)?;
        if let Some(p) = &prev {
            for (j, (&lo, &hi)) in p.iter().zip(&d).enumerate() {
                ensure(hi || !lo, || format!("{:?} rejects at a smaller alpha but not at {alpha}", TestVariant::ALL[j]))?;
            }
        }
        prev = Some(d);
    }
    Ok(())
}

pub fn deviation_of(x: &TimeSeries, h: f64) -> DeviationCurve {
    let k = KernelSpec::quartic();
    let grid = Grid::data_resolution(x.n(), 0.0, 1.0, h, 1).unwrap();
    deviation_curve(&jackknife_curve(x, &k, h, &grid).unwrap(), 0.0)
}

/// `Ê(ρ₁) ⊆ Ê(ρ₂)` for `ρ₁ ≤ ρ₂`, and the argmax of `|d̂|` is always a member.
pub fn extremal_monotone(dev: &DeviationCurve, rhos: &[f64]) -> Check {
    let argmax = (0..dev.values.len()).max_by(|&i, &j| dev.values[i].abs().total_cmp(&dev.values[j].abs())).unwrap();
    let mut prev: Option<relchange::deviation::ExtremalSet> = None;
    for &rho in rhos {
        let e = estimate_extremal_set(dev, rho);
        ensure(e.contains_index(argmax), || format!("argmax missing at rho={rho}"))?;
        if let Some(p) = &prev {
            ensure(p.members.iter().all(|&i| e.contains_index(i)), || format!("set shrank at rho={rho}"))?;
            ensure(p.measure <= e.measure + 1e-15, || format!("measure shrank at rho={rho}"))?;
        }
        prev = Some(e);
    }
    Ok(())
}

/// `d(t) = 2t`, `Δ = 1`, so `t* = ½`: the share of seeds with
/// `|t̂* − ½| ≤ h + 2δ_n`. `δ_n` is computed for noise level 0.1.
pub fn first_exceedance_recovery(noise: f64, seeds: u64) -> Result<f64, String> {
    let (n, h) = (2000, 0.05);
    let k = KernelSpec::quartic();
    let grid = Grid::data_resolution(n, 0.0, 1.0, h, 1).map_err(|e| e.to_string())?;
    let dn = default_delta_n(0.1, &k, n, h, 2.0, grid.interval.len()).map_err(|e| e.to_string())?;
    let mut hits = 0;
    for seed in 0..seeds {
        let x = noisy_series(|t| 2.0 * t, n, noise, seed);
        let dev = deviation_curve(&jackknife_curve(&x, &k, h, &grid).map_err(|e| e.to_string())?, 0.0);
        let fe = first_exceedance(&dev, 1.0, dn).map_err(|e| e.to_string())?;
        if (fe.t_star_hat - 0.5).abs() <= h + 2.0 * dn {
            hits += 1;
        }
    }
    Ok(hits as f64 / seeds as f64)
}

/// Same inputs and seed give bit-identical analyses and Monte Carlo results.
pub fn reproducible(seed: u64) -> Check {
    let x = noisy_series(|t| (6.0 * t).sin(), 300, 0.3, seed);
    let k = KernelSpec::quartic();
    let cfg = AnalysisConfig {
        benchmark: BenchmarkSpec::FullMean,
        test: TestConfig { delta: 0.5, quantile_reps: 200, seed, ..TestConfig::default() },
        ..AnalysisConfig::default()
    };
    let a = analyze(&x, &k, &cfg, &TestVariant::ALL).map_err(|e| e.to_string())?;
    let b = analyze(&x, &k, &cfg, &TestVariant::ALL).map_err(|e| e.to_string())?;
    ensure(a == b, || "analysis differs between identical calls".into())?;
    let mut s = table_scenario(Table::Two, Panel::C, 1.5, 200, seed);
    s.analysis.test.quantile_reps = 200;
    let r1 = run_mc(&s, 8).map_err(|e| e.to_string())?;
    let r2 = run_mc(&s, 8).map_err(|e| e.to_string())?;
    ensure(r1 == r2, || "Monte Carlo result differs between identical calls".into())
}
