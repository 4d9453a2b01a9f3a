//! Locally stationary errors: the time-varying long-run variance `σ̂²(t)`,
//! the standardized deviation `μ̃(t)/σ̂(t) − ĝ` and its test.

use serde::{Deserialize, Serialize};

use crate::deviation::{DeviationCurve, ExtremalSet};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::par;
use crate::smoothing::{SmoothCurve, TimeSeries};
use crate::testing::{
    conf_band_test, gumbel_extremal_test, gumbel_simple_test, simulated_quantile_test, TestConfig, TestOutcome,
    TestVariant,
};

/// Positivity floor for `σ̂²(t)`.
pub const VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalLrvCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub tau: f64,
    pub m: usize,
    /// Value used on `[0, m/n)`.
    pub boundary_lo: f64,
    /// Value used on `(1 − m/n, 1]`.
    pub boundary_hi: f64,
}

impl LocalLrvCurve {
    pub fn floored(&self) -> bool {
        self.values.iter().any(|&v| v <= VARIANCE_FLOOR)
    }
}

/// `σ̂²(t) = Σ_j ω_τ(t, j)·(S_{j−m+1, j} − S_{j+1, j+m})²/(2m)`.
///
/// Only `j ∈ [m, n − m]`, where both block sums exist, enter; the kernel
/// weights are renormalized over them. Outside `[m/n, 1 − m/n]` the curve is
/// held at its boundary values.
pub fn local_lrv_curve(series: &TimeSeries, k: &KernelSpec, tau: f64, m: usize, grid: &[f64]) -> Result<LocalLrvCurve> {
    let x = series.values();
    let n = x.len();
    let nf = n as f64;
    if m == 0 || 2 * m >= n {
        return Err(Error::BlockTooLarge { m, n });
    }
    if !(tau > 1.0 / nf && tau < 0.5) {
        return Err(Error::InvalidArgument(format!("tau {tau} outside (1/n, 1/2)")));
    }
    // q[j - m] for j = m..=n-m (1-based j).
    let q: Vec<f64> = (m..=n - m)
        .map(|j| {
            let d: f64 = (0..m).map(|r| x[j - 1 - r] - x[j + r]).sum();
            d * d / (2.0 * m as f64)
        })
        .collect();

    let (t_lo, t_hi) = (m as f64 / nf, 1.0 - m as f64 / nf);
    let at = |t: f64| -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        let lo = ((t - tau) * nf).ceil().max(m as f64) as usize;
        let hi = (((t + tau) * nf).floor() as usize).min(n - m);
        for j in lo..=hi {
            let w = k.eval((j as f64 / nf - t) / tau);
            num += w * q[j - m];
            den += w;
        }
        if den > 0.0 {
            num / den
        } else {
            let j = ((t * nf).round() as usize).clamp(m, n - m);
            q[j - m]
        }
    };
    let boundary_lo = at(t_lo);
    let boundary_hi = at(t_hi);
    let mut values = par::map_slice(grid, |&t| {
        if t < t_lo {
            boundary_lo
        } else if t > t_hi {
            boundary_hi
        } else {
            at(t)
        }
    });
    let floored = values.iter().filter(|&&v| v <= VARIANCE_FLOOR).count();
    if floored > 0 {
        log::warn!("local long-run variance floored at {VARIANCE_FLOOR} on {floored} grid points");
        values.iter_mut().for_each(|v| *v = v.max(VARIANCE_FLOOR));
    }
    Ok(LocalLrvCurve {
        grid: grid.to_vec(),
        values,
        tau,
        m,
        boundary_lo: boundary_lo.max(VARIANCE_FLOOR),
        boundary_hi: boundary_hi.max(VARIANCE_FLOOR),
    })
}

/// `(τ, m)` with `m = round(√|ln h|·ln n·√(nh)) ≥ 2` and `τ = m^{−1/2}` clamped
/// to `(2/n, 0.49)`.
pub fn default_ls_smoothing(n: usize, h: f64) -> (f64, usize) {
    let nf = n as f64;
    let m = (h.ln().abs().sqrt() * nf.ln() * (nf * h).sqrt()).round().max(2.0) as usize;
    let tau = (m as f64).powf(-0.5).clamp(2.0 / nf + f64::EPSILON, 0.49);
    (tau, m)
}

/// Benchmark on the signal-to-noise scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum LsBenchmark {
    Constant(f64),
    /// Mean of `μ̃(t)/σ̂(t)` over the grid.
    StandardizedMean,
}

pub fn ls_benchmark(spec: &LsBenchmark, curve: &SmoothCurve, lrv: &LocalLrvCurve) -> f64 {
    match *spec {
        LsBenchmark::Constant(c) => c,
        LsBenchmark::StandardizedMean => {
            curve.values.iter().zip(&lrv.values).map(|(m, s)| m / s.sqrt()).sum::<f64>() / curve.values.len() as f64
        }
    }
}

/// `d̂^σ(t) = μ̃(t)/σ̂(t) − ĝ`.
pub fn standardized_deviation(curve: &SmoothCurve, lrv: &LocalLrvCurve, g_hat: f64) -> Result<DeviationCurve> {
    if curve.grid != lrv.grid {
        return Err(Error::InvalidArgument("variance curve and smooth curve use different grids".into()));
    }
    if let Some(&v) = lrv.values.iter().find(|&&v| v <= VARIANCE_FLOOR) {
        return Err(Error::DegenerateVariance(v));
    }
    let values = curve.values.iter().zip(&lrv.values).map(|(m, s)| m / s.sqrt() - g_hat).collect();
    Ok(DeviationCurve::from_values(
        curve.grid.clone(),
        values,
        curve.interval,
        curve.bandwidth,
        curve.cell,
        curve.n,
    ))
}

/// Test on the standardized deviation: the thresholds of the stationary
/// tests with `σ̂ = 1`.
pub fn ls_test(dev_sigma: &DeviationCurve, eset: &ExtremalSet, k: &KernelSpec, cfg: &TestConfig) -> Result<TestOutcome> {
    match cfg.variant {
        TestVariant::Band => conf_band_test(dev_sigma, k, 1.0, cfg),
        TestVariant::GumbelSimple => gumbel_simple_test(dev_sigma, k, 1.0, cfg),
        TestVariant::GumbelExtremal => gumbel_extremal_test(dev_sigma, eset, k, 1.0, cfg),
        TestVariant::SimulatedQuantile => simulated_quantile_test(dev_sigma, eset, k, 1.0, cfg),
    }
}
