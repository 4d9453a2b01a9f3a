//! Monte Carlo quantiles of the Gaussian sup statistics `Ĝ_{n,1}` and `Ĝ_{n,2}`.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::MIN_QUANTILE_REPS;
use crate::deviation::{scaling_ell, ExtremalSet};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::smoothing::window;
use crate::{par, rng};

/// `One` takes the supremum of the Gaussian sums, `Two` of their absolute values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sidedness {
    One,
    Two,
}

/// Sorted replicates of `Ĝ_{n,j}` together with the `ℓ_n(Ê_n)` they used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnSample {
    pub values: Vec<f64>,
    pub sidedness: Sidedness,
    pub ell: f64,
}

impl GnSample {
    /// Order statistic `⌈reps·(1 − α)⌉` (1-based) of the replicates.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidProbability(alpha));
        }
        let reps = self.values.len();
        let rank = ((reps as f64 * (1.0 - alpha)) - 1e-9).ceil().clamp(1.0, reps as f64) as usize;
        Ok(self.values[rank - 1])
    }

    /// Fraction of replicates at or above `z`, floored at `1/(2·reps)`.
    pub fn p_value(&self, z: f64) -> f64 {
        let reps = self.values.len();
        let below = self.values.partition_point(|&g| g < z);
        ((reps - below) as f64 / reps as f64).max(0.5 / reps as f64)
    }
}

struct Row {
    start: usize,
    weights: Vec<f64>,
}

/// Draws `reps` replicates of
/// `ℓ·√(nh)/‖K*‖₂ · sup_{t ∈ Ê_n} (nh)⁻¹ Σ V_i K*((i/n − t)/h) − ℓ²`
/// with `ℓ = ℓ_n(Ê_n)`, the supremum taken over the member grid points.
///
/// Replicate `r` uses its own generator derived from `(seed, r)`, so the
/// sample does not depend on the thread count.
pub fn simulate_gn(
    eset: &ExtremalSet,
    n: usize,
    h: f64,
    k: &KernelSpec,
    sidedness: Sidedness,
    reps: usize,
    seed: u64,
) -> Result<GnSample> {
    if reps < MIN_QUANTILE_REPS {
        return Err(Error::InvalidArgument(format!("reps must be >= {MIN_QUANTILE_REPS}, got {reps}")));
    }
    if eset.points.is_empty() || !(eset.measure > 0.0) {
        return Err(Error::InvalidArgument("extremal set is empty".into()));
    }
    let nf = n as f64;
    let ell = scaling_ell(eset.measure, h, k.lambda_k());
    let factor = ell / (k.l2_norm_kstar() * (nf * h).sqrt());

    let rows: Vec<Row> = eset
        .points
        .iter()
        .map(|&t| {
            let w = window(t * nf, h * nf, n);
            Row { start: *w.start(), weights: w.map(|i| k.kstar((i as f64 / nf - t) / h)).collect() }
        })
        .collect();
    let lo = rows.iter().map(|r| r.start).min().unwrap_or(1);
    let hi = rows.iter().map(|r| r.start + r.weights.len()).max().unwrap_or(lo);
    let width = hi.saturating_sub(lo);

    let mut values = par::map_range(reps, |r| {
        let mut g = rng::stream_rng(rng::derive(seed, r as u64), rng::stream::QUANTILES);
        let v: Vec<f64> = (0..width).map(|_| StandardNormal.sample(&mut g)).collect();
        let sup = rows
            .iter()
            .map(|row| {
                let o = row.start - lo;
                let s: f64 = row.weights.iter().zip(&v[o..o + row.weights.len()]).map(|(w, x)| w * x).sum();
                match sidedness {
                    Sidedness::One => s,
                    Sidedness::Two => s.abs(),
                }
            })
            .fold(f64::NEG_INFINITY, f64::max);
        factor * sup - ell * ell
    });
    values.sort_by(f64::total_cmp);
    Ok(GnSample { values, sidedness, ell })
}

/// Empirical `(1 − α)`-quantile of `Ĝ_{n,j}`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_gn_quantile(
    eset: &ExtremalSet,
    n: usize,
    h: f64,
    k: &KernelSpec,
    sidedness: Sidedness,
    reps: usize,
    alpha: f64,
    seed: u64,
) -> Result<f64> {
    simulate_gn(eset, n, h, k, sidedness, reps, seed)?.quantile(alpha)
}
