//! Long-run variance of stationary errors from differences of adjacent block
//! sums, and the data-driven block length.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::smoothing::{fitted_values, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrvEstimate {
    pub sigma2: f64,
    pub block_length: usize,
}

impl LrvEstimate {
    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// `σ̂² = (⌊n/m⌋ − 1)⁻¹ Σ_j (S_{(j−1)m+1, jm} − S_{jm+1, (j+1)m})² / (2m)`.
///
/// Expects raw observations: differencing adjacent blocks cancels a smooth mean.
pub fn lrv_estimate(series: &TimeSeries, m: usize) -> Result<LrvEstimate> {
    let x = series.values();
    let n = x.len();
    if m == 0 || n / m < 2 {
        return Err(Error::BlockTooLarge { m, n });
    }
    let blocks = n / m;
    let mut acc = 0.0;
    for j in 1..blocks {
        let (a, b) = ((j - 1) * m, j * m);
        // Pairwise differences keep a large common level out of the sums.
        let d: f64 = (0..m).map(|k| x[a + k] - x[b + k]).sum();
        acc += d * d / (2.0 * m as f64);
    }
    Ok(LrvEstimate { sigma2: acc / (blocks - 1) as f64, block_length: m })
}

/// `⌊n^{1/3}⌋`, the block length used when no residuals are available.
pub fn default_block_length(n: usize) -> usize {
    ((n as f64).cbrt().floor() as usize).max(1)
}

/// Biased (denominator `n`) autocovariances `γ̂_0..γ̂_{max_lag}` about the mean.
pub fn autocovariances(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    (0..=max_lag)
        .map(|k| {
            if k >= n {
                return 0.0;
            }
            x[..n - k].iter().zip(&x[k..]).map(|(a, b)| (a - mean) * (b - mean)).sum::<f64>() / n as f64
        })
        .collect()
}

/// `m = max{⌊√(Σ_{k=1}^4 |γ̂_k| / Σ_{k=0}^4 |γ̂_k|) · n^{1/3}⌋, 1}` on residuals.
pub fn block_length_rule(residuals: &[f64]) -> usize {
    let n = residuals.len();
    let g = autocovariances(residuals, 4);
    let num: f64 = g[1..].iter().map(|v| v.abs()).sum();
    let den = num + g[0].abs();
    if !(den > 0.0) {
        return 1;
    }
    (((num / den).sqrt() * (n as f64).cbrt()).floor() as usize).max(1)
}

/// Block length from jackknife residuals at bandwidth `h`, then `σ̂²` on the
/// raw series.
pub fn lrv_auto(series: &TimeSeries, k: &KernelSpec, h: f64) -> Result<LrvEstimate> {
    let fitted = fitted_values(series, k, h)?;
    let residuals: Vec<f64> = series.values().iter().zip(&fitted).map(|(x, f)| x - f).collect();
    let m = block_length_rule(&residuals).min(series.n() / 2);
    lrv_estimate(series, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    // Naive double loop over explicit block sums.
    fn oracle_lrv(x: &[f64], m: usize) -> f64 {
        let blocks = x.len() / m;
        let block_sum = |j: usize| x[j * m..(j + 1) * m].iter().sum::<f64>();
        (0..blocks - 1).map(|j| (block_sum(j) - block_sum(j + 1)).powi(2) / (2.0 * m as f64)).sum::<f64>()
            / (blocks - 1) as f64
    }

    fn oracle_acov(x: &[f64], k: usize) -> f64 {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let mut s = 0.0;
        for i in k..x.len() {
            s += (x[i] - mean) * (x[i - k] - mean);
        }
        s / n
    }

    #[test]
    fn constant_series_has_zero_variance() {
        let x = TimeSeries::new(vec![4.2; 100]).unwrap();
        for m in [1, 3, 10, 50] {
            assert_eq!(lrv_estimate(&x, m).unwrap().sigma2, 0.0);
        }
    }

    #[test]
    fn matches_naive_block_sums() {
        let v = normals(997, 3);
        let x = TimeSeries::new(v.clone()).unwrap();
        for m in [1, 2, 7, 31, 498] {
            let got = lrv_estimate(&x, m).unwrap().sigma2;
            assert!((got - oracle_lrv(&v, m)).abs() < 1e-12 * got.max(1.0), "m={m}");
        }
    }

    #[test]
    fn block_too_large() {
        let x = TimeSeries::new(vec![0.0; 30]).unwrap();
        assert!(matches!(lrv_estimate(&x, 16), Err(Error::BlockTooLarge { m: 16, n: 30 })));
        assert!(lrv_estimate(&x, 0).is_err());
        assert!(lrv_estimate(&x, 15).is_ok());
    }

    #[test]
    fn iid_and_ma_examples() {
        // One replicate has sd ≈ 0.065 here, so average a few seeds.
        let n = 10_000;
        let m = default_block_length(n);
        let seeds = 10;
        let (mut iid, mut ma) = (0.0, 0.0);
        for seed in 0..seeds {
            let x = TimeSeries::new(normals(n, 100 + seed)).unwrap();
            iid += lrv_estimate(&x, m).unwrap().sigma2 / seeds as f64;
            let eta = normals(n + 1, 200 + seed);
            let e: Vec<f64> = (1..=n).map(|i| (eta[i] + 0.5 * eta[i - 1]) / 5f64.sqrt()).collect();
            ma += lrv_estimate(&TimeSeries::new(e).unwrap(), m).unwrap().sigma2 / seeds as f64;
        }
        assert!((iid - 1.0).abs() < 0.1, "{iid}");
        assert!((ma - 0.45).abs() < 0.08, "{ma}");
    }

    #[test]
    fn rule_on_orthogonal_residuals_is_one() {
        // Zero mean; the only nonzero product sits at lag 5.
        let r = [1.0, 0.0, 0.0, 0.0, 0.0, -1.0];
        let g = autocovariances(&r, 4);
        assert!(g[1..].iter().all(|v| v.abs() < 1e-15), "{g:?}");
        assert_eq!(block_length_rule(&r), 1);
        assert_eq!(block_length_rule(&[0.0; 40]), 1);
    }

    #[test]
    fn rule_matches_oracle_autocovariances() {
        let n = 1000;
        let white = normals(n, 21);
        let eta = normals(n + 200, 22);
        let mut ar = Vec::with_capacity(n);
        let mut prev = 0.0;
        for (i, e) in eta.iter().enumerate() {
            prev = 0.5 * prev + 3f64.sqrt() / 4.0 * e;
            if i >= 200 {
                ar.push(prev);
            }
        }
        for r in [&white, &ar] {
            let g: Vec<f64> = (0..=4).map(|k| oracle_acov(r, k)).collect();
            let ratio = g[1..].iter().map(|v| v.abs()).sum::<f64>() / g.iter().map(|v| v.abs()).sum::<f64>();
            let want = ((ratio.sqrt() * 10.0).floor() as usize).max(1);
            assert_eq!(block_length_rule(r), want);
        }
        assert!(block_length_rule(&ar) > block_length_rule(&white));
    }

    #[test]
    fn auto_rule_on_smooth_signal() {
        let n = 2000;
        let e = normals(n, 5);
        let x: Vec<f64> = (1..=n)
            .map(|i| 10.0 + (6.0 * i as f64 / n as f64).sin() + 0.5 * e[i - 1])
            .collect();
        let est = lrv_auto(&TimeSeries::new(x).unwrap(), &KernelSpec::quartic(), 0.1).unwrap();
        assert!((est.sigma2 - 0.25).abs() < 0.06, "{est:?}");
        assert!(est.block_length >= 1 && est.block_length <= 13);
    }
}
