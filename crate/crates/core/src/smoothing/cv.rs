//! K-fold cross-validation over the bandwidth grid `h = k/n`.

use std::f64::consts::SQRT_2;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::moments::fold_out_power_sums;
use super::{window, LocalMoments, TimeSeries};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::{par, rng};

/// How observations are split into folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FoldScheme {
    /// Seeded random partition into sets of (near) equal size.
    #[default]
    Random,
    /// Consecutive blocks of observations.
    Contiguous,
    /// Seeded random partition of consecutive runs of `len` observations;
    /// `None` uses `⌈n^{1/3}/2⌉`. Keeps serially correlated neighbours out of
    /// the training set of a held-out point.
    Blocked(Option<usize>),
}

impl FoldScheme {
    pub fn block_len(self, n: usize) -> usize {
        match self {
            FoldScheme::Random => 1,
            FoldScheme::Contiguous => n.div_ceil(10).max(1),
            FoldScheme::Blocked(Some(len)) => len.max(1),
            FoldScheme::Blocked(None) => ((0.5 * (n as f64).cbrt()).ceil() as usize).max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub scheme: FoldScheme,
    /// Keep every `⌈n/100⌉`-th candidate; honoured only when `n > 1000`.
    pub thin: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions { folds: 10, seed: 0, scheme: FoldScheme::Random, thin: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub bandwidth: f64,
    pub candidates: Vec<f64>,
    /// Cross-validation score per candidate; `None` when some fit was singular.
    pub scores: Vec<Option<f64>>,
}

/// Cross-validated bandwidth with `folds` random folds seeded by `seed`.
pub fn cv_bandwidth(series: &TimeSeries, k: &KernelSpec, folds: usize, seed: u64) -> Result<f64> {
    cv_bandwidth_with(series, k, &CvOptions { folds, seed, ..CvOptions::default() }).map(|o| o.bandwidth)
}

/// Fold label of every observation.
fn fold_labels(n: usize, opts: &CvOptions) -> Vec<usize> {
    let mut label = vec![0usize; n];
    match opts.scheme {
        FoldScheme::Random => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng::stream_rng(opts.seed, rng::stream::FOLDS));
            for (pos, &i) in order.iter().enumerate() {
                label[i] = pos % opts.folds;
            }
        }
        FoldScheme::Contiguous => {
            for (i, l) in label.iter_mut().enumerate() {
                *l = i * opts.folds / n;
            }
        }
        FoldScheme::Blocked(_) => {
            let len = opts.scheme.block_len(n);
            let mut order: Vec<usize> = (0..n.div_ceil(len)).collect();
            order.shuffle(&mut rng::stream_rng(opts.seed, rng::stream::FOLDS));
            for (pos, &b) in order.iter().enumerate() {
                for l in &mut label[b * len..((b + 1) * len).min(n)] {
                    *l = pos % opts.folds;
                }
            }
        }
    }
    label
}

fn from_powers(coef: &[f64], p1: &[f64], py: &[f64]) -> LocalMoments {
    let mut m = LocalMoments::default();
    for (j, &c) in coef.iter().enumerate() {
        m.s0 += c * p1[j];
        m.s1 += c * p1[j + 1];
        m.s2 += c * p1[j + 2];
        m.t0 += c * py[j];
        m.t1 += c * py[j + 1];
    }
    m
}

/// Fold-out local-linear intercepts at every design point, radius `r = nh`.
fn fold_out_intercepts(ys: &[f64], labels: &[usize], folds: usize, k: &KernelSpec, r: f64) -> Option<Vec<f64>> {
    fn via_sums<const N: usize>(ys: &[f64], labels: &[usize], folds: usize, coef: &[f64], r: f64) -> Option<Vec<f64>> {
        fold_out_power_sums::<N>(ys, labels, folds, r)
            .iter()
            .map(|(p1, py)| from_powers(coef, p1, py).solve().map(|b| b.0))
            .collect()
    }
    match k.polynomial() {
        // Moments up to degree `deg K + 2` are needed.
        Some(coef) if coef.len() == 3 => via_sums::<5>(ys, labels, folds, coef, r),
        Some(coef) if coef.len() == 5 => via_sums::<7>(ys, labels, folds, coef, r),
        _ => {
            let n = ys.len();
            (1..=n)
                .map(|j| {
                    let s = j as f64;
                    let mut m = LocalMoments::default();
                    for i in window(s, r, n) {
                        if labels[i - 1] == labels[j - 1] {
                            continue;
                        }
                        let u = (i as f64 - s) / r;
                        let w = k.eval(u);
                        let y = ys[i - 1];
                        m.s0 += w;
                        m.s1 += w * u;
                        m.s2 += w * u * u;
                        m.t0 += w * y;
                        m.t1 += w * u * y;
                    }
                    m.solve().map(|b| b.0)
                })
                .collect()
        }
    }
}

fn score(ys: &[f64], labels: &[usize], folds: usize, k: &KernelSpec, kk: usize) -> Option<f64> {
    let r = kk as f64;
    let h = r / ys.len() as f64;
    let wide = fold_out_intercepts(ys, labels, folds, k, r)?;
    let narrow = fold_out_intercepts(ys, labels, folds, k, r / SQRT_2)?;
    let sse: f64 = ys
        .iter()
        .zip(wide.iter().zip(&narrow))
        .map(|(y, (w, nw))| (y - (2.0 * nw - w)).powi(2))
        .sum();
    Some(sse / (1.0 - h / 2.0))
}

/// Cross-validation with explicit options; returns the full score trace.
///
/// Ties (scores within `1e-9` relative plus `1e-12·TSS`) go to the smallest
/// bandwidth.
pub fn cv_bandwidth_with(series: &TimeSeries, k: &KernelSpec, opts: &CvOptions) -> Result<CvOutcome> {
    series.require_estimable()?;
    let n = series.n();
    if opts.folds < 2 || opts.folds > n {
        return Err(Error::InvalidArgument(format!("folds must lie in 2..={n}, got {}", opts.folds)));
    }
    let max_k = n / 2;
    let step = if opts.thin && n > 1000 { n.div_ceil(100) } else { 1 };
    if opts.thin && n <= 1000 {
        log::warn!("bandwidth thinning ignored for n = {n} <= 1000");
    }
    let ks: Vec<usize> = (1..=max_k).step_by(step).collect();
    let labels = fold_labels(n, opts);
    let scores = par::map_slice(&ks, |&kk| score(series.values(), &labels, opts.folds, k, kk));

    let mean = series.values().iter().sum::<f64>() / n as f64;
    let tss: f64 = series.values().iter().map(|v| (v - mean).powi(2)).sum();
    let best = scores
        .iter()
        .flatten()
        .copied()
        .filter(|s| s.is_finite())
        .fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::NoValidBandwidth);
    }
    let tol = 1e-9 * best + 1e-12 * tss;
    let pick = scores.iter().position(|s| matches!(s, Some(v) if *v <= best + tol)).expect("best exists");
    let candidates: Vec<f64> = ks.iter().map(|&kk| kk as f64 / n as f64).collect();
    Ok(CvOutcome { bandwidth: candidates[pick], candidates, scores })
}

/// Single-fit helper used by tests as a reference implementation.
#[cfg(test)]
fn brute_score(series: &TimeSeries, k: &KernelSpec, labels: &[usize], nfolds: usize, h: f64) -> Option<f64> {
    let n = series.n();
    let nf = n as f64;
    let fit = |f: usize, t: f64, bw: f64| -> Option<f64> {
        let mut m = LocalMoments::default();
        for i in window(t * nf, bw * nf, n) {
            if labels[i - 1] == f {
                continue;
            }
            let u = (i as f64 / nf - t) / bw;
            let w = k.eval(u);
            let y = series.values()[i - 1];
            m.s0 += w;
            m.s1 += w * u;
            m.s2 += w * u * u;
            m.t0 += w * y;
            m.t1 += w * u * y;
        }
        m.solve().map(|b| b.0)
    };
    let mut sse = 0.0;
    for f in 0..nfolds {
        for j in 1..=n {
            if labels[j - 1] != f {
                continue;
            }
            let t = j as f64 / nf;
            let pred = 2.0 * fit(f, t, h / SQRT_2)? - fit(f, t, h)?;
            sse += (series.values()[j - 1] - pred).powi(2);
        }
    }
    Some(sse / (1.0 - h / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noisy(n: usize, seed: u64) -> TimeSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TimeSeries::new(
            (1..=n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    10.0 + 0.5 * (8.0 * std::f64::consts::PI * t).sin()
                        + 0.5 * Distribution::<f64>::sample(&StandardNormal, &mut rng)
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn folds_partition_with_equal_sizes() {
        for scheme in [FoldScheme::Random, FoldScheme::Contiguous] {
            let labels = fold_labels(97, &CvOptions { scheme, ..CvOptions::default() });
            let mut sizes = [0usize; 10];
            for &l in &labels {
                sizes[l] += 1;
            }
            assert_eq!(sizes.iter().sum::<usize>(), 97);
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn blocked_folds_keep_runs_together() {
        let n = 103;
        let scheme = FoldScheme::Blocked(Some(4));
        let labels = fold_labels(n, &CvOptions { scheme, ..CvOptions::default() });
        for b in labels.chunks(4) {
            assert!(b.iter().all(|&l| l == b[0]));
        }
        let mut sizes = [0usize; 10];
        for &l in &labels {
            sizes[l] += 1;
        }
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 4);
        assert_eq!(FoldScheme::Blocked(None).block_len(1000), 5);
        assert_eq!(FoldScheme::Blocked(None).block_len(200), 3);
    }

    #[test]
    fn blocked_folds_resist_serial_correlation() {
        // AR(1) errors with coefficient ½: single-observation folds chase the
        // noise, blocked folds do not.
        let n = 1000;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut e = 0.0;
        let x = TimeSeries::new(
            (1..=n)
                .map(|i| {
                    e = 0.5 * e + 0.43 * Distribution::<f64>::sample(&StandardNormal, &mut rng);
                    (8.0 * std::f64::consts::PI * i as f64 / n as f64).sin() + e
                })
                .collect(),
        )
        .unwrap();
        let k = KernelSpec::quartic();
        let h = |scheme| cv_bandwidth_with(&x, &k, &CvOptions { scheme, seed: 3, ..CvOptions::default() }).unwrap().bandwidth;
        let (random, blocked) = (h(FoldScheme::Random), h(FoldScheme::Blocked(None)));
        assert!(blocked > 2.0 * random, "random {random}, blocked {blocked}");
    }

    #[test]
    fn engine_scores_match_brute_force() {
        for (n, kernel, scheme) in [
            (120, KernelSpec::quartic(), FoldScheme::Random),
            (300, KernelSpec::epanechnikov(), FoldScheme::Random),
            (200, KernelSpec::quartic(), FoldScheme::Blocked(None)),
        ] {
            let x = noisy(n, 11);
            let opts = CvOptions { seed: 5, scheme, ..CvOptions::default() };
            let out = cv_bandwidth_with(&x, &kernel, &opts).unwrap();
            let labels = fold_labels(n, &opts);
            for (h, s) in out.candidates.iter().zip(&out.scores) {
                let b = brute_score(&x, &kernel, &labels, 10, *h);
                match (s, b) {
                    (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-8 * b.max(1.0), "h={h}: {a} vs {b}"),
                    (None, None) => {}
                    other => panic!("h={h}: validity mismatch {other:?}"),
                }
            }
            let brute_best = out
                .candidates
                .iter()
                .filter_map(|&h| brute_score(&x, &kernel, &labels, 10, h).map(|s| (h, s)))
                .fold((0.0, f64::INFINITY), |acc, (h, s)| if s < acc.1 { (h, s) } else { acc });
            assert_eq!(out.bandwidth, brute_best.0);
        }
    }

    #[test]
    fn sine_example_matches_exhaustive_search() {
        let n = 500;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let x = TimeSeries::new(
            (1..=n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    (8.0 * std::f64::consts::PI * t).sin()
                        + 0.5 * Distribution::<f64>::sample(&StandardNormal, &mut rng)
                })
                .collect(),
        )
        .unwrap();
        let k = KernelSpec::quartic();
        let opts = CvOptions { seed: 17, ..CvOptions::default() };
        let out = cv_bandwidth_with(&x, &k, &opts).unwrap();
        let labels = fold_labels(n, &opts);
        let (mut best_h, mut best) = (0.0, f64::INFINITY);
        for kk in 1..=n / 2 {
            let h = kk as f64 / n as f64;
            if let Some(s) = brute_score(&x, &k, &labels, 10, h) {
                if s < best {
                    (best_h, best) = (h, s);
                }
            }
        }
        assert_eq!(out.bandwidth, best_h);
        assert!(out.bandwidth > 0.02 && out.bandwidth < 0.2, "{}", out.bandwidth);
    }

    #[test]
    fn thinning_applies_only_above_one_thousand() {
        let x = noisy(1200, 4);
        let k = KernelSpec::quartic();
        let thin = cv_bandwidth_with(&x, &k, &CvOptions { thin: true, ..CvOptions::default() }).unwrap();
        assert_eq!(thin.candidates.len(), 600usize.div_ceil(12));
        assert!(thin.candidates.contains(&thin.bandwidth));
        let small = cv_bandwidth_with(&noisy(300, 4), &k, &CvOptions { thin: true, ..CvOptions::default() }).unwrap();
        assert_eq!(small.candidates.len(), 150);
    }

    #[test]
    fn custom_kernel_falls_back_to_direct_sums() {
        let q = KernelSpec::quartic();
        let custom = KernelSpec::custom(
            "quartic-copy",
            |u: f64| if u.abs() < 1.0 { 15.0 / 16.0 * (1.0 - u * u).powi(2) } else { 0.0 },
            None,
        )
        .unwrap();
        let x = noisy(150, 3);
        let a = cv_bandwidth_with(&x, &q, &CvOptions::default()).unwrap();
        let b = cv_bandwidth_with(&x, &custom, &CvOptions::default()).unwrap();
        assert_eq!(a.bandwidth, b.bandwidth);
    }

    #[test]
    fn affine_data_prefers_smallest_valid_bandwidth() {
        let x = TimeSeries::new((1..=200).map(|i| 1.0 + 0.01 * i as f64).collect()).unwrap();
        let out = cv_bandwidth_with(&x, &KernelSpec::quartic(), &CvOptions::default()).unwrap();
        let first_valid = out.candidates[out.scores.iter().position(Option::is_some).unwrap()];
        assert_eq!(out.bandwidth, first_valid);
    }

    #[test]
    fn deterministic_and_seed_sensitive_folds() {
        let x = noisy(200, 9);
        let k = KernelSpec::quartic();
        assert_eq!(cv_bandwidth(&x, &k, 10, 4).unwrap(), cv_bandwidth(&x, &k, 10, 4).unwrap());
        let f1 = fold_labels(200, &CvOptions { seed: 1, ..Default::default() });
        let f2 = fold_labels(200, &CvOptions { seed: 2, ..Default::default() });
        assert_ne!(f1, f2);
    }
}
