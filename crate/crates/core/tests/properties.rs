mod common;

use proptest::prelude::*;

use common::*;
use relchange::kernels::KernelSpec;
use relchange::smoothing::{cv_bandwidth_with, jackknife_curve, CvOptions, Grid, TimeSeries};
use relchange::variance::{block_length_rule, lrv_estimate};

#[test]
fn kstar_moment_identities() {
    for k in kernels() {
        kstar_moments(&k, 1e-8).unwrap();
    }
}

#[test]
fn first_exceedance_recovers_crossing() {
    for noise in [0.0, 0.1] {
        let share = first_exceedance_recovery(noise, 200).unwrap();
        assert!(share >= 0.95, "noise {noise}: {share}");
    }
}

#[test]
fn reproducibility() {
    for seed in [1, 2] {
        reproducible(seed).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_is_exact(a in -10.0..10.0f64, b in -10.0..10.0f64, n in 40usize..400, h in 0.05..0.45f64) {
        prop_assert!(affine_exactness(a, b, n, h, 1e-10).is_ok(), "{:?}", affine_exactness(a, b, n, h, 1e-10));
    }

    #[test]
    fn kernel_is_symmetric_and_normalised(x in 0.0..1.5f64) {
        for k in kernels() {
            prop_assert!((k.eval(x) - k.eval(-x)).abs() < 1e-15);
            prop_assert!(k.eval(x) >= 0.0);
            prop_assert!((k.kstar(x) - k.kstar(-x)).abs() < 1e-15);
        }
    }

    #[test]
    fn jackknife_is_shift_and_scale_equivariant(seed in 0u64..1000, c in -50.0..50.0f64, s in 0.1..10.0f64) {
        let x = noisy_series(|t| (5.0 * t).cos(), 150, 0.4, seed);
        let y = TimeSeries::new(x.values().iter().map(|v| c + s * v).collect()).unwrap();
        let k = KernelSpec::quartic();
        let grid = Grid::data_resolution(150, 0.0, 1.0, 0.15, 2).unwrap();
        let a = jackknife_curve(&x, &k, 0.15, &grid).unwrap();
        let b = jackknife_curve(&y, &k, 0.15, &grid).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            prop_assert!((c + s * u - v).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn lrv_shift_and_scale(seed in 0u64..1000, c in -100.0..100.0f64, s in 0.1..10.0f64, m in 1usize..20) {
        let x = noisy_series(|_| 0.0, 400, 1.0, seed);
        let shifted = TimeSeries::new(x.values().iter().map(|v| c + v).collect()).unwrap();
        let scaled = TimeSeries::new(x.values().iter().map(|v| s * v).collect()).unwrap();
        let base = lrv_estimate(&x, m).unwrap().sigma2;
        prop_assert!((lrv_estimate(&shifted, m).unwrap().sigma2 - base).abs() <= 1e-9 * base * (1.0 + c.abs()));
        prop_assert!((lrv_estimate(&scaled, m).unwrap().sigma2 - s * s * base).abs() <= 1e-12 * s * s * base);
    }

    #[test]
    fn block_rule_in_range(seed in 0u64..1000, n in 20usize..3000, phi in -0.9..0.9f64) {
        let e = noisy_series(|_| 0.0, n, 1.0, seed);
        let mut prev = 0.0;
        let ar: Vec<f64> = e.values().iter().map(|z| { prev = phi * prev + z; prev }).collect();
        let m = block_length_rule(&ar);
        prop_assert!(m >= 1 && m as f64 <= (n as f64).cbrt().floor().max(1.0));
    }

    #[test]
    fn cv_returns_a_candidate(seed in 0u64..200, n in 20usize..160) {
        let x = noisy_series(|t| (7.0 * t).sin(), n, 0.3, seed);
        let out = cv_bandwidth_with(&x, &KernelSpec::quartic(), &CvOptions { seed, ..CvOptions::default() }).unwrap();
        prop_assert!(out.candidates.contains(&out.bandwidth));
        prop_assert!(out.candidates.iter().all(|&h| h > 0.0 && h <= 0.5));
        let k = (out.bandwidth * n as f64).round();
        prop_assert!((k / n as f64 - out.bandwidth).abs() < 1e-12);
    }

    #[test]
    fn extremal_set_grows_with_rho(seed in 0u64..1000, amp in 0.0..3.0f64) {
        let x = noisy_series(|t| amp * (9.0 * t).sin(), 300, 0.5, seed);
        let dev = deviation_of(&x, 0.1);
        prop_assert!(extremal_monotone(&dev, &[0.0, 0.01, 0.05, 0.2, 0.5, 5.0]).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decisions_monotone_in_delta(seed in 0u64..1000, amp in 0.0..2.0f64) {
        let x = noisy_series(|t| amp * (4.0 * t).sin(), 200, 0.3, seed);
        let r = delta_monotone(&x, 0.1, seed, &[0.05, 0.2, 0.4, 0.7, 1.0, 1.5, 2.5]);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn decisions_monotone_in_alpha(seed in 0u64..1000, amp in 0.0..2.0f64, delta in 0.0..1.5f64) {
        let x = noisy_series(|t| amp * (4.0 * t).sin(), 200, 0.3, seed);
        let r = alpha_monotone(&x, 0.1, seed, delta, &[0.01, 0.05, 0.1, 0.2, 0.5]);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn reject_matches_threshold(seed in 0u64..1000, amp in 0.0..2.0f64, delta in 0.0..1.5f64) {
        use relchange::pipeline::{analyze, AnalysisConfig, BandwidthChoice};
        use relchange::testing::{TestConfig, TestVariant};
        let x = noisy_series(|t| amp * t, 200, 0.3, seed);
        let cfg = AnalysisConfig {
            bandwidth: BandwidthChoice::Fixed(0.1),
            test: TestConfig { delta, quantile_reps: 200, seed, ..TestConfig::default() },
            ..AnalysisConfig::default()
        };
        let a = analyze(&x, &KernelSpec::quartic(), &cfg, &TestVariant::ALL).unwrap();
        for o in &a.outcomes {
            prop_assert_eq!(o.reject, o.statistic > o.threshold);
            prop_assert!(o.threshold >= delta);
            if let Some(p) = o.p_value {
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }
    }
}
