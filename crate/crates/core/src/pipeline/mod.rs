//! End-to-end analysis of one series: bandwidth, variance, deviation curve,
//! extremal set, tests and first exceedance.

mod ingest;
mod report;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{estimate_benchmark, BenchmarkSpec};
use crate::changetime::{default_delta_n, first_exceedance, FirstExceedance, DEFAULT_MARGIN_FACTOR};
use crate::deviation::{deviation_curve, estimate_extremal_set, DeviationCurve, ExtremalSet};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::locstat::{default_ls_smoothing, local_lrv_curve, ls_benchmark, standardized_deviation, LocalLrvCurve, LsBenchmark};
use crate::smoothing::{cv_bandwidth_with, jackknife_curve, CvOptions, CvOutcome, FoldScheme, Grid, SmoothCurve, TimeSeries};
use crate::testing::{
    conf_band_test, gumbel_extremal_test, gumbel_simple_test, rho_for, simulate_gn, simulated_quantile_test_with,
    GnSample, TestConfig, TestOutcome, TestVariant,
};
use crate::variance::{block_length_rule, lrv_estimate, LrvEstimate};

pub use ingest::{ingest_csv, parse_series};
pub use report::{
    load_config_file, parse_key_values, run_pipeline, write_plot_csv, EpochMapping, InputSource, PlotRow, Report,
    RunConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthChoice {
    /// Cross-validation over `h = k/n`.
    Auto,
    Fixed(f64),
}

impl std::str::FromStr for BandwidthChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" | "cv" => Ok(BandwidthChoice::Auto),
            v => v
                .parse::<f64>()
                .map(BandwidthChoice::Fixed)
                .map_err(|_| Error::InvalidArgument(format!("bandwidth must be 'auto' or a number, got '{v}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub benchmark: BenchmarkSpec,
    /// Test parameters; `test.seed` also seeds the cross-validation folds.
    pub test: TestConfig,
    pub bandwidth: BandwidthChoice,
    pub folds: usize,
    pub fold_scheme: FoldScheme,
    pub thin_cv: bool,
    /// Extra grid points per design cell, minus one.
    pub grid_refine: usize,
    /// Block length for `σ̂²`; `None` applies the residual-based rule.
    pub block_length: Option<usize>,
    pub locally_stationary: bool,
    pub ls_tau: Option<f64>,
    pub ls_m: Option<usize>,
    pub first_change: bool,
    /// `c` in `δ_n = c·σ̂‖K*‖₂ℓ_n/√(nh)`.
    pub margin_factor: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            benchmark: BenchmarkSpec::FullMean,
            test: TestConfig::default(),
            bandwidth: BandwidthChoice::Auto,
            folds: 10,
            fold_scheme: FoldScheme::Blocked(None),
            thin_cv: false,
            grid_refine: 1,
            block_length: None,
            locally_stationary: false,
            ls_tau: None,
            ls_m: None,
            first_change: false,
            margin_factor: DEFAULT_MARGIN_FACTOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SigmaSummary {
    Global { sigma2: f64, block_length: usize },
    Local { tau: f64, m: usize, min: f64, max: f64, mean: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub bandwidth: f64,
    pub cv: Option<CvOutcome>,
    pub sigma: SigmaSummary,
    pub local_lrv: Option<LocalLrvCurve>,
    pub curve: SmoothCurve,
    pub g_hat: f64,
    pub deviation: DeviationCurve,
    pub extremal: ExtremalSet,
    /// One outcome per requested variant, in request order.
    pub outcomes: Vec<TestOutcome>,
    /// Half-width `c_{n,α}` of the simultaneous band at every grid point.
    pub band_halfwidth: Vec<f64>,
    pub first_change: Option<FirstExceedance>,
}

fn sigma_from_residuals(series: &TimeSeries, k: &KernelSpec, h: f64, fixed: Option<usize>) -> Result<LrvEstimate> {
    let n = series.n();
    let m = match fixed {
        Some(m) => m,
        None => {
            let fitted = crate::smoothing::fitted_values(series, k, h)?;
            let res: Vec<f64> = series.values().iter().zip(&fitted).map(|(x, f)| x - f).collect();
            block_length_rule(&res).min(n / 2)
        }
    };
    lrv_estimate(series, m)
}

/// Runs the full analysis for each of `variants`.
pub fn analyze(series: &TimeSeries, k: &KernelSpec, cfg: &AnalysisConfig, variants: &[TestVariant]) -> Result<Analysis> {
    series.require_estimable()?;
    cfg.test.validate()?;
    cfg.benchmark.validate()?;
    let n = series.n();
    let (h, cv) = match cfg.bandwidth {
        BandwidthChoice::Fixed(h) => (h, None),
        BandwidthChoice::Auto => {
            let opts = CvOptions { folds: cfg.folds, seed: cfg.test.seed, scheme: cfg.fold_scheme, thin: cfg.thin_cv };
            let out = cv_bandwidth_with(series, k, &opts)?;
            (out.bandwidth, Some(out))
        }
    };
    let grid = Grid::data_resolution(n, cfg.test.x0, cfg.test.x1, h, cfg.grid_refine)?;
    let curve = jackknife_curve(series, k, h, &grid)?;

    let (deviation, g_hat, sigma_hat, sigma, local_lrv) = if cfg.locally_stationary {
        let (tau0, m0) = default_ls_smoothing(n, h);
        let (tau, m) = (cfg.ls_tau.unwrap_or(tau0), cfg.ls_m.unwrap_or(m0));
        let lrv = local_lrv_curve(series, k, tau, m, &grid.points)?;
        let gspec = match cfg.benchmark {
            BenchmarkSpec::Constant(c) => LsBenchmark::Constant(c),
            BenchmarkSpec::FullMean => LsBenchmark::StandardizedMean,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "benchmark '{other}' is not available for locally stationary errors (use constant or full-mean)"
                )))
            }
        };
        let g_hat = ls_benchmark(&gspec, &curve, &lrv);
        let dev = standardized_deviation(&curve, &lrv, g_hat)?;
        let vals = &lrv.values;
        let sigma = SigmaSummary::Local {
            tau,
            m,
            min: vals.iter().copied().fold(f64::INFINITY, f64::min),
            max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: vals.iter().sum::<f64>() / vals.len() as f64,
        };
        (dev, g_hat, 1.0, sigma, Some(lrv))
    } else {
        let lrv = sigma_from_residuals(series, k, h, cfg.block_length)?;
        if !(lrv.sigma2 > 0.0) {
            return Err(Error::DegenerateVariance(lrv.sigma2));
        }
        let g_hat = estimate_benchmark(&cfg.benchmark, series, k, h)?;
        let dev = deviation_curve(&curve, g_hat);
        let sigma = SigmaSummary::Global { sigma2: lrv.sigma2, block_length: lrv.block_length };
        (dev, g_hat, lrv.sigma(), sigma, None)
    };

    let rho = rho_for(&deviation, k, &cfg.test);
    let extremal = estimate_extremal_set(&deviation, rho);
    let mut sample: Option<GnSample> = None;
    let mut outcomes = Vec::with_capacity(variants.len());
    for &variant in variants {
        let tc = TestConfig { variant, ..cfg.test.clone() };
        let out = match variant {
            TestVariant::Band => conf_band_test(&deviation, k, sigma_hat, &tc)?,
            TestVariant::GumbelSimple => gumbel_simple_test(&deviation, k, sigma_hat, &tc)?,
            TestVariant::GumbelExtremal => gumbel_extremal_test(&deviation, &extremal, k, sigma_hat, &tc)?,
            TestVariant::SimulatedQuantile => {
                if sample.is_none() {
                    sample = Some(simulate_gn(&extremal, n, h, k, tc.sidedness(), tc.quantile_reps, tc.seed)?);
                }
                simulated_quantile_test_with(&deviation, &extremal, k, sigma_hat, &tc, sample.as_ref().unwrap())?
            }
        };
        outcomes.push(out);
    }

    let band_cfg = TestConfig { delta: 0.0, variant: TestVariant::Band, ..cfg.test.clone() };
    let c_band = conf_band_test(&deviation, k, sigma_hat, &band_cfg)?.threshold;
    let band_halfwidth = match &local_lrv {
        Some(l) => l.values.iter().map(|s2| c_band * s2.sqrt()).collect(),
        None => vec![c_band; curve.grid.len()],
    };

    let first_change = if cfg.first_change {
        let dn = default_delta_n(sigma_hat, k, n, h, cfg.margin_factor, deviation.interval.len())?;
        Some(first_exceedance(&deviation, cfg.test.delta, dn)?)
    } else {
        None
    };

    Ok(Analysis {
        bandwidth: h,
        cv,
        sigma,
        local_lrv,
        curve,
        g_hat,
        deviation,
        extremal,
        outcomes,
        band_halfwidth,
        first_change,
    })
}
