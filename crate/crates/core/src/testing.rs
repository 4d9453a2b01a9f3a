//! Tests of `H₀: d∞ ≤ Δ` against `H₁: d∞ > Δ`: the confidence-band test, the
//! Gumbel tests with and without the extremal-set correction, and the test
//! with simulated quantiles.

mod simulated;

use serde::{Deserialize, Serialize};

use crate::deviation::{default_rho, estimate_extremal_set, scaling_ell, DeviationCurve, ExtremalSet};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

pub use simulated::{simulate_gn, simulate_gn_quantile, GnSample, Sidedness};

/// Smallest accepted number of quantile replicates.
pub const MIN_QUANTILE_REPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestVariant {
    /// Reject when `d̂∞` exceeds `Δ` plus the half-width of the simultaneous band.
    Band,
    /// Gumbel quantile with the scaling `ℓ_n` of the whole interval.
    GumbelSimple,
    /// Gumbel quantile with the scaling `ℓ_n(Ê_n)` of the estimated extremal set.
    GumbelExtremal,
    /// Simulated quantile of `Ĝ_{n,j}` over the estimated extremal set.
    SimulatedQuantile,
}

impl TestVariant {
    pub const ALL: [TestVariant; 4] =
        [TestVariant::Band, TestVariant::GumbelSimple, TestVariant::GumbelExtremal, TestVariant::SimulatedQuantile];

    pub fn uses_extremal_set(self) -> bool {
        matches!(self, TestVariant::GumbelExtremal | TestVariant::SimulatedQuantile)
    }
}

impl std::str::FromStr for TestVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "band" => Ok(TestVariant::Band),
            "gumbel-simple" | "simple" => Ok(TestVariant::GumbelSimple),
            "gumbel-extremal" | "extremal" => Ok(TestVariant::GumbelExtremal),
            "simulated-quantile" | "simulated" => Ok(TestVariant::SimulatedQuantile),
            other => Err(Error::InvalidArgument(format!("unknown test variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub delta: f64,
    pub alpha: f64,
    pub variant: TestVariant,
    pub x0: f64,
    pub x1: f64,
    /// Band and simple tests scale with `x1 − x0` instead of `λ(I_n)`.
    pub use_ell_prime: bool,
    pub quantile_reps: usize,
    pub seed: u64,
    /// Threshold `ρ_n` of the extremal-set estimate; `None` selects [`default_rho`].
    pub rho: Option<f64>,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            delta: 0.0,
            alpha: 0.05,
            variant: TestVariant::SimulatedQuantile,
            x0: 0.0,
            x1: 1.0,
            use_ell_prime: true,
            quantile_reps: 2000,
            seed: 0,
            rho: None,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta must be finite and >= 0, got {}", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidProbability(self.alpha));
        }
        if !(self.x0 >= 0.0 && self.x0 < self.x1 && self.x1 <= 1.0) {
            return Err(Error::InvalidArgument(format!("need 0 <= x0 < x1 <= 1, got [{}, {}]", self.x0, self.x1)));
        }
        if self.quantile_reps < MIN_QUANTILE_REPS {
            return Err(Error::InvalidArgument(format!(
                "quantile_reps must be >= {MIN_QUANTILE_REPS}, got {}",
                self.quantile_reps
            )));
        }
        if let Some(rho) = self.rho {
            if !(rho > 0.0) {
                return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
            }
        }
        Ok(())
    }

    /// Gumbel location: `log 2` for `Δ = 0`, `0` otherwise.
    pub fn gumbel_location(&self) -> f64 {
        if self.delta == 0.0 {
            std::f64::consts::LN_2
        } else {
            0.0
        }
    }

    pub fn sidedness(&self) -> Sidedness {
        if self.delta == 0.0 {
            Sidedness::Two
        } else {
            Sidedness::One
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuantileSource {
    GumbelClosedForm,
    SimulatedGn1,
    SimulatedGn2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub variant: TestVariant,
    /// `d̂∞`.
    pub statistic: f64,
    pub threshold: f64,
    pub reject: bool,
    pub p_value: Option<f64>,
    pub sigma_hat: f64,
    pub bandwidth: f64,
    pub ell_used: f64,
    pub extremal_measure: Option<f64>,
    pub quantile_source: QuantileSource,
    /// The quantile entering the threshold.
    pub quantile: f64,
    pub alpha: f64,
    pub delta: f64,
}

/// Inverse of the Gumbel cdf `exp(−exp(−(x − a)))`.
pub fn gumbel_quantile(a: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidProbability(beta));
    }
    Ok(a - (-beta.ln()).ln())
}

/// Gumbel survival `1 − exp(−exp(−(x − a)))`.
pub fn gumbel_sf(a: f64, x: f64) -> f64 {
    -(-(-(x - a)).exp()).exp_m1()
}

/// `σ̂‖K*‖₂/(√(nh)·ℓ)`: converts the standardized scale to the data scale.
fn scale(dev: &DeviationCurve, k: &KernelSpec, sigma_hat: f64, ell: f64) -> f64 {
    sigma_hat * k.l2_norm_kstar() / (dev.nh().sqrt() * ell)
}

/// `(d̂∞ − Δ)/scale − ℓ²`, the statistic on the quantile scale.
fn standardize(dev: &DeviationCurve, k: &KernelSpec, sigma_hat: f64, ell: f64, delta: f64) -> f64 {
    (dev.sup - delta) / scale(dev, k, sigma_hat, ell) - ell * ell
}

fn check_sigma(sigma_hat: f64) -> Result<()> {
    if !(sigma_hat > 0.0 && sigma_hat.is_finite()) {
        return Err(Error::DegenerateVariance(sigma_hat));
    }
    Ok(())
}

fn closed_form(
    variant: TestVariant,
    dev: &DeviationCurve,
    k: &KernelSpec,
    sigma_hat: f64,
    cfg: &TestConfig,
    a: f64,
    ell: f64,
    measure: Option<f64>,
) -> Result<TestOutcome> {
    cfg.validate()?;
    check_sigma(sigma_hat)?;
    let q = gumbel_quantile(a, 1.0 - cfg.alpha)?;
    let threshold = (q + ell * ell) * scale(dev, k, sigma_hat, ell) + cfg.delta;
    let z = standardize(dev, k, sigma_hat, ell, cfg.delta);
    Ok(TestOutcome {
        variant,
        statistic: dev.sup,
        threshold,
        reject: dev.sup > threshold,
        p_value: Some(gumbel_sf(a, z).clamp(0.0, 1.0)),
        sigma_hat,
        bandwidth: dev.bandwidth,
        ell_used: ell,
        extremal_measure: measure,
        quantile_source: QuantileSource::GumbelClosedForm,
        quantile: q,
        alpha: cfg.alpha,
        delta: cfg.delta,
    })
}

fn simple_ell(dev: &DeviationCurve, k: &KernelSpec, cfg: &TestConfig) -> f64 {
    let measure = if cfg.use_ell_prime { cfg.x1 - cfg.x0 } else { dev.interval.len() };
    scaling_ell(measure, dev.bandwidth, k.lambda_k())
}

/// Rejects when `d̂∞ > Δ + c_{n,α}`, the half-width of the simultaneous band.
pub fn conf_band_test(dev: &DeviationCurve, k: &KernelSpec, sigma_hat: f64, cfg: &TestConfig) -> Result<TestOutcome> {
    let ell = simple_ell(dev, k, cfg);
    closed_form(TestVariant::Band, dev, k, sigma_hat, cfg, std::f64::consts::LN_2, ell, None)
}

/// Gumbel test with the interval-wide scaling sequence.
pub fn gumbel_simple_test(
    dev: &DeviationCurve,
    k: &KernelSpec,
    sigma_hat: f64,
    cfg: &TestConfig,
) -> Result<TestOutcome> {
    let ell = simple_ell(dev, k, cfg);
    closed_form(TestVariant::GumbelSimple, dev, k, sigma_hat, cfg, cfg.gumbel_location(), ell, None)
}

/// Gumbel test scaled by `ℓ_n(Ê_n)`.
pub fn gumbel_extremal_test(
    dev: &DeviationCurve,
    eset: &ExtremalSet,
    k: &KernelSpec,
    sigma_hat: f64,
    cfg: &TestConfig,
) -> Result<TestOutcome> {
    let ell = scaling_ell(eset.measure, dev.bandwidth, k.lambda_k());
    closed_form(TestVariant::GumbelExtremal, dev, k, sigma_hat, cfg, cfg.gumbel_location(), ell, Some(eset.measure))
}

/// Test with the simulated `(1 − α)`-quantile of `Ĝ_{n,j}`; `j = 2` when `Δ = 0`.
pub fn simulated_quantile_test(
    dev: &DeviationCurve,
    eset: &ExtremalSet,
    k: &KernelSpec,
    sigma_hat: f64,
    cfg: &TestConfig,
) -> Result<TestOutcome> {
    cfg.validate()?;
    let sample = simulate_gn(eset, dev.n, dev.bandwidth, k, cfg.sidedness(), cfg.quantile_reps, cfg.seed)?;
    simulated_quantile_test_with(dev, eset, k, sigma_hat, cfg, &sample)
}

/// As [`simulated_quantile_test`], reusing an already simulated sample.
pub fn simulated_quantile_test_with(
    dev: &DeviationCurve,
    eset: &ExtremalSet,
    k: &KernelSpec,
    sigma_hat: f64,
    cfg: &TestConfig,
    sample: &GnSample,
) -> Result<TestOutcome> {
    cfg.validate()?;
    check_sigma(sigma_hat)?;
    let ell = sample.ell;
    let q = sample.quantile(cfg.alpha)?;
    let threshold = (q + ell * ell) * scale(dev, k, sigma_hat, ell) + cfg.delta;
    let z = standardize(dev, k, sigma_hat, ell, cfg.delta);
    Ok(TestOutcome {
        variant: TestVariant::SimulatedQuantile,
        statistic: dev.sup,
        threshold,
        reject: dev.sup > threshold,
        p_value: Some(sample.p_value(z)),
        sigma_hat,
        bandwidth: dev.bandwidth,
        ell_used: ell,
        extremal_measure: Some(eset.measure),
        quantile_source: match sample.sidedness {
            Sidedness::One => QuantileSource::SimulatedGn1,
            Sidedness::Two => QuantileSource::SimulatedGn2,
        },
        quantile: q,
        alpha: cfg.alpha,
        delta: cfg.delta,
    })
}

/// `ρ_n` from the config, or the default built on `ℓ_n(λ(I_n))`.
pub fn rho_for(dev: &DeviationCurve, k: &KernelSpec, cfg: &TestConfig) -> f64 {
    cfg.rho.unwrap_or_else(|| {
        let ell = scaling_ell(dev.interval.len(), dev.bandwidth, k.lambda_k());
        default_rho(dev.n, dev.bandwidth, ell)
    })
}

/// Runs `cfg.variant`, estimating `Ê_n` first when the variant needs it.
pub fn run_test(dev: &DeviationCurve, k: &KernelSpec, sigma_hat: f64, cfg: &TestConfig) -> Result<TestOutcome> {
    match cfg.variant {
        TestVariant::Band => conf_band_test(dev, k, sigma_hat, cfg),
        TestVariant::GumbelSimple => gumbel_simple_test(dev, k, sigma_hat, cfg),
        TestVariant::GumbelExtremal => {
            gumbel_extremal_test(dev, &estimate_extremal_set(dev, rho_for(dev, k, cfg)), k, sigma_hat, cfg)
        }
        TestVariant::SimulatedQuantile => {
            simulated_quantile_test(dev, &estimate_extremal_set(dev, rho_for(dev, k, cfg)), k, sigma_hat, cfg)
        }
    }
}
