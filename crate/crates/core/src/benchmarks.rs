//! Estimators of the benchmark value `g(μ)` the mean is compared against.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::smoothing::{jackknife_at, TimeSeries};

/// Largest bandwidth used for the initial-value fit.
pub const MAX_INFLATED_BANDWIDTH: f64 = 0.49;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum BenchmarkSpec {
    /// `μ(0)`, estimated by a boundary jackknife fit with bandwidth `h·(ln h)²`.
    InitialValue,
    /// Mean of the first `⌊x0·n⌋` observations.
    PartialMean(f64),
    FullMean,
    Constant(f64),
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BenchmarkSpec::PartialMean(x0) if !(x0 > 0.0 && x0 < 1.0) => {
                Err(Error::InvalidArgument(format!("partial-mean needs 0 < x0 < 1, got {x0}")))
            }
            BenchmarkSpec::Constant(c) if !c.is_finite() => {
                Err(Error::InvalidArgument(format!("constant benchmark must be finite, got {c}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for BenchmarkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchmarkSpec::InitialValue => write!(f, "initial"),
            BenchmarkSpec::PartialMean(x0) => write!(f, "partial-mean:{x0}"),
            BenchmarkSpec::FullMean => write!(f, "full-mean"),
            BenchmarkSpec::Constant(c) => write!(f, "constant:{c}"),
        }
    }
}

impl FromStr for BenchmarkSpec {
    type Err = Error;

    /// Parses `initial`, `partial-mean:<x0>`, `full-mean` or `constant:<c>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let number = |v: &str| {
            v.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad number in benchmark '{s}'")))
        };
        let spec = match s.split_once(':') {
            None if s == "initial" => BenchmarkSpec::InitialValue,
            None if s == "full-mean" => BenchmarkSpec::FullMean,
            Some(("partial-mean", v)) => BenchmarkSpec::PartialMean(number(v)?),
            Some(("constant", v)) => BenchmarkSpec::Constant(number(v)?),
            _ => return Err(Error::InvalidArgument(format!("unknown benchmark '{s}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `h·(ln h)²`.
pub fn inflated_bandwidth(h: f64) -> f64 {
    h * h.ln().powi(2)
}

/// `ĝ_n` for the chosen benchmark.
pub fn estimate_benchmark(spec: &BenchmarkSpec, series: &TimeSeries, k: &KernelSpec, h: f64) -> Result<f64> {
    spec.validate()?;
    let x = series.values();
    let n = x.len();
    match *spec {
        BenchmarkSpec::InitialValue => {
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::BandwidthOverflow(h));
            }
            let mut hb = inflated_bandwidth(h);
            if hb >= 0.5 {
                log::warn!("inflated bandwidth {hb:.4} clamped to {MAX_INFLATED_BANDWIDTH}");
                hb = MAX_INFLATED_BANDWIDTH;
            }
            let rate = n as f64 * h.powi(7) * h.ln().abs().powi(12);
            if rate > 1.0 {
                log::warn!("n·h⁷·|ln h|¹² = {rate:.3e} > 1; the initial-value benchmark may be biased");
            }
            jackknife_at(series, k, hb, 0.0)
        }
        BenchmarkSpec::PartialMean(x0) => {
            let m = (x0 * n as f64).floor() as usize;
            if m == 0 {
                return Err(Error::InvalidArgument(format!("partial-mean:{x0} covers no observation at n = {n}")));
            }
            Ok(x[..m].iter().sum::<f64>() / m as f64)
        }
        BenchmarkSpec::FullMean => Ok(x.iter().sum::<f64>() / n as f64),
        BenchmarkSpec::Constant(c) => Ok(c),
    }
}
