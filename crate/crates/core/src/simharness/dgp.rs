//! Mean functions and error processes of the simulation study.

use std::f64::consts::PI;
use std::str::FromStr;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::smoothing::TimeSeries;

/// AR recursions start from zero this many steps before the first observation.
pub const AR_BURN_IN: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum MeanFn {
    /// `10 + ½·sin(8πx) + a·(x − ¼)²·1(x > ¼)`.
    Mu1(f64),
    /// `9` on `[0, ¼]`, `(3/2)·sin(2πx) + 10.5` on `(¼, ¾]`, `12` after.
    Mu2,
    /// As [`MeanFn::Mu2`] with the sine term negated, which makes the
    /// function continuously differentiable.
    Mu2Smooth,
    Constant(f64),
    /// Equispaced values over `[0, 1]`, linearly interpolated.
    Custom(Vec<f64>),
}

impl MeanFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            MeanFn::Mu1(a) => {
                let bump = if x > 0.25 { a * (x - 0.25).powi(2) } else { 0.0 };
                10.0 + 0.5 * (8.0 * PI * x).sin() + bump
            }
            MeanFn::Mu2 | MeanFn::Mu2Smooth => {
                let sign = if matches!(self, MeanFn::Mu2) { 1.0 } else { -1.0 };
                if x <= 0.25 {
                    9.0
                } else if x <= 0.75 {
                    sign * 1.5 * (2.0 * PI * x).sin() + 10.5
                } else {
                    12.0
                }
            }
            MeanFn::Constant(c) => *c,
            MeanFn::Custom(v) => match v.len() {
                0 => 0.0,
                1 => v[0],
                len => {
                    let pos = x.clamp(0.0, 1.0) * (len - 1) as f64;
                    let i = (pos.floor() as usize).min(len - 2);
                    let f = pos - i as f64;
                    v[i] * (1.0 - f) + v[i + 1] * f
                }
            },
        }
    }
}

impl FromStr for MeanFn {
    type Err = Error;

    /// `mu1:<a>`, `mu2`, `mu2-smooth` or `constant:<c>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown mean function '{s}'"));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        match s.trim().split_once(':') {
            None if s.trim() == "mu2" => Ok(MeanFn::Mu2),
            None if s.trim() == "mu2-smooth" => Ok(MeanFn::Mu2Smooth),
            Some(("mu1", a)) => Ok(MeanFn::Mu1(num(a)?)),
            Some(("constant", c)) => Ok(MeanFn::Constant(num(c)?)),
            _ => Err(bad()),
        }
    }
}

/// Error processes, each with marginal variance `¼`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorProcess {
    /// `½·η_i`.
    Iid,
    /// `(η_i + ½·η_{i−1})/√5`.
    Ma,
    /// `ε_i = ½·ε_{i−1} + (√3/4)·η_i`.
    Ar,
}

impl ErrorProcess {
    /// `Σ_k cov(ε_0, ε_k)`.
    pub fn long_run_variance(self) -> f64 {
        match self {
            ErrorProcess::Iid => 0.25,
            ErrorProcess::Ma => 0.45,
            ErrorProcess::Ar => 3.0 / 16.0 / 0.25,
        }
    }

    /// `n` consecutive errors from the `DATA` stream of `seed`.
    pub fn sample(self, n: usize, seed: u64) -> Vec<f64> {
        let mut g = rng::stream_rng(seed, rng::stream::DATA);
        let mut eta = move || -> f64 { StandardNormal.sample(&mut g) };
        match self {
            ErrorProcess::Iid => (0..n).map(|_| 0.5 * eta()).collect(),
            ErrorProcess::Ma => {
                let mut prev = eta();
                (0..n)
                    .map(|_| {
                        let e = eta();
                        let v = (e + 0.5 * prev) / 5f64.sqrt();
                        prev = e;
                        v
                    })
                    .collect()
            }
            ErrorProcess::Ar => {
                let c = 3f64.sqrt() / 4.0;
                let mut prev = 0.0;
                for _ in 0..AR_BURN_IN {
                    prev = 0.5 * prev + c * eta();
                }
                (0..n)
                    .map(|_| {
                        prev = 0.5 * prev + c * eta();
                        prev
                    })
                    .collect()
            }
        }
    }
}

impl FromStr for ErrorProcess {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "iid" => Ok(ErrorProcess::Iid),
            "ma" => Ok(ErrorProcess::Ma),
            "ar" => Ok(ErrorProcess::Ar),
            other => Err(Error::InvalidArgument(format!("unknown error process '{other}'"))),
        }
    }
}

/// `X_i = μ(i/n) + scale·ε_i`.
pub fn generate_series(mean: &MeanFn, errors: ErrorProcess, noise_scale: f64, n: usize, seed: u64) -> Result<TimeSeries> {
    let eps = errors.sample(n, seed);
    TimeSeries::new((1..=n).map(|i| mean.eval(i as f64 / n as f64) + noise_scale * eps[i - 1]).collect())
}
