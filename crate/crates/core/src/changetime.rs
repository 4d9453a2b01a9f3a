//! Estimation of the first time `t*` at which `|μ(t) − g(μ)|` reaches `Δ`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::deviation::{scaling_ell, DeviationCurve};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

/// Default inflation of the margin `δ_n` over its minimal order.
pub const DEFAULT_MARGIN_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstExceedance {
    /// `t̂*`, or `+∞` when `|d̂|` never reaches `Δ − δ_n`.
    #[serde(serialize_with = "ser_inf", deserialize_with = "de_inf")]
    pub t_star_hat: f64,
    pub delta_n: f64,
    /// `Δ − δ_n`.
    pub threshold_used: f64,
}

impl FirstExceedance {
    pub fn detected(&self) -> bool {
        self.t_star_hat.is_finite()
    }
}

/// Serializes `+∞` as the string `"inf"`.
pub fn ser_inf<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

pub fn de_inf<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
        Repr::Text(t) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {t}"))),
    }
}

/// First crossing of `Δ − δ_n` by the running maximum of `|d̂|`, interpolated
/// linearly inside the crossing cell.
pub fn first_exceedance(dev: &DeviationCurve, delta: f64, delta_n: f64) -> Result<FirstExceedance> {
    if !(delta_n > 0.0 && delta_n < delta) {
        return Err(Error::InvalidMargin { delta_n, delta });
    }
    let c = delta - delta_n;
    let abs: Vec<f64> = dev.values.iter().map(|v| v.abs()).collect();
    let t_star_hat = match abs.iter().position(|&a| a >= c) {
        None => f64::INFINITY,
        Some(0) => dev.interval.lo.min(dev.grid[0]),
        Some(k) => {
            let (a0, a1) = (abs[k - 1], abs[k]);
            let frac = (c - a0) / (a1 - a0);
            dev.grid[k - 1] + frac * (dev.grid[k] - dev.grid[k - 1])
        }
    };
    Ok(FirstExceedance { t_star_hat, delta_n, threshold_used: c })
}

/// `δ_n = c·σ̂‖K*‖₂·ℓ_n/√(nh)`, with `ℓ_n` taken over a set of measure `measure`.
pub fn default_delta_n(sigma_hat: f64, k: &KernelSpec, n: usize, h: f64, c: f64, measure: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("margin factor must be positive, got {c}")));
    }
    if c <= 1.0 {
        log::warn!("margin factor c = {c} <= 1 does not dominate the noise level");
    }
    let ell = scaling_ell(measure, h, k.lambda_k());
    Ok(c * sigma_hat * k.l2_norm_kstar() * ell / (n as f64 * h).sqrt())
}
