//! The deviation curve `d̂(t) = μ̃(t) − ĝ`, its supremum, the scaling
//! sequences `ℓ_n` and the plug-in estimate of the extremal set.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::smoothing::{Interval, SmoothCurve};

/// Which sign of `d̂` attains the supremum of `|d̂|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArgmaxSign {
    Plus,
    Minus,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub interval: Interval,
    pub bandwidth: f64,
    pub cell: f64,
    pub n: usize,
    /// `max |values|`.
    pub sup: f64,
    pub argmax_sign: ArgmaxSign,
}

impl DeviationCurve {
    /// Builds a curve from raw values on a grid inside `interval`.
    pub fn from_values(
        grid: Vec<f64>,
        values: Vec<f64>,
        interval: Interval,
        bandwidth: f64,
        cell: f64,
        n: usize,
    ) -> Self {
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let sup = hi.max(-lo).max(0.0);
        let argmax_sign = if hi == -lo {
            ArgmaxSign::Both
        } else if hi > -lo {
            ArgmaxSign::Plus
        } else {
            ArgmaxSign::Minus
        };
        DeviationCurve { grid, values, interval, bandwidth, cell, n, sup, argmax_sign }
    }

    /// Sample size times bandwidth.
    pub fn nh(&self) -> f64 {
        self.n as f64 * self.bandwidth
    }
}

/// `d̂(t) = μ̃(t) − ĝ` on the grid of `curve`.
pub fn deviation_curve(curve: &SmoothCurve, g_hat: f64) -> DeviationCurve {
    DeviationCurve::from_values(
        curve.grid.clone(),
        curve.values.iter().map(|v| v - g_hat).collect(),
        curve.interval,
        curve.bandwidth,
        curve.cell,
        curve.n,
    )
}

/// `ℓ_n(A) = √(2·log(Λ_K·λ(A)/(2πh)))`, with the log argument clamped below at `e`.
pub fn scaling_ell(measure: f64, h: f64, lambda_k: f64) -> f64 {
    let arg = lambda_k * measure / (2.0 * PI * h);
    let arg = if arg.is_nan() { std::f64::consts::E } else { arg.max(std::f64::consts::E) };
    (2.0 * arg.ln()).sqrt()
}

/// `ρ_n = ℓ^{1.001}/√(nh)`.
pub fn default_rho(n: usize, h: f64, ell: f64) -> f64 {
    ell.powf(1.001) / (n as f64 * h).sqrt()
}

/// Grid-based estimate of `{t : d̂∞ − |d̂(t)| ≤ ρ}`, split by sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSet {
    /// Maximal runs of qualifying grid points, as closed intervals.
    pub intervals: Vec<[f64; 2]>,
    /// Runs where `d̂∞ − d̂(t) ≤ ρ`.
    pub plus: Vec<[f64; 2]>,
    /// Runs where `d̂∞ + d̂(t) ≤ ρ`.
    pub minus: Vec<[f64; 2]>,
    /// Lebesgue measure; see [`estimate_extremal_set`].
    pub measure: f64,
    pub rho: f64,
    /// Indices of the member grid points.
    #[serde(skip)]
    pub members: Vec<usize>,
    /// The member grid points themselves.
    #[serde(skip)]
    pub points: Vec<f64>,
}

impl ExtremalSet {
    pub fn contains_index(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }
}

fn runs(flags: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, flags.len() - 1));
    }
    out
}

/// `Ê_n = Ê⁺ ∪ Ê⁻` on the grid of `dev`.
///
/// Each member grid point is credited with its nearest-point cell inside
/// `I_n` (half a cell to either side, extended to the interval ends at the
/// first and last grid point), so that `Ê_n = I_n` has measure `λ(I_n)` and
/// an interior singleton has measure one cell. The total is floored at one
/// cell.
pub fn estimate_extremal_set(dev: &DeviationCurve, rho: f64) -> ExtremalSet {
    let g = &dev.grid;
    let m = g.len();
    let plus: Vec<bool> = dev.values.iter().map(|&v| dev.sup - v <= rho).collect();
    let minus: Vec<bool> = dev.values.iter().map(|&v| dev.sup + v <= rho).collect();
    let any: Vec<bool> = plus.iter().zip(&minus).map(|(a, b)| *a || *b).collect();
    let span = |(a, b): (usize, usize)| [g[a], g[b]];

    let left = |i: usize| if i == 0 { dev.interval.lo.min(g[0]) } else { 0.5 * (g[i - 1] + g[i]) };
    let right = |i: usize| if i + 1 == m { dev.interval.hi.max(g[m - 1]) } else { 0.5 * (g[i] + g[i + 1]) };
    let merged = runs(&any);
    let measure: f64 = merged.iter().map(|&(a, b)| right(b) - left(a)).sum();

    ExtremalSet {
        intervals: merged.iter().copied().map(span).collect(),
        plus: runs(&plus).into_iter().map(span).collect(),
        minus: runs(&minus).into_iter().map(span).collect(),
        measure: measure.max(dev.cell),
        rho,
        members: (0..m).filter(|&i| any[i]).collect(),
        points: (0..m).filter(|&i| any[i]).map(|i| g[i]).collect(),
    }
}
