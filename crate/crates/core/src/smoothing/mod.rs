//! Local-linear regression on the equispaced design `i/n`, the jackknife
//! bias-corrected estimator `μ̃_h = 2·μ̂_{h/√2} − μ̂_h`, and cross-validated
//! bandwidth selection.

mod cv;
pub(crate) mod moments;

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::par;

pub use cv::{cv_bandwidth, cv_bandwidth_with, CvOptions, CvOutcome, FoldScheme};

/// Smallest series accepted by any estimation routine.
pub const MIN_OBSERVATIONS: usize = 20;

/// Condition-number limit for the 2×2 weighted design matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// Observations `X_1..X_n` at the design points `i/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewObservations { got: 0, need: 1 });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i + 1));
        }
        Ok(TimeSeries { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Design point of the 1-based observation `i`.
    pub fn design_point(&self, i: usize) -> f64 {
        i as f64 / self.n() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        TimeSeries::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub(crate) fn require_estimable(&self) -> Result<()> {
        if self.n() < MIN_OBSERVATIONS {
            return Err(Error::TooFewObservations { got: self.n(), need: MIN_OBSERVATIONS });
        }
        Ok(())
    }
}

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    /// `I_n = [x0 ∨ h, x1 ∧ (1 − h)]`.
    pub fn trimmed(x0: f64, x1: f64, h: f64) -> Self {
        Interval { lo: x0.max(h), hi: x1.min(1.0 - h) }
    }

    pub fn len(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

/// Evaluation grid inside `I_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub points: Vec<f64>,
    pub interval: Interval,
    /// Spacing between consecutive grid points.
    pub cell: f64,
}

impl Grid {
    /// Design points `i/n` inside `I_n = [x0 ∨ h, x1 ∧ (1−h)]`, with `refine − 1`
    /// equispaced points inserted into every cell.
    pub fn data_resolution(n: usize, x0: f64, x1: f64, h: f64, refine: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&x0) || !(x1 > x0 && x1 <= 1.0) {
            return Err(Error::InvalidArgument(format!("need 0 <= x0 < x1 <= 1, got [{x0}, {x1}]")));
        }
        let refine = refine.max(1);
        let interval = Interval::trimmed(x0, x1, h);
        let nf = n as f64;
        let first = ((interval.lo * nf) - 1e-9).ceil().max(1.0) as usize;
        let last = ((interval.hi * nf) + 1e-9).floor().min(nf) as usize;
        if interval.is_empty() || last < first {
            return Err(Error::InvalidArgument(format!(
                "no design point inside I_n = [{}, {}]",
                interval.lo, interval.hi
            )));
        }
        let mut points = Vec::with_capacity((last - first) * refine + 1);
        for i in first..=last {
            let t = i as f64 / nf;
            points.push(t);
            if i < last {
                for r in 1..refine {
                    points.push((i as f64 + r as f64 / refine as f64) / nf);
                }
            }
        }
        Ok(Grid { points, interval, cell: 1.0 / (nf * refine as f64) })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Jackknife estimate `μ̃_h` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
    pub interval: Interval,
    pub cell: f64,
    /// Sample size of the underlying series.
    pub n: usize,
}

/// Weighted local moments in units of `u = (i/n − t)/h`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct LocalMoments {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub t0: f64,
    pub t1: f64,
}

impl LocalMoments {
    /// Solves the 2×2 normal equations; `None` when the design is singular
    /// or its condition number exceeds [`MAX_CONDITION`].
    pub fn solve(&self) -> Option<(f64, f64)> {
        let det = self.s0 * self.s2 - self.s1 * self.s1;
        let half_trace = 0.5 * (self.s0 + self.s2);
        let disc = (half_trace * half_trace - det).max(0.0).sqrt();
        let (hi, lo) = (half_trace + disc, half_trace - disc);
        if !(lo > 0.0 && det > 0.0) || hi / lo > MAX_CONDITION {
            return None;
        }
        let b0 = (self.s2 * self.t0 - self.s1 * self.t1) / det;
        let b1 = (self.s0 * self.t1 - self.s1 * self.t0) / det;
        Some((b0, b1))
    }
}

/// Window of 1-based indices `i` with `|i − s| ≤ r`, clipped to `1..=n`.
#[inline]
pub(crate) fn window(s: f64, r: f64, n: usize) -> std::ops::RangeInclusive<usize> {
    let lo = (s - r).ceil().max(1.0) as usize;
    let hi = (s + r).floor().min(n as f64).max(0.0) as usize;
    lo..=hi
}

fn moments_at(values: &[f64], k: &KernelSpec, h: f64, t: f64) -> LocalMoments {
    let n = values.len();
    let nf = n as f64;
    let mut m = LocalMoments::default();
    for i in window(t * nf, h * nf, n) {
        let u = (i as f64 / nf - t) / h;
        let w = k.eval(u);
        if w == 0.0 {
            continue;
        }
        let y = values[i - 1];
        let wu = w * u;
        m.s0 += w;
        m.s1 += wu;
        m.s2 += wu * u;
        m.t0 += w * y;
        m.t1 += wu * y;
    }
    m
}

/// Local-linear fit at `t`: returns `(μ̂_h(t), slope)`.
pub fn local_linear_fit(series: &TimeSeries, k: &KernelSpec, h: f64, t: f64) -> Result<(f64, f64)> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {h}")));
    }
    let m = moments_at(series.values(), k, h, t);
    m.solve()
        .map(|(b0, b1)| (b0, b1 / h))
        .ok_or(Error::SingularDesign { t, bandwidth: h })
}

#[inline]
pub(crate) fn jackknife_at(series: &TimeSeries, k: &KernelSpec, h: f64, t: f64) -> Result<f64> {
    let wide = local_linear_fit(series, k, h, t)?.0;
    let narrow = local_linear_fit(series, k, h / SQRT_2, t)?.0;
    Ok(2.0 * narrow - wide)
}

/// `μ̃_h(t) = 2·μ̂_{h/√2}(t) − μ̂_h(t)` on every grid point.
pub fn jackknife_curve(series: &TimeSeries, k: &KernelSpec, h: f64, grid: &Grid) -> Result<SmoothCurve> {
    series.require_estimable()?;
    let n = series.n();
    if !(h > 1.0 / n as f64 && h <= 0.5) {
        return Err(Error::InvalidArgument(format!("bandwidth {h} outside (1/n, 1/2]")));
    }
    let values: Result<Vec<f64>> =
        par::map_slice(&grid.points, |&t| jackknife_at(series, k, h, t)).into_iter().collect();
    Ok(SmoothCurve {
        grid: grid.points.clone(),
        values: values?,
        bandwidth: h,
        interval: grid.interval,
        cell: grid.cell,
        n,
    })
}

/// `μ̃_h(i/n)` at every design point, boundary fits included.
pub fn fitted_values(series: &TimeSeries, k: &KernelSpec, h: f64) -> Result<Vec<f64>> {
    let nf = series.n() as f64;
    par::map_range(series.n(), |i| jackknife_at(series, k, h, (i + 1) as f64 / nf))
        .into_iter()
        .collect()
}
