//! Smoothing kernels, the jackknife kernel `K*(x) = 2√2·K(√2·x) − K(x)` and
//! the constants `‖K*‖₂` and `Λ_K = ‖(K*)′‖₂ / ‖K*‖₂` that enter every
//! scaling sequence.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_pieces, Tolerance};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const DIFF_STEP: f64 = 1e-6;
const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Clone)]
enum Shape {
    Quartic,
    Epanechnikov,
    Custom { eval: RealFn, deriv: Option<RealFn> },
}

/// A symmetric kernel supported on `[-1, 1]` together with its derived constants.
#[derive(Clone)]
pub struct KernelSpec {
    name: String,
    shape: Shape,
    l2_norm_kstar: f64,
    lambda_k: f64,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("name", &self.name)
            .field("l2_norm_kstar", &self.l2_norm_kstar)
            .field("lambda_k", &self.lambda_k)
            .finish()
    }
}

fn quartic(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - x * x;
        15.0 / 16.0 * s * s
    }
}

fn quartic_deriv(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        -15.0 / 4.0 * x * (1.0 - x * x)
    }
}

fn epanechnikov(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        0.75 * (1.0 - x * x)
    }
}

fn epanechnikov_deriv(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        -1.5 * x
    }
}

/// Breakpoints where `K*` may fail to be smooth.
const PIECES: [f64; 5] = [-1.0, -std::f64::consts::FRAC_1_SQRT_2, 0.0, std::f64::consts::FRAC_1_SQRT_2, 1.0];

impl KernelSpec {
    /// The quartic (biweight) kernel `15/16·(1−x²)²`.
    pub fn quartic() -> Self {
        Self::builtin("quartic", Shape::Quartic)
    }

    /// The Epanechnikov kernel `3/4·(1−x²)`.
    pub fn epanechnikov() -> Self {
        Self::builtin("epanechnikov", Shape::Epanechnikov)
    }

    fn builtin(name: &str, shape: Shape) -> Self {
        let mut k = KernelSpec { name: name.to_string(), shape, l2_norm_kstar: 0.0, lambda_k: 0.0 };
        let (l2, lambda) = k
            .constants()
            .expect("built-in kernels integrate on polynomial pieces");
        k.l2_norm_kstar = l2;
        k.lambda_k = lambda;
        k
    }

    /// Looks up a built-in kernel by its configuration name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "quartic" | "biweight" => Ok(Self::quartic()),
            "epanechnikov" => Ok(Self::epanechnikov()),
            other => Err(Error::InvalidKernel(format!("unknown kernel '{other}'"))),
        }
    }

    /// A user-supplied kernel. `deriv`, if given, must be the exact derivative
    /// of `eval`; otherwise `(K*)′` is approximated by central differences.
    ///
    /// Rejects kernels that are asymmetric, leak outside `[-1, 1]` or do not
    /// integrate to one.
    pub fn custom<F>(name: &str, eval: F, deriv: Option<RealFn>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let eval: RealFn = Arc::new(eval);
        for i in 0..=200 {
            let x = i as f64 / 200.0;
            let (a, b) = (eval(x), eval(-x));
            if !a.is_finite() || (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                return Err(Error::InvalidKernel(format!("{name}: not symmetric at x = {x}")));
            }
            let outside = 1.0 + x;
            if eval(outside) != 0.0 || eval(-outside) != 0.0 {
                return Err(Error::InvalidKernel(format!("{name}: nonzero outside [-1, 1]")));
            }
        }
        let mass = integrate_pieces(|x| eval(x), &PIECES, Tolerance::default())?;
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidKernel(format!("{name}: integrates to {mass}, not 1")));
        }
        let mut k = KernelSpec {
            name: name.to_string(),
            shape: Shape::Custom { eval, deriv },
            l2_norm_kstar: 0.0,
            lambda_k: 0.0,
        };
        let (l2, lambda) = k.constants()?;
        k.l2_norm_kstar = l2;
        k.lambda_k = lambda;
        Ok(k)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Always 1: every kernel here is supported on `[-1, 1]`.
    pub fn support_radius(&self) -> f64 {
        1.0
    }

    /// `‖K*‖₂`.
    pub fn l2_norm_kstar(&self) -> f64 {
        self.l2_norm_kstar
    }

    /// `Λ_K = ‖(K*)′‖₂ / ‖K*‖₂`.
    pub fn lambda_k(&self) -> f64 {
        self.lambda_k
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Quartic => quartic(x),
            Shape::Epanechnikov => epanechnikov(x),
            Shape::Custom { eval, .. } => eval(x),
        }
    }

    /// `K′(x)`, analytic where known.
    pub fn deriv(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Quartic => quartic_deriv(x),
            Shape::Epanechnikov => epanechnikov_deriv(x),
            Shape::Custom { deriv: Some(d), .. } => d(x),
            Shape::Custom { eval, deriv: None } => {
                (eval(x + DIFF_STEP) - eval(x - DIFF_STEP)) / (2.0 * DIFF_STEP)
            }
        }
    }

    /// `K*(x) = 2√2·K(√2·x) − K(x)`.
    #[inline]
    pub fn kstar(&self, x: f64) -> f64 {
        2.0 * SQRT_2 * self.eval(SQRT_2 * x) - self.eval(x)
    }

    /// `(K*)′(x) = 4·K′(√2·x) − K′(x)`.
    pub fn kstar_deriv(&self, x: f64) -> f64 {
        4.0 * self.deriv(SQRT_2 * x) - self.deriv(x)
    }

    /// Coefficients `c_m` with `K(u) = Σ c_m u^m` on `|u| ≤ 1`, for
    /// polynomial kernels.
    pub fn polynomial(&self) -> Option<&'static [f64]> {
        match self.shape {
            Shape::Quartic => Some(&[15.0 / 16.0, 0.0, -30.0 / 16.0, 0.0, 15.0 / 16.0]),
            Shape::Epanechnikov => Some(&[0.75, 0.0, -0.75]),
            Shape::Custom { .. } => None,
        }
    }

    fn constants(&self) -> Result<(f64, f64)> {
        kernel_constants(|x| self.kstar(x), |x| self.kstar_deriv(x))
    }
}

/// `K*(x)` for kernel `k`; zero for `|x| ≥ 1`.
pub fn kstar_eval(k: &KernelSpec, x: f64) -> f64 {
    k.kstar(x)
}

/// `(‖K*‖₂, Λ_K)` from `K*` and its derivative by adaptive quadrature.
pub fn kernel_constants<F, G>(kstar: F, kstar_deriv: G) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let tol = Tolerance { abs: 1e-12, rel: 1e-10 };
    let l2sq = integrate_pieces(|x| kstar(x).powi(2), &PIECES, tol)?;
    let d2sq = integrate_pieces(|x| kstar_deriv(x).powi(2), &PIECES, tol)?;
    if !(l2sq > 0.0 && d2sq > 0.0) {
        return Err(Error::InvalidKernel("degenerate K*".into()));
    }
    let l2 = l2sq.sqrt();
    Ok((l2, d2sq.sqrt() / l2))
}

/// `(‖K*‖₂, Λ_K)` for a kernel given only by its values; `(K*)′` is taken by
/// central differences with step 1e-6.
pub fn kernel_constants_numeric<F>(k_eval: F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let kstar = |x: f64| 2.0 * SQRT_2 * k_eval(SQRT_2 * x) - k_eval(x);
    kernel_constants(kstar, |x| (kstar(x + DIFF_STEP) - kstar(x - DIFF_STEP)) / (2.0 * DIFF_STEP))
}
