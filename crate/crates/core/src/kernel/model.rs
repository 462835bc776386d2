//! The structured kernel
//!
//! ```text
//! s(x) = (c/4)·sgn(x₁)·sgn(x₂) + ½·sgn(x₁)·α(x₂) + ½·sgn(x₂)·β(x₁) + σ(x)
//! ```
//!
//! with `sgn(0) = 0`. Its mixed distributional derivative is
//! `c·δ(x) + δ(x₁)α′(x₂) + δ(x₂)β′(x₁) + σ_{x₁x₂}(x)`, which is what turns
//! `S = ∂₁∂₂∫ s(x − t)·dt` into identity-plus-convolutions.

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::grid::{Axis, GridSpec};

/// A one-variable profile with its derivative (used for α and β).
pub trait Profile: Send + Sync + Debug {
    fn value(&self, y: f64) -> f64;
    fn derivative(&self, y: f64) -> f64;
}

/// The smooth part σ with the partial derivatives the operators need.
pub trait Surface: Send + Sync + Debug {
    fn value(&self, x1: f64, x2: f64) -> f64;
    fn d1(&self, x1: f64, x2: f64) -> f64;
    fn d2(&self, x1: f64, x2: f64) -> f64;
    fn d12(&self, x1: f64, x2: f64) -> f64;
}

/// Builtin profiles, selectable from config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "profile", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    #[default]
    Zero,
    Const { value: f64 },
    Linear { slope: f64, #[serde(default)] offset: f64 },
    /// `amp·exp(rate·y)`
    Exp { amp: f64, rate: f64 },
    /// `amp·cos(freq·y)`
    Cos { amp: f64, freq: f64 },
    /// `amp·exp(−y²/(2·width²))`
    Gaussian { amp: f64, width: f64 },
    /// `Σ coeffs[k]·y^k`
    Poly { coeffs: Vec<f64> },
}

impl Profile for ProfileSpec {
    fn value(&self, y: f64) -> f64 {
        match self {
            ProfileSpec::Zero => 0.0,
            ProfileSpec::Const { value } => *value,
            ProfileSpec::Linear { slope, offset } => offset + slope * y,
            ProfileSpec::Exp { amp, rate } => amp * (rate * y).exp(),
            ProfileSpec::Cos { amp, freq } => amp * (freq * y).cos(),
            ProfileSpec::Gaussian { amp, width } => amp * (-y * y / (2.0 * width * width)).exp(),
            ProfileSpec::Poly { coeffs } => horner(coeffs, y),
        }
    }

    fn derivative(&self, y: f64) -> f64 {
        match self {
            ProfileSpec::Zero | ProfileSpec::Const { .. } => 0.0,
            ProfileSpec::Linear { slope, .. } => *slope,
            ProfileSpec::Exp { amp, rate } => amp * rate * (rate * y).exp(),
            ProfileSpec::Cos { amp, freq } => -amp * freq * (freq * y).sin(),
            ProfileSpec::Gaussian { amp, width } => {
                let w2 = width * width;
                -amp * y / w2 * (-y * y / (2.0 * w2)).exp()
            }
            ProfileSpec::Poly { coeffs } => {
                let d: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a).collect();
                horner(&d, y)
            }
        }
    }
}

fn horner(coeffs: &[f64], y: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, a| acc * y + a)
}

/// `factor · inner(y)`.
#[derive(Debug, Clone)]
pub struct ScaledProfile {
    pub factor: f64,
    pub inner: ProfileSpec,
}

impl Profile for ScaledProfile {
    fn value(&self, y: f64) -> f64 {
        self.factor * self.inner.value(y)
    }

    fn derivative(&self, y: f64) -> f64 {
        self.factor * self.inner.derivative(y)
    }
}

/// Builtin smooth parts σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SurfaceSpec {
    Zero,
    /// `amp·exp(b₁x₁ + b₂x₂)`
    Exp { amp: f64, b1: f64, b2: f64 },
    /// `Σ coeffs[i][j]·x₁^i·x₂^j`
    Poly { coeffs: Vec<Vec<f64>> },
    /// `amp·exp(−x₁²/(2s₁²) − x₂²/(2s₂²))`
    Gaussian { amp: f64, s1: f64, s2: f64 },
    /// `p₁(x₁)·p₂(x₂)`
    Product { axis1: ProfileSpec, axis2: ProfileSpec },
}

impl SurfaceSpec {
    fn poly_eval(coeffs: &[Vec<f64>], x1: f64, x2: f64, d1: usize, d2: usize) -> f64 {
        let mut acc = 0.0;
        for (i, row) in coeffs.iter().enumerate() {
            if i < d1 {
                continue;
            }
            let f1 = falling(i, d1) * x1.powi((i - d1) as i32);
            for (j, a) in row.iter().enumerate() {
                if j < d2 {
                    continue;
                }
                acc += a * f1 * falling(j, d2) * x2.powi((j - d2) as i32);
            }
        }
        acc
    }
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

impl Surface for SurfaceSpec {
    fn value(&self, x1: f64, x2: f64) -> f64 {
        match self {
            SurfaceSpec::Zero => 0.0,
            SurfaceSpec::Exp { amp, b1, b2 } => amp * (b1 * x1 + b2 * x2).exp(),
            SurfaceSpec::Poly { coeffs } => Self::poly_eval(coeffs, x1, x2, 0, 0),
            SurfaceSpec::Gaussian { amp, s1, s2 } => {
                amp * (-x1 * x1 / (2.0 * s1 * s1) - x2 * x2 / (2.0 * s2 * s2)).exp()
            }
            SurfaceSpec::Product { axis1, axis2 } => axis1.value(x1) * axis2.value(x2),
        }
    }

    fn d1(&self, x1: f64, x2: f64) -> f64 {
        match self {
            SurfaceSpec::Zero => 0.0,
            SurfaceSpec::Exp { b1, .. } => b1 * self.value(x1, x2),
            SurfaceSpec::Poly { coeffs } => Self::poly_eval(coeffs, x1, x2, 1, 0),
            SurfaceSpec::Gaussian { s1, .. } => -x1 / (s1 * s1) * self.value(x1, x2),
            SurfaceSpec::Product { axis1, axis2 } => axis1.derivative(x1) * axis2.value(x2),
        }
    }

    fn d2(&self, x1: f64, x2: f64) -> f64 {
        match self {
            SurfaceSpec::Zero => 0.0,
            SurfaceSpec::Exp { b2, .. } => b2 * self.value(x1, x2),
            SurfaceSpec::Poly { coeffs } => Self::poly_eval(coeffs, x1, x2, 0, 1),
            SurfaceSpec::Gaussian { s2, .. } => -x2 / (s2 * s2) * self.value(x1, x2),
            SurfaceSpec::Product { axis1, axis2 } => axis1.value(x1) * axis2.derivative(x2),
        }
    }

    fn d12(&self, x1: f64, x2: f64) -> f64 {
        match self {
            SurfaceSpec::Zero => 0.0,
            SurfaceSpec::Exp { b1, b2, .. } => b1 * b2 * self.value(x1, x2),
            SurfaceSpec::Poly { coeffs } => Self::poly_eval(coeffs, x1, x2, 1, 1),
            SurfaceSpec::Gaussian { s1, s2, .. } => {
                x1 * x2 / (s1 * s1 * s2 * s2) * self.value(x1, x2)
            }
            SurfaceSpec::Product { axis1, axis2 } => axis1.derivative(x1) * axis2.derivative(x2),
        }
    }
}

/// σ re-centered so that its midpoint means over `t₁` at `(−t₁, x₂)` and over
/// `t₂` at `(x₁, −t₂)` vanish:
///
/// `σ̂(x) = σ(x) − mean_a σ(−t₁⁽ᵃ⁾, x₂) − mean_b σ(x₁, −t₂⁽ᵇ⁾) + mean_ab σ(−t⁽ᵃᵇ⁾)`.
///
/// Evaluator-level counterpart of [`crate::KernelSamples::normalized`]; the
/// means are taken over the grid midpoints so both routes agree exactly.
#[derive(Debug, Clone)]
pub struct NormalizedSurface {
    base: Arc<dyn Surface>,
    neg_t1: Vec<f64>,
    neg_t2: Vec<f64>,
    total_mean: f64,
}

impl NormalizedSurface {
    pub fn new(base: Arc<dyn Surface>, grid: &GridSpec) -> Self {
        let neg_t1: Vec<f64> = grid.midpoints(Axis::One).into_iter().map(|t| -t).collect();
        let neg_t2: Vec<f64> = grid.midpoints(Axis::Two).into_iter().map(|t| -t).collect();
        let mut total = 0.0;
        for &t2 in &neg_t2 {
            for &t1 in &neg_t1 {
                total += base.value(t1, t2);
            }
        }
        let total_mean = total / (neg_t1.len() * neg_t2.len()) as f64;
        Self { base, neg_t1, neg_t2, total_mean }
    }

    fn mean1(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.neg_t1.iter().map(|&t| f(t)).sum::<f64>() / self.neg_t1.len() as f64
    }

    fn mean2(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.neg_t2.iter().map(|&t| f(t)).sum::<f64>() / self.neg_t2.len() as f64
    }
}

impl Surface for NormalizedSurface {
    fn value(&self, x1: f64, x2: f64) -> f64 {
        self.base.value(x1, x2)
            - self.mean1(|t| self.base.value(t, x2))
            - self.mean2(|t| self.base.value(x1, t))
            + self.total_mean
    }

    fn d1(&self, x1: f64, x2: f64) -> f64 {
        self.base.d1(x1, x2) - self.mean2(|t| self.base.d1(x1, t))
    }

    fn d2(&self, x1: f64, x2: f64) -> f64 {
        self.base.d2(x1, x2) - self.mean1(|t| self.base.d2(t, x2))
    }

    fn d12(&self, x1: f64, x2: f64) -> f64 {
        self.base.d12(x1, x2)
    }
}

#[inline]
pub(crate) fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The kernel `s` in structured form; the single source of every operator's
/// integral kernel.
#[derive(Debug, Clone)]
pub struct KernelModel {
    pub c: f64,
    pub alpha: Arc<dyn Profile>,
    pub beta: Arc<dyn Profile>,
    pub sigma: Arc<dyn Surface>,
}

impl KernelModel {
    pub fn new(
        c: f64,
        alpha: impl Profile + 'static,
        beta: impl Profile + 'static,
        sigma: impl Surface + 'static,
    ) -> Self {
        Self { c, alpha: Arc::new(alpha), beta: Arc::new(beta), sigma: Arc::new(sigma) }
    }

    /// `c·I`: jump coefficient only.
    pub fn scalar(c: f64) -> Self {
        Self::new(c, ProfileSpec::Zero, ProfileSpec::Zero, SurfaceSpec::Zero)
    }

    /// `c = 1` with smooth part `σ`.
    pub fn with_sigma(c: f64, sigma: impl Surface + 'static) -> Self {
        Self::new(c, ProfileSpec::Zero, ProfileSpec::Zero, sigma)
    }

    /// Evaluates `s(x)` with `sgn(0) = 0`.
    pub fn s(&self, x1: f64, x2: f64) -> f64 {
        let (g1, g2) = (sgn(x1), sgn(x2));
        0.25 * self.c * g1 * g2
            + 0.5 * g1 * self.alpha.value(x2)
            + 0.5 * g2 * self.beta.value(x1)
            + self.sigma.value(x1, x2)
    }

    /// Same kernel with σ replaced by its grid-normalized version.
    pub fn normalized(&self, grid: &GridSpec) -> Self {
        Self {
            c: self.c,
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
            sigma: Arc::new(NormalizedSurface::new(self.sigma.clone(), grid)),
        }
    }
}
