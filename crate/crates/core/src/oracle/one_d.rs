//! 1D operators `S⁽ⁱ⁾ = cI + conv(v)` and their ρ-function, solved densely
//! with nalgebra as a cross-check independent of the crate's own LU.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec};
use crate::kernel::{Profile, SeparableFactor};
use crate::linalg::CMatrix;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// `(S f)_a = c·f_a + h·Σ v[a − a′ + n − 1]·f_{a′}` on `n` midpoints of `(0, ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1D {
    pub omega: f64,
    pub n: usize,
    pub c: f64,
    /// Samples `v((a − a′)h)` for `a − a′ ∈ [−(n−1), n−1]`.
    pub v: Vec<f64>,
}

impl Kernel1D {
    pub fn new(omega: f64, n: usize, c: f64, v: Vec<f64>) -> Result<Self> {
        if n == 0 || !(omega > 0.0) {
            return Err(Error::invalid("1D kernel needs n ≥ 1 and ω > 0"));
        }
        if v.len() != 2 * n - 1 {
            return Err(Error::invalid(format!("1D kernel needs {} samples, got {}", 2 * n - 1, v.len())));
        }
        Ok(Self { omega, n, c, v })
    }

    /// The factor of a separable kernel along `axis`: `v = V′` at lattice points.
    pub fn from_factor(factor: &SeparableFactor, grid: &GridSpec, axis: Axis) -> Result<Self> {
        let n = grid.n(axis);
        let h = grid.h(axis);
        let v = (0..2 * n - 1).map(|j| factor.profile.derivative((j as f64 - (n as f64 - 1.0)) * h)).collect();
        Self::new(grid.omega(axis), n, factor.c, v)
    }

    pub fn h(&self) -> f64 {
        self.omega / self.n as f64
    }

    pub fn midpoint(&self, a: usize) -> f64 {
        (a as f64 + 0.5) * self.h()
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        let (n, h) = (self.n, self.h());
        DMatrix::from_fn(n, n, |a, ap| {
            let diag = if a == ap { self.c } else { 0.0 };
            C64::new(diag + h * self.v[a + n - 1 - ap], 0.0)
        })
    }

    /// Same matrix through the crate's own dense type.
    pub fn cmatrix(&self) -> CMatrix {
        let m = self.matrix();
        CMatrix::from_fn(self.n, self.n, |r, c| m[(r, c)])
    }
}

/// `ρ⁽ⁱ⁾(λ, μ) = h·Σ conj(e^{iμx})·(S⁻¹e^{iλx})(x)`, the 1D analogue of
/// [`crate::inversion::rho_direct`].
pub fn rho_1d(k: &Kernel1D, lambda: C64, mu: C64) -> Result<C64> {
    let lu = k.matrix().lu();
    let rhs = DVector::from_fn(k.n, |a, _| (I * lambda * k.midpoint(a)).exp());
    let u = lu.solve(&rhs).ok_or(Error::SingularOperator { condition: f64::INFINITY })?;
    if u.iter().any(|z| !z.is_finite()) {
        return Err(Error::SingularOperator { condition: f64::INFINITY });
    }
    let h = k.h();
    Ok(h * (0..k.n).map(|a| (I * mu * k.midpoint(a)).exp().conj() * u[a]).sum::<C64>())
}
