//! Kernel samples on the half-step difference lattice.
//!
//! Axis `i` is sampled at `q·h_i/2` for `q ∈ [−(2n_i − 1), 2n_i − 1]`. Even `q`
//! are the midpoint differences `p·h_i` (`p = q/2`); odd `q` are the signed
//! midpoints `±(a + ½)·h_i`. Index 0 of the offset range is zero difference.

use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec};
use crate::kernel::model::{sgn, KernelModel};

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSamples {
    grid: GridSpec,
    c: f64,
    sigma: Vec<f64>,
    sigma1: Vec<f64>,
    sigma2: Vec<f64>,
    v: Vec<f64>,
    alpha: Vec<f64>,
    alpha_d: Vec<f64>,
    beta: Vec<f64>,
    beta_d: Vec<f64>,
}

/// Which lattice array to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleArray {
    S,
    Sigma,
    Sigma1,
    Sigma2,
    V,
}

fn half_len(n: usize) -> usize {
    4 * n - 1
}

fn finite(what: &'static str, x1: f64, x2: f64, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::KernelEvaluation { what, x1, x2 })
    }
}

/// Samples every evaluator of `model` on the difference lattice of `grid`.
pub fn sample_kernel(model: &KernelModel, grid: &GridSpec) -> Result<KernelSamples> {
    let (n1, n2) = (grid.n1(), grid.n2());
    let (l1, l2) = (half_len(n1), half_len(n2));
    let (hh1, hh2) = (grid.h1() / 2.0, grid.h2() / 2.0);
    let off1 = 2 * n1 as i64 - 1;
    let off2 = 2 * n2 as i64 - 1;
    let coord1 = |i: usize| (i as i64 - off1) as f64 * hh1;
    let coord2 = |j: usize| (j as i64 - off2) as f64 * hh2;

    let mut sigma = Vec::with_capacity(l1 * l2);
    let mut sigma1 = Vec::with_capacity(l1 * l2);
    let mut sigma2 = Vec::with_capacity(l1 * l2);
    for j in 0..l2 {
        let x2 = coord2(j);
        for i in 0..l1 {
            let x1 = coord1(i);
            sigma.push(finite("sigma", x1, x2, model.sigma.value(x1, x2))?);
            sigma1.push(finite("sigma_x1", x1, x2, model.sigma.d1(x1, x2))?);
            sigma2.push(finite("sigma_x2", x1, x2, model.sigma.d2(x1, x2))?);
        }
    }
    let (m1, m2) = (2 * n1 - 1, 2 * n2 - 1);
    let mut v = Vec::with_capacity(m1 * m2);
    for p2 in 0..m2 {
        let x2 = (p2 as f64 - (n2 as f64 - 1.0)) * grid.h2();
        for p1 in 0..m1 {
            let x1 = (p1 as f64 - (n1 as f64 - 1.0)) * grid.h1();
            v.push(finite("v", x1, x2, model.sigma.d12(x1, x2))?);
        }
    }
    let mut alpha = Vec::with_capacity(l2);
    let mut alpha_d = Vec::with_capacity(l2);
    for j in 0..l2 {
        let y = coord2(j);
        alpha.push(finite("alpha", 0.0, y, model.alpha.value(y))?);
        alpha_d.push(finite("alpha'", 0.0, y, model.alpha.derivative(y))?);
    }
    let mut beta = Vec::with_capacity(l1);
    let mut beta_d = Vec::with_capacity(l1);
    for i in 0..l1 {
        let y = coord1(i);
        beta.push(finite("beta", y, 0.0, model.beta.value(y))?);
        beta_d.push(finite("beta'", y, 0.0, model.beta.derivative(y))?);
    }
    if !model.c.is_finite() {
        return Err(Error::KernelEvaluation { what: "c", x1: 0.0, x2: 0.0 });
    }
    Ok(KernelSamples { grid: *grid, c: model.c, sigma, sigma1, sigma2, v, alpha, alpha_d, beta, beta_d })
}

impl KernelSamples {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    #[inline]
    fn hidx(&self, q1: i64, q2: i64) -> usize {
        let l1 = half_len(self.grid.n1()) as i64;
        let i = q1 + 2 * self.grid.n1() as i64 - 1;
        let j = q2 + 2 * self.grid.n2() as i64 - 1;
        debug_assert!(i >= 0 && i < l1 && j >= 0, "half-step index out of range");
        (j * l1 + i) as usize
    }

    #[inline]
    fn idx1(&self, q: i64) -> usize {
        (q + 2 * self.grid.n1() as i64 - 1) as usize
    }

    #[inline]
    fn idx2(&self, q: i64) -> usize {
        (q + 2 * self.grid.n2() as i64 - 1) as usize
    }

    /// σ at `(q₁h₁/2, q₂h₂/2)`.
    #[inline]
    pub fn sigma_h(&self, q1: i64, q2: i64) -> f64 {
        self.sigma[self.hidx(q1, q2)]
    }

    #[inline]
    pub fn sigma1_h(&self, q1: i64, q2: i64) -> f64 {
        self.sigma1[self.hidx(q1, q2)]
    }

    #[inline]
    pub fn sigma2_h(&self, q1: i64, q2: i64) -> f64 {
        self.sigma2[self.hidx(q1, q2)]
    }

    #[inline]
    pub fn alpha_h(&self, q2: i64) -> f64 {
        self.alpha[self.idx2(q2)]
    }

    #[inline]
    pub fn alpha_d_h(&self, q2: i64) -> f64 {
        self.alpha_d[self.idx2(q2)]
    }

    #[inline]
    pub fn beta_h(&self, q1: i64) -> f64 {
        self.beta[self.idx1(q1)]
    }

    #[inline]
    pub fn beta_d_h(&self, q1: i64) -> f64 {
        self.beta_d[self.idx1(q1)]
    }

    /// The full kernel `s` at `(q₁h₁/2, q₂h₂/2)`, sgn factors expanded exactly.
    #[inline]
    pub fn s_h(&self, q1: i64, q2: i64) -> f64 {
        let (g1, g2) = (sgn(q1 as f64), sgn(q2 as f64));
        0.25 * self.c * g1 * g2 + 0.5 * g1 * self.alpha_h(q2) + 0.5 * g2 * self.beta_h(q1) + self.sigma_h(q1, q2)
    }

    /// `v = σ_{x₁x₂}` at the lattice offset `(p₁h₁, p₂h₂)`.
    #[inline]
    pub fn v(&self, p1: i64, p2: i64) -> f64 {
        let m1 = 2 * self.grid.n1() as i64 - 1;
        let i = p1 + self.grid.n1() as i64 - 1;
        let j = p2 + self.grid.n2() as i64 - 1;
        self.v[(j * m1 + i) as usize]
    }

    /// Integer-lattice view, shape `(2n₁−1)×(2n₂−1)`, x₁-fastest, centre at
    /// zero difference.
    pub fn lattice_array(&self, which: SampleArray) -> Vec<f64> {
        let (n1, n2) = (self.grid.n1() as i64, self.grid.n2() as i64);
        let mut out = Vec::with_capacity(((2 * n1 - 1) * (2 * n2 - 1)) as usize);
        for p2 in -(n2 - 1)..n2 {
            for p1 in -(n1 - 1)..n1 {
                out.push(match which {
                    SampleArray::S => self.s_h(2 * p1, 2 * p2),
                    SampleArray::Sigma => self.sigma_h(2 * p1, 2 * p2),
                    SampleArray::Sigma1 => self.sigma1_h(2 * p1, 2 * p2),
                    SampleArray::Sigma2 => self.sigma2_h(2 * p1, 2 * p2),
                    SampleArray::V => self.v(p1, p2),
                });
            }
        }
        out
    }

    /// Array-level normalization of σ: subtract the midpoint means over the
    /// negative-argument quadrants and add back the total mean. `c`, α, β and
    /// `v` are left untouched.
    pub fn normalized(&self) -> Self {
        let (n1, n2) = (self.grid.n1() as i64, self.grid.n2() as i64);
        let q1s: Vec<i64> = (-(2 * n1 - 1)..2 * n1).collect();
        let q2s: Vec<i64> = (-(2 * n2 - 1)..2 * n2).collect();
        let neg1: Vec<i64> = (0..n1).map(|a| -(2 * a + 1)).collect();
        let neg2: Vec<i64> = (0..n2).map(|b| -(2 * b + 1)).collect();
        let mean = |vals: &mut dyn Iterator<Item = f64>, n: usize| vals.sum::<f64>() / n as f64;

        let a_bar: Vec<f64> =
            q2s.iter().map(|&q2| mean(&mut neg1.iter().map(|&t| self.sigma_h(t, q2)), neg1.len())).collect();
        let b_bar: Vec<f64> =
            q1s.iter().map(|&q1| mean(&mut neg2.iter().map(|&t| self.sigma_h(q1, t)), neg2.len())).collect();
        let a_bar_d: Vec<f64> =
            q2s.iter().map(|&q2| mean(&mut neg1.iter().map(|&t| self.sigma2_h(t, q2)), neg1.len())).collect();
        let b_bar_d: Vec<f64> =
            q1s.iter().map(|&q1| mean(&mut neg2.iter().map(|&t| self.sigma1_h(q1, t)), neg2.len())).collect();
        let mut total = 0.0;
        for &t2 in &neg2 {
            for &t1 in &neg1 {
                total += self.sigma_h(t1, t2);
            }
        }
        let total = total / (neg1.len() * neg2.len()) as f64;

        let mut out = self.clone();
        for (j, &q2) in q2s.iter().enumerate() {
            for (i, &q1) in q1s.iter().enumerate() {
                let k = self.hidx(q1, q2);
                out.sigma[k] = self.sigma[k] - a_bar[j] - b_bar[i] + total;
                out.sigma1[k] = self.sigma1[k] - b_bar_d[i];
                out.sigma2[k] = self.sigma2[k] - a_bar_d[j];
            }
        }
        out
    }

    /// Largest weighted quadrant sum `|h₁ Σ_a σ(−t₁⁽ᵃ⁾, y)|`, `|h₂ Σ_b σ(y, −t₂⁽ᵇ⁾)|`
    /// over all lattice values `y`; zero (to roundoff) after normalization.
    pub fn normalization_defect(&self) -> f64 {
        let (n1, n2) = (self.grid.n1() as i64, self.grid.n2() as i64);
        let (h1, h2) = (self.grid.h1(), self.grid.h2());
        let mut worst = 0.0_f64;
        for q2 in -(2 * n2 - 1)..2 * n2 {
            let s: f64 = (0..n1).map(|a| self.sigma_h(-(2 * a + 1), q2)).sum();
            worst = worst.max((h1 * s).abs());
        }
        for q1 in -(2 * n1 - 1)..2 * n1 {
            let s: f64 = (0..n2).map(|b| self.sigma_h(q1, -(2 * b + 1))).sum();
            worst = worst.max((h2 * s).abs());
        }
        worst
    }

    /// Number of real numbers that determine `S` on this grid: the
    /// difference-lattice samples of the kernel plus `c`.
    pub fn information_count(&self) -> usize {
        (2 * self.grid.n1() - 1) * (2 * self.grid.n2() - 1) + 1
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let pairs = [
            (&self.sigma, &other.sigma),
            (&self.sigma1, &other.sigma1),
            (&self.sigma2, &other.sigma2),
            (&self.v, &other.v),
            (&self.alpha, &other.alpha),
            (&self.alpha_d, &other.alpha_d),
            (&self.beta, &other.beta),
            (&self.beta_d, &other.beta_d),
        ];
        pairs
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold((self.c - other.c).abs(), f64::max)
    }

    /// Midpoint `x_i^(a)` as a half-step index.
    #[inline]
    pub fn mid(a: usize) -> i64 {
        2 * a as i64 + 1
    }

    pub fn axis_len(&self, axis: Axis) -> usize {
        half_len(self.grid.n(axis))
    }
}
