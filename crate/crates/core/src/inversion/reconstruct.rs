//! Reconstruction of `S⁻¹` from ρ on the complete DFT frequency set, and the
//! difference-kernel structure check.
//!
//! With `E` the matrix whose columns are `e^{iλx}` at the midpoints,
//! `Eᴴ E = n₁n₂·I` for the DFT frequencies `λ ∈ {2πm/ω}`, `m ∈ [−n/2, n/2)`.
//! Since `R[p, q] = ρ(λ_q, μ_p) = h₁h₂·(Eᴴ S⁻¹ E)[p, q]`, the inverse is
//! `T = E R Eᴴ / (ω₁ω₂·n₁n₂)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec};
use crate::inversion::rho::{exp_grid, real_lambda, rho_direct_table, Lambda};
use crate::inversion::solve::Solver;
use crate::linalg::CMatrix;
use crate::C64;

/// DFT-compatible frequencies, `m₂` outer and `m₁` inner.
pub fn dft_frequencies(grid: &GridSpec) -> Vec<[f64; 2]> {
    let range = |axis: Axis| {
        let n = grid.n(axis) as i64;
        (-(n / 2)..n - n / 2).map(move |m| 2.0 * PI * m as f64 / grid.omega(axis))
    };
    let mut out = Vec::with_capacity(grid.len());
    for l2 in range(Axis::Two) {
        for l1 in range(Axis::One) {
            out.push([l1, l2]);
        }
    }
    out
}

/// ρ on the full DFT set: `values[(p, q)] = ρ(λ_q, μ_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoTable {
    grid: GridSpec,
    freqs: Vec<[f64; 2]>,
    values: CMatrix,
}

impl RhoTable {
    pub fn new(grid: GridSpec, values: CMatrix) -> Result<Self> {
        let n = grid.len();
        if values.shape() != (n, n) {
            return Err(Error::invalid(format!(
                "ρ-table is {}×{}, the complete frequency set needs {n}×{n}",
                values.rows(),
                values.cols()
            )));
        }
        Ok(Self { grid, freqs: dft_frequencies(&grid), values })
    }

    /// Fills the table with direct ρ values.
    pub fn from_direct(solver: &Solver) -> Result<Self> {
        let grid = *solver.operator().grid();
        let lambdas: Vec<Lambda> = dft_frequencies(&grid).iter().map(|f| real_lambda(f[0], f[1])).collect();
        let values = rho_direct_table(solver, &lambdas, &lambdas)?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn frequencies(&self) -> &[[f64; 2]] {
        &self.freqs
    }

    pub fn values(&self) -> &CMatrix {
        &self.values
    }

    /// CSV rows `λ₁re, λ₁im, λ₂re, λ₂im, μ₁re, μ₁im, μ₂re, μ₂im, ρre, ρim`.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::with_capacity(self.freqs.len() * self.freqs.len());
        for (q, l) in self.freqs.iter().enumerate() {
            for (p, m) in self.freqs.iter().enumerate() {
                let r = self.values[(p, q)];
                rows.push(
                    [l[0], 0.0, l[1], 0.0, m[0], 0.0, m[1], 0.0, r.re, r.im].iter().map(|x| crate::export::sci(*x)).collect(),
                );
            }
        }
        rows
    }
}

/// `T = E R Eᴴ / (ω₁ω₂·n₁n₂)`.
pub fn inverse_from_rho(table: &RhoTable) -> Result<CMatrix> {
    let grid = table.grid;
    let n = grid.len();
    if table.values.shape() != (n, n) || table.freqs.len() != n {
        return Err(Error::invalid("ρ-table does not cover the complete frequency set"));
    }
    let cols: Vec<Vec<C64>> = table.freqs.iter().map(|f| exp_grid(&grid, real_lambda(f[0], f[1]))).collect();
    let e = CMatrix::from_columns(n, &cols);
    let scale = 1.0 / (grid.omega1() * grid.omega2() * n as f64);
    Ok(e.matmul(&table.values).matmul(&e.adjoint()).scale(C64::new(scale, 0.0)))
}

/// Fit of a dense matrix by a difference kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    /// `‖Q − fit‖_F / ‖Q‖_F`, the fit averaging each diagonal-offset class.
    pub residual: f64,
    /// Largest deviation of an entry from its class mean, relative to `max|Q|`.
    pub max_class_deviation: f64,
    /// Number of offset classes `(2n₁−1)(2n₂−1)`.
    pub classes: usize,
}

/// Best `cI + Toeplitz₁ + Toeplitz₂ + BTTB` fit of `Q`. All four parts are
/// constant on the classes of equal offset `(a − a′, b − b′)`, so the
/// least-squares fit is the per-class mean.
pub fn check_difference_kernel(q: &CMatrix, grid: &GridSpec) -> Result<StructureReport> {
    let n = grid.len();
    if q.rows() != q.cols() {
        return Err(Error::invalid(format!("structure check needs a square matrix, got {}×{}", q.rows(), q.cols())));
    }
    if q.rows() != n {
        return Err(Error::invalid(format!("matrix has {} rows, grid has {n} points", q.rows())));
    }
    let (n1, n2) = (grid.n1() as i64, grid.n2() as i64);
    let m1 = (2 * n1 - 1) as usize;
    let classes = m1 * (2 * n2 - 1) as usize;
    let class = |r: usize, c: usize| {
        let (a, b) = grid.coords(r);
        let (ap, bp) = grid.coords(c);
        ((b as i64 - bp as i64 + n2 - 1) as usize) * m1 + (a as i64 - ap as i64 + n1 - 1) as usize
    };
    let mut sum = vec![C64::new(0.0, 0.0); classes];
    let mut count = vec![0usize; classes];
    for r in 0..n {
        for c in 0..n {
            let k = class(r, c);
            sum[k] += q[(r, c)];
            count[k] += 1;
        }
    }
    let mean: Vec<C64> = sum.iter().zip(&count).map(|(s, &c)| if c > 0 { s / c as f64 } else { *s }).collect();
    let (mut num, mut dev) = (0.0, 0.0_f64);
    for r in 0..n {
        for c in 0..n {
            let d = (q[(r, c)] - mean[class(r, c)]).norm();
            num += d * d;
            dev = dev.max(d);
        }
    }
    let den = q.frobenius_norm();
    let scale = q.max_abs();
    Ok(StructureReport {
        residual: if den > 0.0 { num.sqrt() / den } else { num.sqrt() },
        max_class_deviation: if scale > 0.0 { dev / scale } else { dev },
        classes,
    })
}
