//! Dense complex matrices, LU with partial pivoting and 1-norm condition
//! estimation.
//!
//! Matrices are row-major. Everything here is deterministic: reductions run in
//! a fixed index order so results do not depend on scheduling.

use std::fmt::Write as _;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix data of length {} does not fit {rows}×{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from its columns (all of equal length).
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (r, v) in col.iter().enumerate() {
                m.data[r * cols + c] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self.data[r * self.cols + c]).collect()
    }

    pub fn set_column(&mut self, c: usize, col: &[C64]) {
        for (r, v) in col.iter().enumerate() {
            self.data[r * self.cols + c] = *v;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape());
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape());
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let orow = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols, "matvec length mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.data[r * self.cols + c].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let m = DMatrix::from_row_slice(self.rows, self.cols, &self.data);
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Numerical rank: number of singular values above `rel · σ₁`.
    pub fn numerical_rank(&self, rel: f64) -> usize {
        let sv = self.singular_values();
        match sv.first() {
            Some(&s1) if s1 > 0.0 => sv.iter().filter(|&&s| s > rel * s1).count(),
            _ => 0,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        Lu::factor(self)?.inverse()
    }

    /// Row-major CSV, one matrix row per line, `re,im` pairs in scientific notation.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for r in 0..self.rows {
            for (c, z) in self.row(r).iter().enumerate() {
                if c > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{:.17e},{:.17e}", z.re, z.im);
            }
            s.push('\n');
        }
        s
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// LU factorization `P A = L U` with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
    norm1: f64,
    singular: bool,
}

impl Lu {
    pub fn factor(a: &CMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::invalid(format!("LU needs a square matrix, got {}×{}", a.rows, a.cols)));
        }
        let n = a.rows;
        let norm1 = a.norm1();
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].norm();
            for r in k + 1..n {
                let v = lu[r * n + k].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let krow = &head[k * n..(k + 1) * n];
            for r in 0..(n - k - 1) {
                let row = &mut tail[r * n..(r + 1) * n];
                let l = row[k] / pivot;
                row[k] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in k + 1..n {
                    row[c] -= l * krow[c];
                }
            }
        }
        Ok(Self { n, lu, perm, norm1, singular })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let row = &self.lu[r * n..r * n + r];
            let s: C64 = row.iter().zip(&x[..r]).map(|(l, v)| l * v).sum();
            x[r] -= s;
        }
        for r in (0..n).rev() {
            let row = &self.lu[r * n..(r + 1) * n];
            let s: C64 = row[r + 1..].iter().zip(&x[r + 1..]).map(|(u, v)| u * v).sum();
            x[r] = (x[r] - s) / row[r];
        }
        x
    }

    /// Solves `Aᴴ x = b`.
    pub fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        // Aᴴ = Uᴴ Lᴴ P, so solve Uᴴ y = b, Lᴴ z = y, x = Pᵀ z.
        let mut y = b.to_vec();
        for r in 0..n {
            let mut s = y[r];
            for k in 0..r {
                s -= self.lu[k * n + r].conj() * y[k];
            }
            y[r] = s / self.lu[r * n + r].conj();
        }
        for r in (0..n).rev() {
            let mut s = y[r];
            for k in r + 1..n {
                s -= self.lu[k * n + r].conj() * y[k];
            }
            y[r] = s;
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    /// Solves for every column of `b`.
    pub fn solve_matrix(&self, b: &CMatrix) -> CMatrix {
        let cols: Vec<Vec<C64>> = (0..b.cols()).map(|c| self.solve(&b.column(c))).collect();
        CMatrix::from_columns(self.n, &cols)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        if self.singular {
            return Err(Error::SingularOperator { condition: f64::INFINITY });
        }
        Ok(self.solve_matrix(&CMatrix::identity(self.n)))
    }

    /// Estimate of `κ₁(A) = ‖A‖₁‖A⁻¹‖₁` (Hager–Higham power iteration on
    /// the LU factors). Infinite for an exactly singular factorization.
    pub fn condition_estimate(&self) -> f64 {
        if self.singular {
            return f64::INFINITY;
        }
        let n = self.n;
        if n == 0 {
            return 0.0;
        }
        let l1 = |v: &[C64]| v.iter().map(|z| z.norm()).sum::<f64>();
        let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0_f64;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            let ny = l1(&y);
            if !ny.is_finite() {
                return f64::INFINITY;
            }
            if ny <= est {
                break;
            }
            est = ny;
            let xi: Vec<C64> = y
                .iter()
                .map(|z| if z.norm() == 0.0 { C64::new(1.0, 0.0) } else { z / z.norm() })
                .collect();
            let z = self.solve_adjoint(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x = vec![C64::new(0.0, 0.0); n];
            x[j] = C64::new(1.0, 0.0);
        }
        // Alternating-sign probe catches cases the power iteration misses.
        let alt: Vec<C64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                C64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
            })
            .collect();
        let alt_est = 2.0 * l1(&self.solve(&alt)) / (3.0 * n as f64);
        let inv_norm = est.max(alt_est);
        if !inv_norm.is_finite() {
            return f64::INFINITY;
        }
        self.norm1 * inv_norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn test_matrix(n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |r, col| {
            let d = if r == col { 4.0 } else { 0.0 };
            c(d + ((r * 7 + col * 3) % 5) as f64 * 0.3, ((r + 2 * col) % 3) as f64 * 0.2 - 0.2)
        })
    }

    #[test]
    fn lu_solves_and_inverts() {
        let a = test_matrix(7);
        let lu = Lu::factor(&a).unwrap();
        let b: Vec<C64> = (0..7).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let x = lu.solve(&b);
        let r = a.mul_vec(&x);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
        let inv = lu.inverse().unwrap();
        let id = a.matmul(&inv).sub(&CMatrix::identity(7));
        assert!(id.max_abs() < 1e-12);
    }

    #[test]
    fn adjoint_solve() {
        let a = test_matrix(6);
        let lu = Lu::factor(&a).unwrap();
        let b: Vec<C64> = (0..6).map(|i| c(1.0, i as f64)).collect();
        let x = lu.solve_adjoint(&b);
        let r = a.adjoint().mul_vec(&x);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn condition_estimate_is_close_for_diagonal() {
        let mut a = CMatrix::identity(5);
        a[(3, 3)] = c(1e-6, 0.0);
        let k = Lu::factor(&a).unwrap().condition_estimate();
        assert!((k - 1e6).abs() / 1e6 < 1e-9);
    }

    #[test]
    fn rank_one_is_singular() {
        let a = CMatrix::from_fn(4, 4, |_, _| c(0.25, 0.0));
        let lu = Lu::factor(&a).unwrap();
        assert!(lu.condition_estimate() > 1e12);
    }

    #[test]
    fn numerical_rank_of_outer_product() {
        let u: Vec<C64> = (0..5).map(|i| c(i as f64 + 1.0, 0.5)).collect();
        let a = CMatrix::from_fn(5, 5, |r, col| u[r] * u[col].conj());
        assert_eq!(a.numerical_rank(1e-10), 1);
    }
}
