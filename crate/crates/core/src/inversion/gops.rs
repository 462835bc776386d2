//! The operators `g_ik = [K₃ᵢ; K₁ᵢ][I 0] − Π̂_k S⁻¹ Πᵢ` and the relation
//! `g_ki = −U_k J_k g_ik* J_i U_i` that ties the two of them together.
//!
//! `U_i` reverses the grid index and conjugates; `J_i = i·[[0, −I], [I, 0]]`.
//! The adjoint `g*` is taken under the weighted line inner products, so for
//! `g: L²₂(0,ω_k) → L²₂(0,ω_i)` it is `(h_i/h_k)·gᴴ`.

use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec};
use crate::inversion::solve::Solver;
use crate::linalg::CMatrix;
use crate::operators::{k_matrix, KName, PiPair};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// Dense block of `g_ik`, acting `PairFn(k) → PairFn(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GMatrix {
    i: Axis,
    k: Axis,
    grid: GridSpec,
    m: CMatrix,
}

impl GMatrix {
    pub fn new(i: Axis, k: Axis, grid: GridSpec, m: CMatrix) -> Result<Self> {
        if i == k {
            return Err(Error::invalid("g_ik needs i ≠ k"));
        }
        let want = (2 * grid.n(i), 2 * grid.n(k));
        if m.shape() != want {
            return Err(Error::invalid(format!("g_{}{} must be {}×{}, got {}×{}", i.index(), k.index(), want.0, want.1, m.rows(), m.cols())));
        }
        if !m.is_finite() {
            return Err(Error::invalid("g block has non-finite entries"));
        }
        Ok(Self { i, k, grid, m })
    }

    pub fn i(&self) -> Axis {
        self.i
    }

    pub fn k(&self) -> Axis {
        self.k
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }
}

/// `g_ik` from a factored `S` and the two Π pairs (`pi_i` for axis `i`,
/// `pi_k` for axis `k`).
pub fn compute_g(i: Axis, k: Axis, solver: &Solver, pi_i: &PiPair, pi_k: &PiPair) -> Result<GMatrix> {
    if i == k {
        return Err(Error::invalid(format!("g_ik needs i ≠ k, got i = k = {}", i.index())));
    }
    if pi_i.k != i || pi_k.k != k {
        return Err(Error::invalid("Π pairs passed in the wrong order"));
    }
    let samples = solver.operator().samples();
    let grid = *samples.grid();
    let (ni, nk) = (grid.n(i), grid.n(k));
    let k3 = k_matrix(KName::K3(i), samples);
    let k1 = k_matrix(KName::K1(i), samples);
    let x = solver.solve_columns(&pi_i.pi_dense())?;
    let second = pi_k.pi_hat_dense().matmul(&x);
    let m = CMatrix::from_fn(2 * ni, 2 * nk, |r, c| {
        let first = if c >= nk {
            C64::new(0.0, 0.0)
        } else if r < ni {
            k3[(r, c)]
        } else {
            k1[(r - ni, c)]
        };
        first - second[(r, c)]
    });
    GMatrix::new(i, k, grid, m)
}

/// `U` on a stacked pair: reverse each component and conjugate.
pub fn u_apply(v: &[C64]) -> Vec<C64> {
    let n = v.len() / 2;
    let mut out = Vec::with_capacity(v.len());
    out.extend(v[..n].iter().rev().map(|z| z.conj()));
    out.extend(v[n..].iter().rev().map(|z| z.conj()));
    out
}

/// `J = i·[[0, −I], [I, 0]]` on a stacked pair.
pub fn j_apply(v: &[C64]) -> Vec<C64> {
    let n = v.len() / 2;
    let mut out = Vec::with_capacity(v.len());
    out.extend(v[n..].iter().map(|z| -I * z));
    out.extend(v[..n].iter().map(|z| I * z));
    out
}

/// Dense `J` of size `2n`.
pub fn j_matrix(n: usize) -> CMatrix {
    CMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if r < n && c == r + n {
            -I
        } else if r >= n && c + n == r {
            I
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Index reversal within each component (the linear part of `U`).
pub fn r_matrix(n: usize) -> CMatrix {
    CMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let same_block = (r < n) == (c < n);
        if same_block && r % n + c % n == n - 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `−U_k J_k g* J_i U_i` for `g = g_ik`, i.e. the prediction for `g_ki`.
///
/// Since `U` is antilinear, the composite is the linear map
/// `−R_k J_k conj(g*) J_i R_i` with `conj(g*) = (h_i/h_k)·gᵀ`.
pub fn g_transform(g: &GMatrix) -> GMatrix {
    let (i, k) = (g.i, g.k);
    let grid = g.grid;
    let ratio = grid.h(i) / grid.h(k);
    let (ni, nk) = (grid.n(i), grid.n(k));
    let m = r_matrix(nk)
        .matmul(&j_matrix(nk))
        .matmul(&g.m.transpose())
        .matmul(&j_matrix(ni))
        .matmul(&r_matrix(ni))
        .scale(C64::new(-ratio, 0.0));
    GMatrix { i: k, k: i, grid, m }
}

/// `‖g₂₁ − (−U₂J₂g₁₂*J₁U₁)‖_F / ‖g₂₁‖_F`.
pub fn g_symmetry_residual(g12: &GMatrix, g21: &GMatrix) -> Result<f64> {
    if g12.grid != g21.grid || g12.i != g21.k || g12.k != g21.i {
        return Err(Error::invalid("g blocks are not a transposed pair on the same grid"));
    }
    let pred = g_transform(g12);
    let num = g21.m.sub(&pred.m).frobenius_norm();
    let den = g21.m.frobenius_norm();
    Ok(if den > 0.0 { num / den } else { num })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_g(n1: usize, n2: usize) -> GMatrix {
        let g = GridSpec::new(1.0, 1.7, n1, n2).unwrap();
        let m = CMatrix::from_fn(2 * n1, 2 * n2, |r, c| C64::new((r as f64 * 0.3 + c as f64).sin(), (r * c) as f64 * 0.01));
        GMatrix::new(Axis::One, Axis::Two, g, m).unwrap()
    }

    #[test]
    fn u_and_j_are_involutions() {
        let v: Vec<C64> = (0..8).map(|j| C64::new(j as f64, 1.0 - j as f64)).collect();
        assert_eq!(u_apply(&u_apply(&v)), v);
        assert_eq!(j_apply(&j_apply(&v)), v);
        let j = j_matrix(4);
        assert!(j.matmul(&j).sub(&CMatrix::identity(8)).max_abs() < 1e-15);
        assert!(j.adjoint().sub(&j).max_abs() < 1e-15);
        assert_eq!(j.mul_vec(&v), j_apply(&v));
    }

    #[test]
    fn transform_agrees_with_antilinear_definition() {
        let g = sample_g(4, 3);
        let t = g_transform(&g);
        let gstar = g.m.adjoint().scale(C64::new(g.grid.h1() / g.grid.h2(), 0.0));
        let x: Vec<C64> = (0..8).map(|j| C64::new(0.2 * j as f64, -0.1 * j as f64 + 0.5)).collect();
        let direct: Vec<C64> =
            u_apply(&j_apply(&gstar.mul_vec(&j_apply(&u_apply(&x))))).iter().map(|z| -z).collect();
        let linear = t.m.mul_vec(&x);
        for (a, b) in direct.iter().zip(&linear) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn transform_is_an_involution() {
        let g = sample_g(4, 6);
        let back = g_transform(&g_transform(&g));
        assert!(back.m.sub(&g.m).max_abs() <= 1e-12 * g.m.max_abs());
        assert_eq!(back.i, g.i);
    }

    #[test]
    fn shape_is_checked() {
        let grid = GridSpec::new(1.0, 1.0, 4, 8).unwrap();
        assert!(GMatrix::new(Axis::One, Axis::Two, grid, CMatrix::zeros(8, 16)).is_ok());
        assert!(GMatrix::new(Axis::One, Axis::Two, grid, CMatrix::zeros(16, 8)).is_err());
        assert!(GMatrix::new(Axis::One, Axis::One, grid, CMatrix::zeros(8, 8)).is_err());
    }
}
