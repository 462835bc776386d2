//! Integration operators `A_k = i∫₀^{x_k}`, their adjoints
//! `A_k* = −i∫_{x_k}^{ω_k}`, and the line versions `𝒜_k`.
//!
//! Midpoint stencil: `(A f)_a = i·h·(Σ_{a′<a} f_{a′} + ½f_a)`, so `A·𝟏 = i·x`
//! exactly and the adjoint is the plain conjugate transpose.

use crate::grid::{Axis, GridFn, GridSpec, LineFn};
use crate::linalg::CMatrix;
use crate::operators::linop::{LinOp, Space};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// Applies the 1D stencil to `n` values at `offset + j·stride`.
fn line_integrate(data: &mut [C64], offset: usize, stride: usize, n: usize, h: f64, adjoint: bool) {
    let mut acc = C64::new(0.0, 0.0);
    let order: Box<dyn Iterator<Item = usize>> = if adjoint { Box::new((0..n).rev()) } else { Box::new(0..n) };
    let factor = if adjoint { -I * h } else { I * h };
    for j in order {
        let idx = offset + j * stride;
        let v = data[idx];
        data[idx] = factor * (acc + 0.5 * v);
        acc += v;
    }
}

/// `A_k` (or `A_k*`) on a flat grid vector, in place.
pub fn integrate_in_place(grid: &GridSpec, axis: Axis, data: &mut [C64], adjoint: bool) {
    assert_eq!(data.len(), grid.len());
    let (n1, n2) = (grid.n1(), grid.n2());
    let h = grid.h(axis);
    match axis {
        Axis::One => {
            for b in 0..n2 {
                line_integrate(data, b * n1, 1, n1, h, adjoint);
            }
        }
        Axis::Two => {
            for a in 0..n1 {
                line_integrate(data, a, n1, n2, h, adjoint);
            }
        }
    }
}

/// `A_k f`.
pub fn integration_apply(axis: Axis, f: &GridFn) -> GridFn {
    let mut out = f.clone();
    integrate_in_place(f.grid(), axis, out.values_mut(), false);
    out
}

/// `A_k* f`.
pub fn adjoint_apply(axis: Axis, f: &GridFn) -> GridFn {
    let mut out = f.clone();
    integrate_in_place(f.grid(), axis, out.values_mut(), true);
    out
}

/// `𝒜_k f` on `L²(0, ω_k)`.
pub fn cal_a_apply(grid: &GridSpec, f: &LineFn) -> LineFn {
    let mut values = f.values.clone();
    let n = values.len();
    line_integrate(&mut values, 0, 1, n, grid.h(f.axis), false);
    LineFn { axis: f.axis, values }
}

/// `𝒜_k*` on `L²(0, ω_k)`.
pub fn cal_a_adjoint_apply(grid: &GridSpec, f: &LineFn) -> LineFn {
    let mut values = f.values.clone();
    let n = values.len();
    line_integrate(&mut values, 0, 1, n, grid.h(f.axis), true);
    LineFn { axis: f.axis, values }
}

/// Dense `n_k × n_k` matrix of `𝒜_k`.
pub fn cal_a_matrix(grid: &GridSpec, axis: Axis) -> CMatrix {
    let h = grid.h(axis);
    let n = grid.n(axis);
    CMatrix::from_fn(n, n, |r, c| {
        if c < r {
            I * h
        } else if c == r {
            I * (0.5 * h)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn integration_op(grid: &GridSpec, axis: Axis) -> LinOp {
    let g = *grid;
    LinOp::from_fn(format!("A{}", axis.index()), g, Space::Grid, Space::Grid, move |x| {
        let mut v = x.to_vec();
        integrate_in_place(&g, axis, &mut v, false);
        v
    })
}

pub fn integration_adjoint_op(grid: &GridSpec, axis: Axis) -> LinOp {
    let g = *grid;
    LinOp::from_fn(format!("A{}*", axis.index()), g, Space::Grid, Space::Grid, move |x| {
        let mut v = x.to_vec();
        integrate_in_place(&g, axis, &mut v, true);
        v
    })
}

pub fn cal_a_op(grid: &GridSpec, axis: Axis) -> LinOp {
    LinOp::from_dense(format!("calA{}", axis.index()), *grid, Space::Line(axis), Space::Line(axis), cal_a_matrix(grid, axis))
        .expect("shape is consistent by construction")
}

/// `A_k X` for every column of `X` (`n₁n₂` rows).
pub fn integrate_columns(grid: &GridSpec, axis: Axis, x: &CMatrix, adjoint: bool) -> CMatrix {
    let t = x.transpose();
    let mut data = t.data().to_vec();
    for row in data.chunks_mut(x.rows()) {
        integrate_in_place(grid, axis, row, adjoint);
    }
    CMatrix::from_vec(x.cols(), x.rows(), data).expect("shape preserved").transpose()
}

/// `X A_k*` for `X` with `n₁n₂` columns, computed as `(A_k Xᴴ)ᴴ`.
pub fn times_adjoint_right(grid: &GridSpec, axis: Axis, x: &CMatrix) -> CMatrix {
    integrate_columns(grid, axis, &x.adjoint(), false).adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a1_of_ones_is_i_x1() {
        let g = GridSpec::new(1.0, 1.0, 4, 4).unwrap();
        let out = integration_apply(Axis::One, &GridFn::constant(g, C64::new(1.0, 0.0)));
        let want = [0.125, 0.375, 0.625, 0.875];
        for b in 0..4 {
            for (a, w) in want.iter().enumerate() {
                assert_eq!(out.at(a, b), C64::new(0.0, *w));
            }
        }
    }

    #[test]
    fn a_plus_adjoint_of_ones() {
        let g = GridSpec::new(1.0, 2.0, 4, 3).unwrap();
        let one = GridFn::constant(g, C64::new(1.0, 0.0));
        let s = integration_apply(Axis::One, &one);
        let t = adjoint_apply(Axis::One, &one);
        for b in 0..3 {
            for a in 0..4 {
                let x1 = g.midpoint(Axis::One, a);
                let got = s.at(a, b) + t.at(a, b);
                assert!((got - C64::new(0.0, 2.0 * x1 - 1.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn grid_operator_is_kron_of_line_operator() {
        let g = GridSpec::new(1.0, 1.5, 3, 4).unwrap();
        let dense = integration_op(&g, Axis::Two).to_dense().unwrap();
        let line = cal_a_matrix(&g, Axis::Two);
        for r in 0..g.len() {
            for c in 0..g.len() {
                let (a, b) = g.coords(r);
                let (ap, bp) = g.coords(c);
                let want = if a == ap { line[(b, bp)] } else { C64::new(0.0, 0.0) };
                assert_eq!(dense[(r, c)], want);
            }
        }
        let adj = integration_adjoint_op(&g, Axis::Two).to_dense().unwrap();
        assert!(adj.sub(&dense.adjoint()).max_abs() < 1e-15);
    }
}
