//! Generating kernels `q(x, t) = conj((Q*χ_x)(t))` of operators on the grid,
//! with `χ_x` the indicator of `{t : t₁ < x₁, t₂ < x₂}`, and the inverse map
//! `Qf = ∂₁∂₂∫ q(x, t) f(t) dt`.
//!
//! `x` ranges over cell corners `(e₁h₁, e₂h₂)`, `0 ≤ e_i ≤ n_i`; the mixed
//! derivative is the corner difference over the cell around a midpoint.

use crate::error::{Error, Result};
use crate::grid::{GridFn, GridSpec};
use crate::linalg::CMatrix;
use crate::C64;

fn check_square(q: &CMatrix, grid: &GridSpec) -> Result<()> {
    if q.shape() != (grid.len(), grid.len()) {
        return Err(Error::invalid(format!(
            "operator is {}×{}, the grid needs {n}×{n}",
            q.rows(),
            q.cols(),
            n = grid.len()
        )));
    }
    Ok(())
}

/// `q(x, ·)` at the corner `x = (e₁h₁, e₂h₂)`.
pub fn extract_generating_kernel(q: &CMatrix, grid: &GridSpec, e1: usize, e2: usize) -> Result<GridFn> {
    check_square(q, grid)?;
    if e1 > grid.n1() || e2 > grid.n2() {
        return Err(Error::invalid(format!(
            "corner ({e1}, {e2}) lies outside the {}×{} grid",
            grid.n1(),
            grid.n2()
        )));
    }
    let chi = grid.sample(|x1, x2| {
        let inside = x1 < e1 as f64 * grid.h1() && x2 < e2 as f64 * grid.h2();
        C64::new(if inside { 1.0 } else { 0.0 }, 0.0)
    });
    // Equal weights on source and target, so the weighted adjoint is Qᴴ.
    let values = q.adjoint().mul_vec(chi.values()).into_iter().map(|z| z.conj()).collect();
    GridFn::new(*grid, values)
}

/// Every corner kernel of `Q`, enough to rebuild its action.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingKernel {
    grid: GridSpec,
    /// Row `e₂(n₁+1) + e₁` holds `q((e₁h₁, e₂h₂), ·)`.
    rows: CMatrix,
}

impl GeneratingKernel {
    pub fn extract(q: &CMatrix, grid: &GridSpec) -> Result<Self> {
        check_square(q, grid)?;
        let (c1, c2) = (grid.n1() + 1, grid.n2() + 1);
        let mut rows = CMatrix::zeros(c1 * c2, grid.len());
        for e2 in 0..c2 {
            for e1 in 0..c1 {
                let k = extract_generating_kernel(q, grid, e1, e2)?;
                for (c, v) in k.values().iter().enumerate() {
                    rows[(e2 * c1 + e1, c)] = *v;
                }
            }
        }
        Ok(Self { grid: *grid, rows })
    }

    pub fn kernel_at(&self, e1: usize, e2: usize) -> Vec<C64> {
        self.rows.row(e2 * (self.grid.n1() + 1) + e1).to_vec()
    }

    /// `∂₁∂₂∫ q(x, t) f(t) dt` at the midpoints.
    pub fn apply(&self, f: &GridFn) -> Result<GridFn> {
        if f.grid() != &self.grid {
            return Err(Error::invalid("function lives on a different grid"));
        }
        let g = &self.grid;
        let area = g.cell_area();
        let c1 = g.n1() + 1;
        let big: Vec<C64> = self.rows.mul_vec(f.values()).into_iter().map(|z| z * area).collect();
        let at = |e1: usize, e2: usize| big[e2 * c1 + e1];
        let values = (0..g.len())
            .map(|idx| {
                let (a, b) = g.coords(idx);
                (at(a + 1, b + 1) - at(a + 1, b) - at(a, b + 1) + at(a, b)) / area
            })
            .collect();
        GridFn::new(*g, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;
    use crate::kernel::{KernelModel, SurfaceSpec};
    use crate::operators::{integration_op, ConvOperator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fn(g: GridSpec, rng: &mut ChaCha8Rng) -> GridFn {
        GridFn::new(g, (0..g.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .unwrap()
    }

    #[test]
    fn identity_kernel_is_the_indicator() {
        let g = GridSpec::new(1.0, 1.0, 4, 3).unwrap();
        let q = extract_generating_kernel(&CMatrix::identity(12), &g, 2, 1).unwrap();
        for idx in 0..12 {
            let (a, b) = g.coords(idx);
            let want = if a < 2 && b < 1 { 1.0 } else { 0.0 };
            assert_eq!(q.values()[idx], C64::new(want, 0.0));
        }
    }

    #[test]
    fn a1_kernel_is_cumulative_indicator() {
        let g = GridSpec::new(1.0, 1.0, 5, 4).unwrap();
        let a1 = integration_op(&g, Axis::One).to_dense().unwrap();
        let (e1, e2) = (3, 2);
        let q = extract_generating_kernel(&a1, &g, e1, e2).unwrap();
        let x1 = e1 as f64 * g.h1();
        for idx in 0..g.len() {
            let (a, b) = g.coords(idx);
            let t1 = g.midpoint(Axis::One, a);
            let want = if a < e1 && b < e2 { C64::new(0.0, x1 - t1) } else { C64::new(0.0, 0.0) };
            assert!((q.values()[idx] - want).norm() < 1e-15);
        }
    }

    #[test]
    fn conv_operator_round_trip() {
        let g = GridSpec::new(1.0, 1.0, 5, 5).unwrap();
        let m = KernelModel::with_sigma(1.0, SurfaceSpec::Exp { amp: 0.3, b1: 1.0, b2: 1.0 });
        let s = ConvOperator::from_model(&m, &g).unwrap();
        let gk = GeneratingKernel::extract(&s.assemble_dense().unwrap(), &g).unwrap();
        let f = random_fn(g, &mut ChaCha8Rng::seed_from_u64(5));
        let got = gk.apply(&f).unwrap();
        let want = s.apply(&f).unwrap();
        let err: f64 = got.values().iter().zip(want.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn corner_outside_grid_is_rejected() {
        let g = GridSpec::new(1.0, 1.0, 3, 3).unwrap();
        assert!(matches!(extract_generating_kernel(&CMatrix::identity(9), &g, 4, 0), Err(Error::InvalidArgument(_))));
    }
}
