//! Operators assembled from the integral definitions with grid functions read
//! as piecewise constants: 4-point Gauss–Legendre quadrature of `s` over each
//! cell, outer `∂/∂x` replaced by centered differences with step `h/2`.
//!
//! The difference points sit on cell edges, so every jump of `s(x − t)` falls
//! on a cell boundary and the quadrature never straddles it.

use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec};
use crate::kernel::KernelModel;
use crate::linalg::CMatrix;
use crate::operators::{KName, Space};
use crate::C64;

const GL_NODES: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL_WEIGHTS: [f64; 4] = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

/// `∫_lo^hi f`.
pub fn gl4(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    GL_NODES.iter().zip(GL_WEIGHTS).map(|(x, w)| w * f(m + r * x)).sum::<f64>() * r
}

/// `∫∫` over a rectangle, tensor rule.
pub fn gl4_2d(lo1: f64, hi1: f64, lo2: f64, hi2: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    gl4(lo1, hi1, |t1| gl4(lo2, hi2, |t2| f(t1, t2)))
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A dense matrix together with the spaces it maps between.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOp {
    pub name: String,
    pub grid: GridSpec,
    pub source: Space,
    pub target: Space,
    pub matrix: CMatrix,
}

impl DenseOp {
    pub fn new(name: impl Into<String>, grid: GridSpec, source: Space, target: Space, matrix: CMatrix) -> Result<Self> {
        let name = name.into();
        let want = (target.dim(&grid), source.dim(&grid));
        if matrix.shape() != want {
            return Err(Error::invalid(format!(
                "{name}: matrix is {}×{}, spaces need {}×{}",
                matrix.rows(),
                matrix.cols(),
                want.0,
                want.1
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::invalid(format!("{name}: non-finite entries")));
        }
        Ok(Self { name, grid, source, target, matrix })
    }

    /// Source and target quadrature weights.
    pub fn weights(&self) -> (f64, f64) {
        (self.source.weight(&self.grid), self.target.weight(&self.grid))
    }

    /// Adjoint under the weighted inner products: `(w_s/w_t)·Mᴴ`.
    pub fn adjoint(&self) -> DenseOp {
        let (ws, wt) = self.weights();
        DenseOp {
            name: format!("{}*", self.name),
            grid: self.grid,
            source: self.target,
            target: self.source,
            matrix: self.matrix.adjoint().scale(re(wt / ws)),
        }
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.matrix.cols() {
            return Err(Error::invalid(format!("{}: input has {} values, expected {}", self.name, x.len(), self.matrix.cols())));
        }
        Ok(self.matrix.mul_vec(x))
    }

    /// `‖self − other‖_F / ‖self‖_F`.
    pub fn relative_difference(&self, other: &CMatrix) -> Result<f64> {
        if other.shape() != self.matrix.shape() {
            return Err(Error::invalid(format!("{}: shape mismatch in comparison", self.name)));
        }
        let num = self.matrix.sub(other).frobenius_norm();
        let den = self.matrix.frobenius_norm();
        Ok(if den > 0.0 { num / den } else { num })
    }
}

/// `∫∫_{[0,h₁]×[0,h₂]} s(d₁h₁ − u₁, d₂h₂ − u₂) du` for `d ∈ [−(n−1), n]²`,
/// stored with offset `n − 1`.
struct CellTable {
    w1: usize,
    off1: i64,
    off2: i64,
    data: Vec<f64>,
}

impl CellTable {
    fn new(model: &KernelModel, grid: &GridSpec) -> Self {
        let (n1, n2) = (grid.n1() as i64, grid.n2() as i64);
        let (h1, h2) = (grid.h1(), grid.h2());
        let w1 = (2 * n1) as usize;
        let mut data = Vec::with_capacity(w1 * (2 * n2) as usize);
        for d2 in -(n2 - 1)..=n2 {
            for d1 in -(n1 - 1)..=n1 {
                let (x1, x2) = (d1 as f64 * h1, d2 as f64 * h2);
                data.push(gl4_2d(0.0, h1, 0.0, h2, |u1, u2| model.s(x1 - u1, x2 - u2)));
            }
        }
        Self { w1, off1: n1 - 1, off2: n2 - 1, data }
    }

    fn at(&self, d1: i64, d2: i64) -> f64 {
        self.data[(d2 + self.off2) as usize * self.w1 + (d1 + self.off1) as usize]
    }
}

/// `S f = ∂₁∂₂∫_Ω s(x − t) f(t) dt` with the mixed derivative taken as a
/// corner difference over the cell around each midpoint.
pub fn oracle_s(model: &KernelModel, grid: &GridSpec) -> Result<DenseOp> {
    let t = CellTable::new(model, grid);
    let area = grid.cell_area();
    let m = CMatrix::from_fn(grid.len(), grid.len(), |r, c| {
        let (a, b) = grid.coords(r);
        let (ap, bp) = grid.coords(c);
        let (d1, d2) = (a as i64 - ap as i64, b as i64 - bp as i64);
        re((t.at(d1 + 1, d2 + 1) - t.at(d1 + 1, d2) - t.at(d1, d2 + 1) + t.at(d1, d2)) / area)
    });
    DenseOp::new("S", *grid, Space::Grid, Space::Grid, m)
}

/// `A_k` (or `A_k*`) by exact integration of piecewise constants.
pub fn oracle_integration(grid: &GridSpec, axis: Axis, adjoint: bool) -> Result<DenseOp> {
    let h = grid.h(axis);
    let m = CMatrix::from_fn(grid.len(), grid.len(), |r, c| {
        let (a, b) = grid.coords(r);
        let (ap, bp) = grid.coords(c);
        let (x, t, same) = match axis {
            Axis::One => (a, ap, b == bp),
            Axis::Two => (b, bp, a == ap),
        };
        if !same {
            return C64::new(0.0, 0.0);
        }
        // Length of [0, x_mid] ∩ cell t (or [x_mid, ω] ∩ cell t).
        let (lo, hi) = (t as f64 * h, (t + 1) as f64 * h);
        let xm = (x as f64 + 0.5) * h;
        let len = if adjoint { (hi - lo.max(xm)).max(0.0) } else { (hi.min(xm) - lo).max(0.0) };
        if adjoint {
            C64::new(0.0, -len)
        } else {
            C64::new(0.0, len)
        }
    });
    let name = if adjoint { format!("A{}*", axis.index()) } else { format!("A{}", axis.index()) };
    DenseOp::new(name, *grid, Space::Grid, Space::Grid, m)
}

/// `M_jk` from its integral definition.
pub fn oracle_m_op(j: usize, k: usize, model: &KernelModel, grid: &GridSpec) -> Result<DenseOp> {
    let axis = Axis::from_index(k).map_err(|_| Error::invalid(format!("no operator M_{j}{k}; k must be 1 or 2")))?;
    let g = *grid;
    let (n1, n2) = (g.n1(), g.n2());
    let (h1, h2) = (g.h1(), g.h2());
    let n = g.len();
    let line = Space::Line(axis.other());
    let (m, source, target) = match (j, axis) {
        (1, Axis::One) => {
            // ∂₂∫₀^{ω₂} s(x₁, x₂ − t₂) f(t₂) dt₂
            let d = |a: usize, e: i64| {
                let x1 = g.midpoint(Axis::One, a);
                gl4(0.0, h2, |u| model.s(x1, e as f64 * h2 - u))
            };
            let m = CMatrix::from_fn(n, n2, |r, bp| {
                let (a, b) = g.coords(r);
                let e = b as i64 - bp as i64;
                re((d(a, e + 1) - d(a, e)) / h2)
            });
            (m, line, Space::Grid)
        }
        (1, Axis::Two) => {
            // ∂₁∫₀^{ω₁} s(x₁ − t₁, x₂) f(t₁) dt₁
            let d = |b: usize, e: i64| {
                let x2 = g.midpoint(Axis::Two, b);
                gl4(0.0, h1, |u| model.s(e as f64 * h1 - u, x2))
            };
            let m = CMatrix::from_fn(n, n1, |r, ap| {
                let (a, b) = g.coords(r);
                let e = a as i64 - ap as i64;
                re((d(b, e + 1) - d(b, e)) / h1)
            });
            (m, line, Space::Grid)
        }
        (2, Axis::One) => {
            let m = CMatrix::from_fn(n2, n, |b, c| re(if g.coords(c).1 == b { h1 } else { 0.0 }));
            (m, Space::Grid, line)
        }
        (2, Axis::Two) => {
            let m = CMatrix::from_fn(n1, n, |a, c| re(if g.coords(c).0 == a { h2 } else { 0.0 }));
            (m, Space::Grid, line)
        }
        (3, Axis::One) => (CMatrix::from_fn(n, n2, |r, bp| re(if g.coords(r).1 == bp { 1.0 } else { 0.0 })), line, Space::Grid),
        (3, Axis::Two) => (CMatrix::from_fn(n, n1, |r, ap| re(if g.coords(r).0 == ap { 1.0 } else { 0.0 })), line, Space::Grid),
        (4, Axis::One) => {
            // −∂₂∫_Ω s(−t₁, x₂ − t₂) f(t) dt
            let e_tab = |ap: usize, e: i64| {
                let lo = ap as f64 * h1;
                gl4_2d(lo, lo + h1, 0.0, h2, |t1, u| model.s(-t1, e as f64 * h2 - u))
            };
            let m = CMatrix::from_fn(n2, n, |b, c| {
                let (ap, bp) = g.coords(c);
                let e = b as i64 - bp as i64;
                re(-(e_tab(ap, e + 1) - e_tab(ap, e)) / h2)
            });
            (m, Space::Grid, line)
        }
        (4, Axis::Two) => {
            // −∂₁∫_Ω s(x₁ − t₁, −t₂) f(t) dt
            let e_tab = |bp: usize, e: i64| {
                let lo = bp as f64 * h2;
                gl4_2d(0.0, h1, lo, lo + h2, |u, t2| model.s(e as f64 * h1 - u, -t2))
            };
            let m = CMatrix::from_fn(n1, n, |a, c| {
                let (ap, bp) = g.coords(c);
                let e = a as i64 - ap as i64;
                re(-(e_tab(bp, e + 1) - e_tab(bp, e)) / h1)
            });
            (m, Space::Grid, line)
        }
        _ => return Err(Error::invalid(format!("no operator M_{j}{k}; j must be 1..=4"))),
    };
    DenseOp::new(format!("M{j}{k}"), g, source, target, m)
}

/// `K` operators by cell quadrature.
pub fn oracle_k_op(name: KName, model: &KernelModel, grid: &GridSpec) -> Result<DenseOp> {
    let g = *grid;
    let (n1, n2) = (g.n1(), g.n2());
    let (h1, h2) = (g.h1(), g.h2());
    let m = match name {
        KName::K1(Axis::One) => CMatrix::from_fn(n1, n2, |a, bp| {
            let x1 = g.midpoint(Axis::One, a);
            let lo = bp as f64 * h2;
            re(-gl4(lo, lo + h2, |t2| model.s(x1, -t2)))
        }),
        KName::K1(Axis::Two) => CMatrix::from_fn(n2, n1, |b, ap| {
            let x2 = g.midpoint(Axis::Two, b);
            let lo = ap as f64 * h1;
            re(-gl4(lo, lo + h1, |t1| model.s(-t1, x2)))
        }),
        KName::K2(i) => CMatrix::from_fn(g.n(i), 1, |_, _| re(1.0)),
        KName::K3(i) => {
            let k = i.other();
            CMatrix::from_fn(g.n(i), g.n(k), |_, _| re(g.h(k)))
        }
        KName::K4 => CMatrix::from_fn(1, g.len(), |_, c| {
            let (a, b) = g.coords(c);
            let (lo1, lo2) = (a as f64 * h1, b as f64 * h2);
            re(gl4_2d(lo1, lo1 + h1, lo2, lo2 + h2, |t1, t2| model.s(-t1, -t2)))
        }),
    };
    let (source, target) = name.spaces();
    DenseOp::new(name.label(), g, source, target, m)
}
