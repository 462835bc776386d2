//! A uniform wrapper for the bounded operators between grid, line, pair and
//! scalar spaces.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec};
use crate::linalg::CMatrix;
use crate::tolerances::DENSE_GUARD;
use crate::C64;

/// Discrete function spaces of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Space {
    /// `L²(Ω)`, `n₁n₂` values.
    Grid,
    /// `L²(0, ω_i)`, `n_i` values.
    Line(Axis),
    /// `L²₂(0, ω_i)`, `2n_i` values.
    Pair(Axis),
    /// `ℂ`.
    Scalar,
}

impl Space {
    pub fn dim(self, grid: &GridSpec) -> usize {
        match self {
            Space::Grid => grid.len(),
            Space::Line(a) => grid.n(a),
            Space::Pair(a) => 2 * grid.n(a),
            Space::Scalar => 1,
        }
    }

    /// Quadrature weight of the space's inner product.
    pub fn weight(self, grid: &GridSpec) -> f64 {
        match self {
            Space::Grid => grid.cell_area(),
            Space::Line(a) | Space::Pair(a) => grid.h(a),
            Space::Scalar => 1.0,
        }
    }
}

type ApplyFn = dyn Fn(&[C64]) -> Vec<C64> + Send + Sync;

#[derive(Clone)]
pub struct LinOp {
    name: String,
    grid: GridSpec,
    source: Space,
    target: Space,
    apply: Arc<ApplyFn>,
    dense: Option<Arc<CMatrix>>,
}

impl fmt::Debug for LinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinOp")
            .field("name", &self.name)
            .field("source", &self.source)
            .field("target", &self.target)
            .field("dense", &self.dense.is_some())
            .finish()
    }
}

impl LinOp {
    pub fn from_dense(name: impl Into<String>, grid: GridSpec, source: Space, target: Space, m: CMatrix) -> Result<Self> {
        let name = name.into();
        if m.shape() != (target.dim(&grid), source.dim(&grid)) {
            return Err(Error::invalid(format!(
                "{name}: matrix is {}×{}, spaces need {}×{}",
                m.rows(),
                m.cols(),
                target.dim(&grid),
                source.dim(&grid)
            )));
        }
        let m = Arc::new(m);
        let mm = m.clone();
        Ok(Self { name, grid, source, target, apply: Arc::new(move |x| mm.mul_vec(x)), dense: Some(m) })
    }

    pub fn from_fn(
        name: impl Into<String>,
        grid: GridSpec,
        source: Space,
        target: Space,
        f: impl Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), grid, source, target, apply: Arc::new(f), dense: None }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn source(&self) -> Space {
        self.source
    }

    pub fn target(&self) -> Space {
        self.target
    }

    pub fn has_dense(&self) -> bool {
        self.dense.is_some()
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let want = self.source.dim(&self.grid);
        if x.len() != want {
            return Err(Error::invalid(format!("{}: input has {} values, expected {want}", self.name, x.len())));
        }
        Ok((self.apply)(x))
    }

    /// Dense matrix: the stored one, or the operator applied to each basis
    /// vector (columns computed independently, so the result does not depend
    /// on scheduling).
    pub fn to_dense(&self) -> Result<CMatrix> {
        if let Some(m) = &self.dense {
            return Ok((**m).clone());
        }
        let (rows, cols) = (self.target.dim(&self.grid), self.source.dim(&self.grid));
        if rows.max(cols) > DENSE_GUARD {
            return Err(Error::SizeGuard { size: rows.max(cols), limit: DENSE_GUARD });
        }
        let columns: Vec<Vec<C64>> = (0..cols)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![C64::new(0.0, 0.0); cols];
                e[j] = C64::new(1.0, 0.0);
                (self.apply)(&e)
            })
            .collect();
        Ok(CMatrix::from_columns(rows, &columns))
    }

    /// Adjoint under the spaces' weighted inner products:
    /// `M* = (w_target / w_source)·Mᴴ`.
    pub fn adjoint_dense(&self) -> Result<CMatrix> {
        let ratio = self.target.weight(&self.grid) / self.source.weight(&self.grid);
        Ok(self.to_dense()?.adjoint().scale(C64::new(ratio, 0.0)))
    }
}
