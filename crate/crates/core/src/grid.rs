//! Midpoint grids on the rectangle `(0, ω₁) × (0, ω₂)` and the grid-function
//! types that live on them.
//!
//! Conventions fixed here and used by every other module:
//!
//! * midpoints `x_i^(a) = (a + ½)·h_i`, `h_i = ω_i / n_i`;
//! * grid functions are stored x₁-fastest: flat index `b·n₁ + a` for the point
//!   `(x₁^(a), x₂^(b))`;
//! * `⟨f, g⟩_Ω = h₁h₂ Σ f·conj(g)` and `⟨f, g⟩_(0,ω_i) = h_i Σ f·conj(g)`.
//!
//! Differences of midpoints are integer multiples of `h_i`; midpoints
//! themselves are odd multiples of `h_i/2`. Kernel samples are therefore kept
//! on the half-step lattice `q·h_i/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    One,
    Two,
}

impl Axis {
    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Axis::One),
            2 => Ok(Axis::Two),
            other => Err(Error::invalid(format!("axis must be 1 or 2, got {other}"))),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Axis::One => 1,
            Axis::Two => 2,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Axis::One => Axis::Two,
            Axis::Two => Axis::One,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    omega1: f64,
    omega2: f64,
    n1: usize,
    n2: usize,
}

impl GridSpec {
    pub fn new(omega1: f64, omega2: f64, n1: usize, n2: usize) -> Result<Self> {
        if !(omega1 > 0.0 && omega1.is_finite() && omega2 > 0.0 && omega2.is_finite()) {
            return Err(Error::invalid(format!(
                "rectangle sides must be positive, got ω₁ = {omega1}, ω₂ = {omega2}"
            )));
        }
        if n1 < 2 || n2 < 2 {
            return Err(Error::invalid(format!("need at least 2 points per side, got {n1}×{n2}")));
        }
        Ok(Self { omega1, omega2, n1, n2 })
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega2
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn omega(&self, axis: Axis) -> f64 {
        match axis {
            Axis::One => self.omega1,
            Axis::Two => self.omega2,
        }
    }

    pub fn n(&self, axis: Axis) -> usize {
        match axis {
            Axis::One => self.n1,
            Axis::Two => self.n2,
        }
    }

    pub fn h(&self, axis: Axis) -> f64 {
        self.omega(axis) / self.n(axis) as f64
    }

    pub fn h1(&self) -> f64 {
        self.h(Axis::One)
    }

    pub fn h2(&self) -> f64 {
        self.h(Axis::Two)
    }

    /// Number of grid points `n₁n₂`.
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn midpoint(&self, axis: Axis, a: usize) -> f64 {
        (a as f64 + 0.5) * self.h(axis)
    }

    pub fn midpoints(&self, axis: Axis) -> Vec<f64> {
        (0..self.n(axis)).map(|a| self.midpoint(axis, a)).collect()
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize) -> usize {
        b * self.n1 + a
    }

    /// Inverse of [`GridSpec::index`].
    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.n1, idx / self.n1)
    }

    /// Quadrature weight of a point on `Ω`.
    pub fn cell_area(&self) -> f64 {
        self.h1() * self.h2()
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self == other
    }

    /// Samples `f` at the midpoints in the library layout.
    pub fn sample(&self, f: impl Fn(f64, f64) -> C64) -> GridFn {
        let mut values = Vec::with_capacity(self.len());
        for b in 0..self.n2 {
            let x2 = self.midpoint(Axis::Two, b);
            for a in 0..self.n1 {
                values.push(f(self.midpoint(Axis::One, a), x2));
            }
        }
        GridFn { grid: *self, values }
    }

    pub fn sample_line(&self, axis: Axis, f: impl Fn(f64) -> C64) -> LineFn {
        LineFn { axis, values: self.midpoints(axis).into_iter().map(f).collect() }
    }

    /// `⟨f, g⟩_Ω = h₁h₂ Σ f·conj(g)` on raw slices.
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        assert_eq!(f.len(), self.len());
        assert_eq!(g.len(), self.len());
        self.cell_area() * f.iter().zip(g).map(|(a, b)| a * b.conj()).sum::<C64>()
    }

    /// `⟨f, g⟩_(0,ω_i) = h_i Σ f·conj(g)`; also used for stacked pairs.
    pub fn line_inner(&self, axis: Axis, f: &[C64], g: &[C64]) -> C64 {
        assert_eq!(f.len(), g.len());
        self.h(axis) * f.iter().zip(g).map(|(a, b)| a * b.conj()).sum::<C64>()
    }

    pub fn norm(&self, f: &[C64]) -> f64 {
        self.inner(f, f).re.max(0.0).sqrt()
    }
}

/// Complex values at the `n₁n₂` midpoints, x₁-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    grid: GridSpec,
    values: Vec<C64>,
}

impl GridFn {
    pub fn new(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "grid function has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn constant(grid: GridSpec, value: C64) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn at(&self, a: usize, b: usize) -> C64 {
        self.values[self.grid.index(a, b)]
    }

    pub fn norm(&self) -> f64 {
        self.grid.norm(&self.values)
    }
}

/// Complex values at the `n_i` midpoints of `(0, ω_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFn {
    pub axis: Axis,
    pub values: Vec<C64>,
}

impl LineFn {
    pub fn new(grid: &GridSpec, axis: Axis, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n(axis) {
            return Err(Error::invalid(format!(
                "line function on axis {} has {} values, expected {}",
                axis.index(),
                values.len(),
                grid.n(axis)
            )));
        }
        Ok(Self { axis, values })
    }

    pub fn ones(grid: &GridSpec, axis: Axis) -> Self {
        Self { axis, values: vec![C64::new(1.0, 0.0); grid.n(axis)] }
    }
}

/// A pair of line functions on the same axis, an element of `L²₂(0, ω_i)`.
/// Stored stacked: first component then second, length `2n_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFn {
    pub axis: Axis,
    pub values: Vec<C64>,
}

impl PairFn {
    pub fn new(grid: &GridSpec, axis: Axis, values: Vec<C64>) -> Result<Self> {
        if values.len() != 2 * grid.n(axis) {
            return Err(Error::invalid(format!(
                "pair function on axis {} has {} values, expected {}",
                axis.index(),
                values.len(),
                2 * grid.n(axis)
            )));
        }
        Ok(Self { axis, values })
    }

    pub fn from_parts(first: LineFn, second: LineFn) -> Result<Self> {
        if first.axis != second.axis || first.values.len() != second.values.len() {
            return Err(Error::invalid("pair components must share an axis and length"));
        }
        let mut values = first.values;
        values.extend(second.values);
        Ok(Self { axis: first.axis, values })
    }

    pub fn first(&self) -> &[C64] {
        &self.values[..self.values.len() / 2]
    }

    pub fn second(&self) -> &[C64] {
        &self.values[self.values.len() / 2..]
    }
}
