//! The ρ-function `ρ(λ, μ) = ∫ e^{−iμx}(S⁻¹e^{iλx})(x) dx`, computed directly
//! and through the structured representation
//!
//! ```text
//! ρ(λ, μ) = (μ_k − λ_k)⁻¹ e^{−i(ω₁μ₁ + ω₂μ₂)} ∫₀^{ω_i} (J_iU_iψ_i(μ))* ψ_i(λ) dx_i   (k ≠ i)
//! ψ(λ) = θ(λ)·G(λ)⁻¹·col[0, 𝟏, 0, 𝟏]
//! θ(λ) = 1 + λ₁λ₂ ∫ e^{iλ(ω−x)} h(x) dx,   h = S⁻¹y,   y(x) = s(x − ω)
//! ```
//!
//! `G(λ)` has diagonal blocks `I − λ_i𝒜_i` (twice each) and off-diagonal
//! blocks `iλ₂g₁₂`, `iλ₁g₂₁`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::grid::{Axis, GridFn, GridSpec, PairFn};
use crate::inversion::gops::{compute_g, g_symmetry_residual, GMatrix};
use crate::inversion::solve::Solver;
use crate::kernel::KernelSamples;
use crate::linalg::{CMatrix, Lu};
use crate::operators::{assemble_pi, cal_a_matrix, ConvOperator};
use crate::tolerances::Tolerances;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// A spectral parameter `(λ₁, λ₂) ∈ ℂ²`.
pub type Lambda = [C64; 2];

pub fn real_lambda(l1: f64, l2: f64) -> Lambda {
    [C64::new(l1, 0.0), C64::new(l2, 0.0)]
}

/// Default per-coordinate sample values for λ and μ. The two sets are
/// disjoint and within `2π` of each other, so no pair sits on a pole and
/// `|ρ|` stays away from zero.
pub const LAMBDA_SAMPLES: [f64; 5] = [-2.1, -0.9, 0.3, 1.1, 2.3];
pub const MU_SAMPLES: [f64; 5] = [-1.7, -0.4, 0.6, 1.5, 2.8];

/// All `(v₁, v₂)` with both coordinates from `values`, second coordinate outer.
pub fn product_set(values: &[f64]) -> Vec<Lambda> {
    values.iter().flat_map(|&v2| values.iter().map(move |&v1| real_lambda(v1, v2))).collect()
}

/// `e^{iλ·x}` at the grid midpoints.
pub fn exp_grid(grid: &GridSpec, l: Lambda) -> Vec<C64> {
    grid.sample(|x1, x2| (I * (l[0] * x1 + l[1] * x2)).exp()).into_values()
}

/// `y(x) = s(x₁ − ω₁, x₂ − ω₂)` at the midpoints.
pub fn y_samples(samples: &KernelSamples) -> GridFn {
    let g = *samples.grid();
    let (n1, n2) = (g.n1() as i64, g.n2() as i64);
    let mut values = Vec::with_capacity(g.len());
    for b in 0..n2 {
        for a in 0..n1 {
            values.push(C64::new(samples.s_h(2 * a + 1 - 2 * n1, 2 * b + 1 - 2 * n2), 0.0));
        }
    }
    GridFn::new(g, values).expect("length matches grid")
}

/// `h₁h₂ Σ e^{−iμx}(S⁻¹e^{iλx})(x)`.
pub fn rho_direct(solver: &Solver, l: Lambda, m: Lambda) -> Result<C64> {
    let grid = *solver.operator().grid();
    let u = solver.solve_slice(&exp_grid(&grid, l))?;
    Ok(pair_with(&grid, &u, m))
}

fn pair_with(grid: &GridSpec, u: &[C64], m: Lambda) -> C64 {
    let e = exp_grid(grid, m);
    grid.cell_area() * e.iter().zip(u).map(|(e, u)| e.conj() * u).sum::<C64>()
}

/// Direct ρ over a batch: one solve per λ, reused for every μ.
/// Entry `(p, q)` is `ρ(λ_q, μ_p)`.
pub fn rho_direct_table(solver: &Solver, lambdas: &[Lambda], mus: &[Lambda]) -> Result<CMatrix> {
    use rayon::prelude::*;
    let grid = *solver.operator().grid();
    let cols: Vec<Vec<C64>> = lambdas
        .par_iter()
        .map(|&l| {
            let u = solver.solve_slice(&exp_grid(&grid, l))?;
            Ok(mus.iter().map(|&m| pair_with(&grid, &u, m)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(CMatrix::from_columns(mus.len(), &cols))
}

/// `ψ(λ) = (ψ₁, ψ₂)` with `ψ_i ∈ L²₂(0, ω_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Psi {
    pub first: PairFn,
    pub second: PairFn,
}

impl Psi {
    pub fn part(&self, i: Axis) -> &PairFn {
        match i {
            Axis::One => &self.first,
            Axis::Two => &self.second,
        }
    }

    /// Stacked `col[ψ₁, ψ₂]`.
    pub fn stacked(&self) -> Vec<C64> {
        let mut v = self.first.values.clone();
        v.extend_from_slice(&self.second.values);
        v
    }
}

type Key = [u64; 4];

fn key(l: Lambda) -> Key {
    [l[0].re.to_bits(), l[0].im.to_bits(), l[1].re.to_bits(), l[1].im.to_bits()]
}

/// Holds `g₁₂`, `g₂₁` and `h`, and evaluates θ, G, ψ and ρ.
#[derive(Debug)]
pub struct RhoEvaluator {
    grid: GridSpec,
    g12: GMatrix,
    g21: GMatrix,
    h: GridFn,
    cal_a1: CMatrix,
    cal_a2: CMatrix,
    tol: Tolerances,
    symmetry_residual: f64,
    cache: Option<Mutex<HashMap<Key, Arc<(Lu, f64)>>>>,
}

impl RhoEvaluator {
    pub fn new(s: &ConvOperator, tol: &Tolerances) -> Result<Self> {
        Self::from_solver(&Solver::new(s, tol)?)
    }

    pub fn from_solver(solver: &Solver) -> Result<Self> {
        let samples = solver.operator().samples();
        let pi1 = assemble_pi(Axis::One, samples)?;
        let pi2 = assemble_pi(Axis::Two, samples)?;
        let g12 = compute_g(Axis::One, Axis::Two, solver, &pi1, &pi2)?;
        let g21 = compute_g(Axis::Two, Axis::One, solver, &pi2, &pi1)?;
        let h = solver.solve(&y_samples(samples))?;
        Self::from_parts(g12, g21, h, solver.tolerances())
    }

    /// Builds an evaluator from precomputed data; the pair `(g₁₂, g₂₁)` must
    /// satisfy the symmetry relation within `tol.g_symmetry`.
    pub fn from_parts(g12: GMatrix, g21: GMatrix, h: GridFn, tol: &Tolerances) -> Result<Self> {
        if g12.i() != Axis::One || g21.i() != Axis::Two {
            return Err(Error::invalid("expected g₁₂ and g₂₁ in that order"));
        }
        let grid = *g12.grid();
        if g21.grid() != &grid || h.grid() != &grid {
            return Err(Error::invalid("g blocks and h live on different grids"));
        }
        let symmetry_residual = g_symmetry_residual(&g12, &g21)?;
        if !(symmetry_residual <= tol.g_symmetry) {
            return Err(Error::GSymmetry { residual: symmetry_residual, bound: tol.g_symmetry });
        }
        Ok(Self {
            grid,
            cal_a1: cal_a_matrix(&grid, Axis::One),
            cal_a2: cal_a_matrix(&grid, Axis::Two),
            g12,
            g21,
            h,
            tol: *tol,
            symmetry_residual,
            cache: Some(Mutex::new(HashMap::new())),
        })
    }

    /// Turns off the per-λ LU cache.
    pub fn without_cache(mut self) -> Self {
        self.cache = None;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn g12(&self) -> &GMatrix {
        &self.g12
    }

    pub fn g21(&self) -> &GMatrix {
        &self.g21
    }

    pub fn h(&self) -> &GridFn {
        &self.h
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.symmetry_residual
    }

    /// Numbers stored to determine ρ: one g block and `h`.
    pub fn information_count(&self) -> usize {
        let (r, c) = self.g12.matrix().shape();
        r * c + self.h.values().len()
    }

    /// `θ(λ) = 1 + λ₁λ₂h₁h₂ Σ e^{iλ(ω−x)} h(x)`; exactly 1 when `λ₁λ₂ = 0`.
    pub fn theta(&self, l: Lambda) -> C64 {
        let prefactor = l[0] * l[1];
        if prefactor == C64::new(0.0, 0.0) {
            return C64::new(1.0, 0.0);
        }
        let g = &self.grid;
        let (w1, w2) = (g.omega1(), g.omega2());
        let mut acc = C64::new(0.0, 0.0);
        for b in 0..g.n2() {
            let e2 = (I * l[1] * (w2 - g.midpoint(Axis::Two, b))).exp();
            for a in 0..g.n1() {
                let e1 = (I * l[0] * (w1 - g.midpoint(Axis::One, a))).exp();
                acc += e1 * e2 * self.h.at(a, b);
            }
        }
        C64::new(1.0, 0.0) + prefactor * g.cell_area() * acc
    }

    /// Dense `G(λ)` of size `2(n₁ + n₂)`.
    pub fn assemble_g(&self, l: Lambda) -> CMatrix {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let (m1, m2) = (2 * n1, 2 * n2);
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let (g12, g21) = (self.g12.matrix(), self.g21.matrix());
        CMatrix::from_fn(m1 + m2, m1 + m2, |r, c| match (r < m1, c < m1) {
            (true, true) => {
                if r / n1 != c / n1 {
                    zero
                } else {
                    let d = if r == c { one } else { zero };
                    d - l[0] * self.cal_a1[(r % n1, c % n1)]
                }
            }
            (true, false) => I * l[1] * g12[(r, c - m1)],
            (false, true) => I * l[0] * g21[(r - m1, c)],
            (false, false) => {
                let (r, c) = (r - m1, c - m1);
                if r / n2 != c / n2 {
                    zero
                } else {
                    let d = if r == c { one } else { zero };
                    d - l[1] * self.cal_a2[(r % n2, c % n2)]
                }
            }
        })
    }

    fn factor(&self, l: Lambda) -> Result<Arc<(Lu, f64)>> {
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.lock().expect("cache lock").get(&key(l)) {
                return Ok(hit.clone());
            }
        }
        let lu = Lu::factor(&self.assemble_g(l))?;
        let cond = lu.condition_estimate();
        let entry = Arc::new((lu, cond));
        if let Some(cache) = &self.cache {
            cache.lock().expect("cache lock").insert(key(l), entry.clone());
        }
        Ok(entry)
    }

    /// Estimated condition number of `G(λ)`.
    pub fn g_condition(&self, l: Lambda) -> Result<f64> {
        Ok(self.factor(l)?.1)
    }

    /// `ψ(λ) = θ(λ)·G(λ)⁻¹·col[0, 𝟏, 0, 𝟏]`.
    pub fn psi(&self, l: Lambda) -> Result<Psi> {
        let entry = self.factor(l)?;
        let (lu, cond) = (&entry.0, entry.1);
        if !(cond <= self.tol.cond_max) {
            return Err(Error::NearSingularG { lambda: l, condition: cond });
        }
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let mut rhs = vec![C64::new(0.0, 0.0); 2 * n1 + 2 * n2];
        for v in &mut rhs[n1..2 * n1] {
            *v = C64::new(1.0, 0.0);
        }
        for v in &mut rhs[2 * n1 + n2..] {
            *v = C64::new(1.0, 0.0);
        }
        let th = self.theta(l);
        let x: Vec<C64> = lu.solve(&rhs).into_iter().map(|z| th * z).collect();
        Ok(Psi {
            first: PairFn::new(&self.grid, Axis::One, x[..2 * n1].to_vec())?,
            second: PairFn::new(&self.grid, Axis::Two, x[2 * n1..].to_vec())?,
        })
    }

    fn check_pole(&self, l: Lambda, m: Lambda, i: Axis) -> Result<()> {
        let k = i.other();
        let (ki, ii) = (k.index() - 1, i.index() - 1);
        let gap = (m[ki] - l[ki]).norm();
        if gap < self.tol.pole_rel * l[ki].norm().max(1.0) {
            let other = (m[ii] - l[ii]).norm();
            if other < self.tol.pole_rel * l[ii].norm().max(1.0) {
                return Err(Error::UnsupportedEvaluation);
            }
            return Err(Error::PoleProximity { k: k.index(), gap, advise: k.index() });
        }
        Ok(())
    }

    /// The structured form based on `ψ_i` (needs `μ_k ≠ λ_k`, `k ≠ i`).
    pub fn rho_structured(&self, l: Lambda, m: Lambda, i: Axis) -> Result<C64> {
        self.check_pole(l, m, i)?;
        let k = i.other();
        let pl = self.psi(l)?;
        let pm = self.psi(m)?;
        let (a, b) = (pl.part(i), pm.part(i));
        let n = self.grid.n(i);
        let (a1, a2) = (a.first(), a.second());
        let (b1, b2) = (b.first(), b.second());
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            acc += b2[n - 1 - j] * a1[j] - b1[n - 1 - j] * a2[j];
        }
        let integral = I * self.grid.h(i) * acc;
        let phase = (-I * (self.grid.omega1() * m[0] + self.grid.omega2() * m[1])).exp();
        let ki = k.index() - 1;
        Ok(integral * phase / (m[ki] - l[ki]))
    }

    /// The `i = 1` form when admissible, otherwise the `i = 2` form.
    pub fn rho_auto(&self, l: Lambda, m: Lambda) -> Result<(C64, Axis)> {
        match self.rho_structured(l, m, Axis::One) {
            Err(Error::PoleProximity { .. }) => Ok((self.rho_structured(l, m, Axis::Two)?, Axis::Two)),
            other => other.map(|v| (v, Axis::One)),
        }
    }

    /// `Γe^{iλx} = −i·diag(λ₂I, λ₁I)⁻¹(ψ(λ) − col[0, e^{iλ₁x₁}, 0, e^{iλ₂x₂}])`.
    pub fn gamma_apply(&self, l: Lambda) -> Result<Vec<C64>> {
        if l[0] == C64::new(0.0, 0.0) || l[1] == C64::new(0.0, 0.0) {
            return Err(Error::invalid("Γ needs λ₁ ≠ 0 and λ₂ ≠ 0"));
        }
        let psi = self.psi(l)?;
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let mut v = psi.stacked();
        for a in 0..n1 {
            v[n1 + a] -= (I * l[0] * self.grid.midpoint(Axis::One, a)).exp();
        }
        for b in 0..n2 {
            v[2 * n1 + n2 + b] -= (I * l[1] * self.grid.midpoint(Axis::Two, b)).exp();
        }
        for (j, z) in v.iter_mut().enumerate() {
            let d = if j < 2 * n1 { l[1] } else { l[0] };
            *z = -I * *z / d;
        }
        Ok(v)
    }

    /// `‖Γe^{iλx}‖ / ‖e^{iλx}‖` with the weighted norms of the spaces.
    pub fn gamma_ratio(&self, l: Lambda) -> Result<f64> {
        let v = self.gamma_apply(l)?;
        let m1 = 2 * self.grid.n1();
        let num = self.grid.h1() * v[..m1].iter().map(|z| z.norm_sqr()).sum::<f64>()
            + self.grid.h2() * v[m1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        let den = self.grid.norm(&exp_grid(&self.grid, l));
        Ok(num.sqrt() / den)
    }
}

/// Outcome of sampling `‖Γe^{iλx}‖/‖e^{iλx}‖` over a set of λ.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaStudy {
    pub ratios: Vec<(Lambda, f64)>,
    pub max_ratio: f64,
}

pub fn gamma_norm_study(ev: &RhoEvaluator, lambdas: &[Lambda]) -> Result<GammaStudy> {
    let ratios: Vec<(Lambda, f64)> =
        lambdas.iter().map(|&l| Ok((l, ev.gamma_ratio(l)?))).collect::<Result<_>>()?;
    let max_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(GammaStudy { ratios, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{KernelModel, SurfaceSpec};

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(1.0, 1.0, n, n).unwrap()
    }

    fn identity_ev(n: usize) -> RhoEvaluator {
        let s = ConvOperator::from_model(&KernelModel::scalar(1.0), &grid(n)).unwrap();
        RhoEvaluator::new(&s, &Tolerances::default()).unwrap()
    }

    fn exp_ev(n: usize) -> (Solver, RhoEvaluator) {
        let m = KernelModel::with_sigma(1.0, SurfaceSpec::Exp { amp: 0.3, b1: 1.0, b2: 1.0 }).normalized(&grid(n));
        let s = ConvOperator::from_model(&m, &grid(n)).unwrap();
        let solver = Solver::new(&s, &Tolerances::default()).unwrap();
        let ev = RhoEvaluator::from_solver(&solver).unwrap();
        (solver, ev)
    }

    #[test]
    fn theta_is_one_on_the_axes() {
        let (_, ev) = exp_ev(6);
        assert_eq!(ev.theta(real_lambda(0.0, 2.5)), C64::new(1.0, 0.0));
        assert_eq!(ev.theta(real_lambda(-1.5, 0.0)), C64::new(1.0, 0.0));
    }

    #[test]
    fn theta_identity_kernel_closed_form() {
        let ev = identity_ev(8);
        let g = ev.grid;
        let l = real_lambda(0.7, -1.3);
        let q = |lk: C64, axis: Axis| -> C64 {
            (0..g.n(axis)).map(|a| (I * lk * (g.omega(axis) - g.midpoint(axis, a))).exp()).sum::<C64>() * g.h(axis)
        };
        let want = 1.0 + l[0] * l[1] / 4.0 * q(l[0], Axis::One) * q(l[1], Axis::Two);
        assert!((ev.theta(l) - want).norm() < 1e-14);
    }

    #[test]
    fn g_at_origin_is_identity() {
        let (_, ev) = exp_ev(4);
        let g = ev.assemble_g(real_lambda(0.0, 0.0));
        assert!(g.sub(&CMatrix::identity(16)).max_abs() == 0.0);
        let psi = ev.psi(real_lambda(0.0, 0.0)).unwrap();
        assert_eq!(psi.first.first(), &[C64::new(0.0, 0.0); 4]);
        assert_eq!(psi.first.second(), &[C64::new(1.0, 0.0); 4]);
    }

    #[test]
    fn structured_matches_direct_for_identity() {
        let ev = identity_ev(8);
        let s = ConvOperator::from_model(&KernelModel::scalar(1.0), &grid(8)).unwrap();
        let solver = Solver::new(&s, &Tolerances::default()).unwrap();
        let (l, m) = (real_lambda(0.3, 1.1), real_lambda(-0.4, 0.6));
        let d = rho_direct(&solver, l, m).unwrap();
        let r1 = ev.rho_structured(l, m, Axis::One).unwrap();
        let r2 = ev.rho_structured(l, m, Axis::Two).unwrap();
        assert!((r1 - d).norm() / d.norm() < 5e-2, "{r1} vs {d}");
        assert!((r2 - d).norm() / d.norm() < 5e-2, "{r2} vs {d}");
    }

    #[test]
    fn pole_errors() {
        let ev = identity_ev(4);
        let l = real_lambda(0.3, 1.1);
        assert!(matches!(
            ev.rho_structured(l, real_lambda(0.5, 1.1), Axis::One),
            Err(Error::PoleProximity { k: 2, advise: 2, .. })
        ));
        assert!(matches!(ev.rho_structured(l, l, Axis::One), Err(Error::UnsupportedEvaluation)));
        let (_, used) = ev.rho_auto(l, real_lambda(0.5, 1.1)).unwrap();
        assert_eq!(used, Axis::Two);
    }

    #[test]
    fn corrupted_pair_is_rejected() {
        let (_, ev) = exp_ev(6);
        let bad = GMatrix::new(Axis::Two, Axis::One, ev.grid, ev.g21.matrix().scale(C64::new(-1.0, 0.0))).unwrap();
        let res = RhoEvaluator::from_parts(ev.g12.clone(), bad, ev.h.clone(), &Tolerances::default());
        assert!(matches!(res, Err(Error::GSymmetry { .. })));
    }

    #[test]
    fn gamma_needs_nonzero_lambda() {
        let ev = identity_ev(4);
        assert!(matches!(ev.gamma_apply(real_lambda(0.0, 1.0)), Err(Error::InvalidArgument(_))));
        assert!(ev.gamma_ratio(real_lambda(1e-3, 1e-3)).unwrap().is_finite());
    }

    #[test]
    fn cache_does_not_change_results() {
        let (_, ev) = exp_ev(5);
        let l = real_lambda(1.0, 2.0);
        let a = ev.psi(l).unwrap();
        let b = ev.psi(l).unwrap();
        assert_eq!(a, b);
        let (_, fresh) = exp_ev(5);
        assert_eq!(fresh.without_cache().psi(l).unwrap(), a);
    }
}
