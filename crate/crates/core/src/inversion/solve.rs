//! `S⁻¹`: dense LU at desk scale, restarted GMRES with FFT matvec above it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::linalg::{CMatrix, Lu};
use crate::operators::ConvOperator;
use crate::tolerances::{Tolerances, DENSE_SOLVE_LIMIT};
use crate::C64;

const GMRES_RESTART: usize = 60;
const GMRES_MAX_ITER: usize = 3000;

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A factored (or iteratively applied) `S`, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct Solver {
    op: ConvOperator,
    lu: Option<Lu>,
    condition: Option<f64>,
    tol: Tolerances,
}

impl Solver {
    /// Factors `S` when `n₁n₂ ≤ DENSE_SOLVE_LIMIT`; refuses operators whose
    /// estimated condition number exceeds `tol.cond_max`.
    pub fn new(op: &ConvOperator, tol: &Tolerances) -> Result<Self> {
        Self::with_limit(op, tol, DENSE_SOLVE_LIMIT)
    }

    pub fn with_limit(op: &ConvOperator, tol: &Tolerances, dense_limit: usize) -> Result<Self> {
        if op.grid().len() <= dense_limit {
            let lu = Lu::factor(&op.assemble_dense()?)?;
            let condition = lu.condition_estimate();
            if !(condition <= tol.cond_max) {
                return Err(Error::SingularOperator { condition });
            }
            Ok(Self { op: op.clone(), lu: Some(lu), condition: Some(condition), tol: *tol })
        } else {
            Ok(Self { op: op.clone(), lu: None, condition: None, tol: *tol })
        }
    }

    pub fn operator(&self) -> &ConvOperator {
        &self.op
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn is_dense(&self) -> bool {
        self.lu.is_some()
    }

    /// Estimated 1-norm condition number (dense path only).
    pub fn condition(&self) -> Option<f64> {
        self.condition
    }

    /// `S⁻¹ b`, backward-checked.
    pub fn solve_slice(&self, b: &[C64]) -> Result<Vec<C64>> {
        if b.len() != self.op.grid().len() {
            return Err(Error::invalid(format!("right-hand side has {} values, grid needs {}", b.len(), self.op.grid().len())));
        }
        let nb = norm(b);
        if nb == 0.0 {
            return Ok(vec![C64::new(0.0, 0.0); b.len()]);
        }
        let x = match &self.lu {
            Some(lu) => lu.solve(b),
            None => gmres(|v| self.op.apply_fft(v), b, self.tol.iterative, GMRES_RESTART, GMRES_MAX_ITER)?.0,
        };
        let r: Vec<C64> = self.op.apply_slice(&x).iter().zip(b).map(|(a, b)| a - b).collect();
        let residual = norm(&r) / nb;
        if !(residual <= self.tol.solve_backward) {
            return Err(Error::BackwardCheck { residual, bound: self.tol.solve_backward });
        }
        Ok(x)
    }

    pub fn solve(&self, rhs: &GridFn) -> Result<GridFn> {
        if rhs.grid() != self.op.grid() {
            return Err(Error::invalid("right-hand side lives on a different grid than the operator"));
        }
        GridFn::new(*self.op.grid(), self.solve_slice(rhs.values())?)
    }

    /// `S⁻¹ B` column by column (columns are independent, so the result does
    /// not depend on scheduling).
    pub fn solve_columns(&self, b: &CMatrix) -> Result<CMatrix> {
        let cols: Vec<Vec<C64>> =
            (0..b.cols()).into_par_iter().map(|c| self.solve_slice(&b.column(c))).collect::<Result<_>>()?;
        Ok(CMatrix::from_columns(b.rows(), &cols))
    }
}

/// One-shot `S⁻¹ rhs`.
pub fn solve(s: &ConvOperator, rhs: &GridFn, tol: &Tolerances) -> Result<GridFn> {
    Solver::new(s, tol)?.solve(rhs)
}

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations.
///
/// Returns the solution and the relative residual after every inner step.
pub fn gmres(
    apply: impl Fn(&[C64]) -> Vec<C64>,
    b: &[C64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<(Vec<C64>, Vec<f64>)> {
    let n = b.len();
    let nb = norm(b);
    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut history = Vec::new();
    if nb == 0.0 {
        return Ok((x, history));
    }
    let mut iters = 0;
    let mut last = 1.0;
    while iters < max_iter {
        let ax = apply(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        last = beta / nb;
        if last <= tol {
            return Ok((x, history));
        }
        let m = restart.min(max_iter - iters);
        let mut v: Vec<Vec<C64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h = vec![vec![C64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![C64::new(0.0, 0.0); m];
        let mut g = vec![C64::new(0.0, 0.0); m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut used = 0;
        for j in 0..m {
            let mut w = apply(&v[j]);
            for (i, vi) in v.iter().enumerate() {
                let hij: C64 = vi.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
            }
            let hn = norm(&w);
            h[j + 1][j] = C64::new(hn, 0.0);
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i].conj() * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let (a, bb) = (h[j][j], h[j + 1][j]);
            let denom = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if denom == 0.0 {
                cs[j] = 1.0;
                sn[j] = C64::new(0.0, 0.0);
            } else if a.norm() == 0.0 {
                cs[j] = 0.0;
                sn[j] = bb.conj() / bb.norm();
            } else {
                cs[j] = a.norm() / denom;
                sn[j] = (a / a.norm()) * bb.conj() / denom;
            }
            h[j][j] = cs[j] * a + sn[j] * bb;
            h[j + 1][j] = C64::new(0.0, 0.0);
            g[j + 1] = -sn[j].conj() * g[j];
            g[j] *= cs[j];
            used = j + 1;
            iters += 1;
            last = g[j + 1].norm() / nb;
            history.push(last);
            if last <= tol || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|z| z / hn).collect());
        }
        let mut y = vec![C64::new(0.0, 0.0); used];
        for i in (0..used).rev() {
            let s: C64 = (i + 1..used).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&v[k]) {
                *xi += yk * vi;
            }
        }
    }
    let ax = apply(&x);
    let r: Vec<C64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let fin = norm(&r) / nb;
    if fin <= tol {
        return Ok((x, history));
    }
    Err(Error::Convergence { iterations: iters, last: fin.max(last), history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::kernel::{KernelModel, SurfaceSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    fn exp_op(n: usize) -> ConvOperator {
        let g = GridSpec::new(1.0, 1.0, n, n).unwrap();
        ConvOperator::from_model(&KernelModel::with_sigma(1.0, SurfaceSpec::Exp { amp: 0.3, b1: 1.0, b2: 1.0 }), &g)
            .unwrap()
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let g = GridSpec::new(1.0, 1.0, 4, 4).unwrap();
        let s = ConvOperator::from_model(&KernelModel::scalar(1.0), &g).unwrap();
        let rhs = GridFn::new(g, random(16, 1)).unwrap();
        assert_eq!(solve(&s, &rhs, &Tolerances::default()).unwrap(), rhs);
    }

    #[test]
    fn round_trip_dense_and_gmres() {
        let s = exp_op(8);
        let f0 = random(64, 2);
        let b = s.apply_slice(&f0);
        let tol = Tolerances::default();
        for solver in [Solver::new(&s, &tol).unwrap(), Solver::with_limit(&s, &tol, 0).unwrap()] {
            let x = solver.solve_slice(&b).unwrap();
            let err = norm(&x.iter().zip(&f0).map(|(a, b)| a - b).collect::<Vec<_>>()) / norm(&f0);
            assert!(err < 1e-9, "dense = {}: {err}", solver.is_dense());
        }
    }

    #[test]
    fn rank_one_operator_is_singular() {
        let g = GridSpec::new(1.0, 1.0, 8, 8).unwrap();
        let m = KernelModel::with_sigma(0.0, SurfaceSpec::Poly { coeffs: vec![vec![0.0], vec![0.0, 1.0]] });
        let s = ConvOperator::from_model(&m, &g).unwrap();
        assert!(matches!(Solver::new(&s, &Tolerances::default()), Err(Error::SingularOperator { .. })));
    }

    #[test]
    fn gmres_reports_history_on_failure() {
        let b = random(10, 3);
        let res = gmres(|v| v.iter().enumerate().map(|(i, z)| z * (1.0 + i as f64)).collect(), &b, 1e-30, 2, 4);
        match res {
            Err(Error::Convergence { iterations, history, .. }) => {
                assert_eq!(iterations, 4);
                assert_eq!(history.len(), 4);
            }
            other => panic!("{other:?}"),
        }
    }
}
