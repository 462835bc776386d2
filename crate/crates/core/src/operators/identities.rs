//! Residuals of the operator identities
//!
//! ```text
//! A_kS − SA_k* = i·Π_kΠ̂_k                              (k = 1, 2)
//! 𝒜ᵢM₄ₖ − M₄ₖAᵢ* = i·(K₁ᵢM₂ᵢ + K₂ᵢK₄)                  (i ≠ k)
//! ```
//!
//! and the numerical rank of the displacement `A_kS − SA_k*`.

use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::kernel::KernelSamples;
use crate::linalg::CMatrix;
use crate::operators::conv::ConvOperator;
use crate::operators::integration::{cal_a_matrix, integrate_columns, times_adjoint_right};
use crate::operators::structured::{k_matrix, m_matrix, KName, PiPair};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

fn relative(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// `A_kS − SA_k*` for a dense `S`.
pub fn displacement(k: Axis, s_dense: &CMatrix, grid: &crate::grid::GridSpec) -> CMatrix {
    let left = integrate_columns(grid, k, s_dense, false);
    let right = times_adjoint_right(grid, k, s_dense);
    left.sub(&right)
}

/// `‖A_kS − SA_k* − iΠ_kΠ̂_k‖_F / ‖S‖_F`.
pub fn displacement_identity_residual(k: Axis, s: &ConvOperator, pi: &PiPair) -> Result<f64> {
    if pi.k != k {
        return Err(Error::invalid(format!("Π pair is for k = {}, residual requested for k = {}", pi.k.index(), k.index())));
    }
    let dense = s.assemble_dense()?;
    let d = displacement(k, &dense, s.grid());
    let rhs = pi.pi_dense().matmul(&pi.pi_hat_dense()).scale(I);
    Ok(relative(d.sub(&rhs).frobenius_norm(), dense.frobenius_norm()))
}

/// `‖𝒜ᵢM₄ₖ − M₄ₖAᵢ* − i(K₁ᵢM₂ᵢ + K₂ᵢK₄)‖_F / ‖M₄ₖ‖_F`.
pub fn m4_identity_residual(i: Axis, k: Axis, samples: &KernelSamples) -> Result<f64> {
    if i == k {
        return Err(Error::invalid(format!("the M₄ₖ identity needs i ≠ k, got i = k = {}", i.index())));
    }
    let g = *samples.grid();
    let m4k = m_matrix(4, k.index(), samples)?;
    let m2i = m_matrix(2, i.index(), samples)?;
    let left = cal_a_matrix(&g, i).matmul(&m4k).sub(&times_adjoint_right(&g, i, &m4k));
    let rhs = k_matrix(KName::K1(i), samples)
        .matmul(&m2i)
        .add(&k_matrix(KName::K2(i), samples).matmul(&k_matrix(KName::K4, samples)))
        .scale(I);
    Ok(relative(left.sub(&rhs).frobenius_norm(), m4k.frobenius_norm()))
}

/// Numerical rank (singular values above `rel·σ₁`) of `A_kS − SA_k*`.
pub fn displacement_rank(k: Axis, s: &ConvOperator, rel: f64) -> Result<usize> {
    let dense = s.assemble_dense()?;
    Ok(displacement(k, &dense, s.grid()).numerical_rank(rel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::kernel::{sample_kernel, KernelModel, SurfaceSpec};
    use crate::operators::integration::integration_op;
    use crate::operators::structured::assemble_pi;
    use crate::stats::fitted_order;

    fn op(model: &KernelModel, n: usize) -> ConvOperator {
        let g = GridSpec::new(1.0, 1.0, n, n).unwrap();
        ConvOperator::new(sample_kernel(model, &g).unwrap().normalized())
    }

    #[test]
    fn columnwise_integration_matches_dense_product() {
        let g = GridSpec::new(1.0, 1.0, 3, 4).unwrap();
        let x = CMatrix::from_fn(12, 5, |r, c| C64::new((r * 7 + c) as f64 % 3.0, (r + 2 * c) as f64 % 5.0));
        for axis in [Axis::One, Axis::Two] {
            let a = integration_op(&g, axis).to_dense().unwrap();
            assert!(integrate_columns(&g, axis, &x, false).sub(&a.matmul(&x)).max_abs() < 1e-14);
            let xt = x.adjoint();
            assert!(times_adjoint_right(&g, axis, &xt).sub(&xt.matmul(&a.adjoint())).max_abs() < 1e-14);
        }
    }

    #[test]
    fn identity_kernel_is_exact() {
        let s = op(&KernelModel::scalar(1.0), 8);
        for k in [Axis::One, Axis::Two] {
            let pi = assemble_pi(k, s.samples()).unwrap();
            assert!(displacement_identity_residual(k, &s, &pi).unwrap() <= 1e-12);
            assert!(m4_identity_residual(k.other(), k, s.samples()).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn equal_axes_rejected() {
        let s = op(&KernelModel::scalar(1.0), 4);
        assert!(matches!(m4_identity_residual(Axis::One, Axis::One, s.samples()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn exp_kernel_converges() {
        let m = KernelModel::with_sigma(1.0, SurfaceSpec::Exp { amp: 0.3, b1: 1.0, b2: 1.0 });
        let sizes = [8, 16];
        let mut disp = vec![];
        let mut m4 = vec![];
        for &n in &sizes {
            let s = op(&m, n);
            let pi = assemble_pi(Axis::One, s.samples()).unwrap();
            disp.push(displacement_identity_residual(Axis::One, &s, &pi).unwrap());
            m4.push(m4_identity_residual(Axis::Two, Axis::One, s.samples()).unwrap());
        }
        assert!(disp[0] / disp[1] >= 1.6, "{disp:?}");
        assert!(m4[0] / m4[1] >= 1.6, "{m4:?}");
        assert!(fitted_order(&sizes, &disp).unwrap() >= 0.8);
    }

    #[test]
    fn displacement_rank_bound() {
        let m = KernelModel::with_sigma(1.0, SurfaceSpec::Exp { amp: 0.3, b1: 1.0, b2: 1.0 });
        let s = op(&m, 8);
        assert!(displacement_rank(Axis::One, &s, 1e-10).unwrap() <= 18);
        let id = op(&KernelModel::scalar(1.0), 4);
        assert!(displacement_rank(Axis::One, &id, 1e-10).unwrap() <= 10);
    }
}
