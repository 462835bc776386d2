//! Fixtures shared by the criterion benches.

use diffkern2d_core::kernel::{samples_for, Family, KernelSpec, ProfileSpec};
use diffkern2d_core::{ConvOperator, GridSpec, C64};

/// Smooth exp-family kernel with nonzero α and β.
pub fn exp_spec() -> KernelSpec {
    KernelSpec {
        c: Some(1.0),
        alpha: Some(ProfileSpec::Cos { amp: 0.1, freq: 1.0 }),
        beta: Some(ProfileSpec::Exp { amp: 0.2, rate: 0.5 }),
        normalize: true,
        family: Family::Exp { amp: 0.3, b1: 1.0, b2: 1.0 },
    }
}

pub fn exp_operator(n: usize) -> ConvOperator {
    let grid = GridSpec::new(1.0, 1.0, n, n).expect("valid grid");
    ConvOperator::new(samples_for(&exp_spec(), &grid).expect("kernel samples"))
}

/// Deterministic, non-smooth test vector.
pub fn test_vector(len: usize) -> Vec<C64> {
    (0..len).map(|j| C64::new((j as f64 * 0.731).sin(), (j as f64 * 1.37).cos())).collect()
}
