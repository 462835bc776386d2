//! Inversion: solves with `S`, the `g`-operators, ρ and reconstruction of
//! `S⁻¹` from ρ.

pub mod gops;
pub mod reconstruct;
pub mod rho;
pub mod solve;

pub use gops::{compute_g, g_symmetry_residual, g_transform, GMatrix};
pub use reconstruct::{check_difference_kernel, dft_frequencies, inverse_from_rho, RhoTable, StructureReport};
pub use rho::{
    exp_grid, gamma_norm_study, product_set, real_lambda, rho_direct, rho_direct_table, y_samples, GammaStudy, Lambda, Psi, LAMBDA_SAMPLES, MU_SAMPLES,
    RhoEvaluator,
};
pub use solve::{gmres, solve, Solver};
