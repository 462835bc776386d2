//! Brute-force references: quadrature and finite-difference assemblies of
//! every operator, generating-kernel extraction, a 1D dense ρ solver for
//! separable cross-checks, and the dense reference bundle.

pub mod bundle;
pub mod generating;
pub mod one_d;
pub mod quadrature;

pub use bundle::{dense_everything, dense_inverse, g_from_inverse, BundleResiduals, DenseBundle};
pub use generating::{extract_generating_kernel, GeneratingKernel};
pub use one_d::{rho_1d, Kernel1D};
pub use quadrature::{gl4, gl4_2d, oracle_integration, oracle_k_op, oracle_m_op, oracle_s, DenseOp};
