//! Discretizations of `S`, `A_k`, `A_k*`, `𝒜_k`, the `M`/`K` operators and
//! the residuals of the operator identities.

pub mod conv;
pub mod identities;
pub mod integration;
pub mod linop;
pub mod structured;

pub use conv::{conv_apply, ConvOperator, RealDense, FFT_THRESHOLD};
pub use identities::{displacement, displacement_rank, m4_identity_residual, displacement_identity_residual};
pub use integration::{
    adjoint_apply, cal_a_adjoint_apply, cal_a_apply, cal_a_matrix, integration_adjoint_op, integration_apply,
    integration_op,
};
pub use linop::{LinOp, Space};
pub use structured::{assemble_pi, k_matrix, k_op, m_matrix, m_op, KName, PiPair};
