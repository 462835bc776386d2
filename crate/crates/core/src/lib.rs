//! Discretized convolution operators on a rectangle.
//!
//! The crate models operators of the form
//!
//! ```text
//! S f = ∂₁∂₂ ∫_Ω s(x − t) f(t) dt,   Ω = (0, ω₁) × (0, ω₂)
//! ```
//!
//! on a uniform midpoint grid, together with the integration operators and
//! finite-rank factors that make up their two operator identities, the
//! ρ-function of the inverse (computed directly and through the structured
//! `g`/`θ`/`G`/`ψ` representation) and the reconstruction of `S⁻¹` from ρ.
//!
//! Module map:
//!
//! * [`grid`] and [`kernel`]: discretization conventions and the structured
//!   kernel model `s = (c/4)·sgn·sgn + ½sgn(x₁)α(x₂) + ½sgn(x₂)β(x₁) + σ`.
//! * [`operators`]: `S`, `A_k`, `A_k*`, the `M`/`K` operators, identity residuals.
//! * [`inversion`]: solves, `g`-operators, ρ (direct and structured), Γ,
//!   inverse-from-ρ and difference-kernel structure checks.
//! * [`oracle`]: brute-force quadrature/finite-difference references.

pub mod error;
pub mod export;
pub mod grid;
pub mod inversion;
pub mod kernel;
pub mod linalg;
pub mod operators;
pub mod oracle;
pub mod stats;
pub mod tolerances;

pub use error::{Error, Result};
pub use grid::{Axis, GridFn, GridSpec, LineFn, PairFn};
pub use kernel::{KernelModel, KernelSamples, KernelSpec};
pub use linalg::{CMatrix, Lu};
pub use num_complex::Complex64;
pub use operators::{ConvOperator, LinOp, PiPair, Space};
pub use tolerances::Tolerances;

/// Shorthand used throughout the crate.
pub type C64 = Complex64;
