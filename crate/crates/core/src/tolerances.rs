//! Numerical thresholds shared by checks, solvers and reports.
//!
//! Every check in the crate reads its threshold from a [`Tolerances`] value so
//! that the CLI can override individual entries by name.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex assemblies are refused above this many unknowns (64×64).
pub const DENSE_GUARD: usize = 4096;

/// Real-valued dense assembly of `S` is allowed up to 128×128.
pub const REAL_DENSE_GUARD: usize = 16384;

/// Dense LU is used for `n₁n₂` up to this size, GMRES with FFT matvec above.
pub const DENSE_SOLVE_LIMIT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Agreement between two routes that should coincide up to roundoff.
    pub agreement: f64,
    /// Singular values above `rank_rel · σ₁` count toward the numerical rank.
    pub rank_rel: f64,
    /// Fitted convergence orders must reach `1 − order_slack`.
    pub order_slack: f64,
    /// Operators with a larger (estimated) condition number are refused.
    pub cond_max: f64,
    /// Backward error bound `‖S x − b‖ / ‖b‖` accepted from `solve`.
    pub solve_backward: f64,
    /// Relative residual target of the iterative solver.
    pub iterative: f64,
    /// Accepted relative residual of the g₂₁ ↔ g₁₂ relation.
    pub g_symmetry: f64,
    /// Relative pole tolerance for the structured ρ form.
    pub pole_rel: f64,
    /// Relative error bound of the inverse reconstructed from a ρ-table.
    pub reconstruction: f64,
    /// Difference-kernel structure residual certifying convolution structure.
    pub structure: f64,
    /// Bound on the direct-vs-structured relative ρ error reported by `rho`.
    pub rho_rel_err: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            agreement: 1e-12,
            rank_rel: 1e-10,
            order_slack: 0.2,
            cond_max: 1e12,
            solve_backward: 1e-9,
            iterative: 1e-10,
            g_symmetry: 1e-2,
            pole_rel: 1e-6,
            reconstruction: 1e-9,
            structure: 1e-8,
            rho_rel_err: 5e-2,
        }
    }
}

impl Tolerances {
    pub fn min_order(&self) -> f64 {
        1.0 - self.order_slack
    }

    /// Sets a field by name, as used by `--tol-override key=value`.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::invalid(format!("tolerance {key} must be finite and non-negative")));
        }
        let slot = match key {
            "agreement" => &mut self.agreement,
            "rank_rel" => &mut self.rank_rel,
            "order_slack" => &mut self.order_slack,
            "cond_max" => &mut self.cond_max,
            "solve_backward" => &mut self.solve_backward,
            "iterative" => &mut self.iterative,
            "g_symmetry" => &mut self.g_symmetry,
            "pole_rel" => &mut self.pole_rel,
            "reconstruction" => &mut self.reconstruction,
            "structure" => &mut self.structure,
            "rho_rel_err" => &mut self.rho_rel_err,
            other => return Err(Error::invalid(format!("unknown tolerance `{other}`"))),
        };
        *slot = value;
        Ok(())
    }
}
