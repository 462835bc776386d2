//! `reconstruct`: `S⁻¹` from the complete ρ-table, compared with an
//! independent dense inverse, then a difference-kernel check of its inverse.

use serde::Serialize;

use diffkern2d_core::inversion::{check_difference_kernel, inverse_from_rho, RhoTable, Solver, StructureReport};
use diffkern2d_core::kernel::samples_for;
use diffkern2d_core::oracle::dense_inverse;
use diffkern2d_core::tolerances::DENSE_SOLVE_LIMIT;
use diffkern2d_core::{ConvOperator, Error};

use crate::config::Settings;
use crate::error::CliError;
use crate::report::{Check, GridMeta, Header, Outcome, Writer};

#[derive(Serialize)]
struct Report<'a> {
    header: Header,
    grid: GridMeta,
    frequencies: usize,
    reconstruction_error: f64,
    /// Structure of the re-inverted reconstruction.
    structure: StructureReport,
    /// Structure of `S` itself, for scale.
    operator_structure: StructureReport,
    condition_estimate: Option<f64>,
    condition_1norm: f64,
    rank: usize,
    checks: &'a [Check],
    passed: bool,
}

pub fn run(s: &Settings) -> Result<Outcome, CliError> {
    let cfg = &s.config.reconstruct;
    let grid = s.single_grid(cfg.n)?;
    if grid.len() > DENSE_SOLVE_LIMIT {
        return Err(CliError::usage(format!(
            "reconstruction needs {0}² ρ values and dense {0}×{0} products; {1}×{2} is above the limit of {DENSE_SOLVE_LIMIT} unknowns. \
             Set [reconstruct] n (or the grid sizes) to at most 32 per side",
            grid.len(),
            grid.n1(),
            grid.n2()
        )));
    }
    let op = ConvOperator::new(samples_for(s.kernel(), &grid)?);
    let dense = op.assemble_dense()?;
    let solver = Solver::new(&op, &s.tol)?;
    let oracle = dense_inverse(&dense)?;

    let table = RhoTable::from_direct(&solver)?;
    let t = inverse_from_rho(&table)?;
    let reconstruction_error = t.sub(&oracle).frobenius_norm() / oracle.frobenius_norm();
    let back = t.inverse().map_err(|_| CliError::Run(Error::SingularOperator { condition: f64::INFINITY }.into()))?;
    let structure = check_difference_kernel(&back, &grid)?;
    let operator_structure = check_difference_kernel(&dense, &grid)?;

    let checks = vec![
        Check::at_most("reconstruction_error", reconstruction_error, s.tol.reconstruction),
        Check::at_most("structure_residual", structure.residual, s.tol.structure),
    ];
    let passed = !checks.iter().any(Check::failed);

    let mut w = Writer::new(&s.out)?;
    if cfg.write_table {
        w.csv(
            "rho_table.csv",
            &["lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im", "mu1_re", "mu1_im", "mu2_re", "mu2_im", "rho_re", "rho_im"],
            &table.csv_rows(),
        )?;
    }
    w.json(
        "reconstruct.json",
        &Report {
            header: Header::new("reconstruct", s),
            grid: GridMeta::from(&grid),
            frequencies: table.frequencies().len(),
            reconstruction_error,
            structure,
            operator_structure,
            condition_estimate: solver.condition(),
            condition_1norm: dense.norm1() * oracle.norm1(),
            rank: t.numerical_rank(s.tol.rank_rel),
            checks: &checks,
            passed,
        },
    )?;
    Ok(Outcome { command: "reconstruct", checks, files: w.into_files() })
}
