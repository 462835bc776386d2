//! `rho`: direct and structured ρ-tables over a λ/μ sample, with their
//! difference statistics. Pairs where the requested form sits on a pole are
//! skipped with a reason instead of aborting the run.

use rayon::prelude::*;
use serde::Serialize;

use diffkern2d_core::export::sci;
use diffkern2d_core::inversion::{product_set, rho_direct_table, Lambda, RhoEvaluator, Solver};
use diffkern2d_core::kernel::samples_for;
use diffkern2d_core::tolerances::DENSE_GUARD;
use diffkern2d_core::{Axis, ConvOperator, Error, C64};

use crate::config::{FormChoice, PairMode, Settings};
use crate::error::CliError;
use crate::report::{Check, GridMeta, Header, Outcome, Writer};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub row: usize,
    pub lambda: [f64; 2],
    pub mu: [f64; 2],
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub evaluated: usize,
    pub skipped: usize,
    pub max_relative_error: Option<f64>,
    pub mean_relative_error: Option<f64>,
    pub worst_row: Option<usize>,
    /// Rows evaluated with each form.
    pub form_counts: [usize; 2],
}

#[derive(Serialize)]
struct Report<'a> {
    header: Header,
    grid: GridMeta,
    pairs: PairMode,
    form: FormChoice,
    rows: usize,
    information_count: usize,
    g_symmetry: f64,
    condition: Option<f64>,
    stats: Stats,
    skipped: &'a [Skipped],
    checks: &'a [Check],
    passed: bool,
}

struct Row {
    l: Lambda,
    m: Lambda,
    direct: C64,
    structured: Result<(C64, Axis), String>,
}

fn re2(l: Lambda) -> [f64; 2] {
    [l[0].re, l[1].re]
}

fn csv_row(l: Lambda, m: Lambda, r: C64) -> Vec<String> {
    [l[0].re, l[0].im, l[1].re, l[1].im, m[0].re, m[0].im, m[1].re, m[1].im, r.re, r.im].iter().map(|x| sci(*x)).collect()
}

const COLUMNS: [&str; 10] = ["lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im", "mu1_re", "mu1_im", "mu2_re", "mu2_im", "rho_re", "rho_im"];

fn structured(ev: &RhoEvaluator, l: Lambda, m: Lambda, form: FormChoice) -> Result<Result<(C64, Axis), String>, CliError> {
    let res = match form {
        FormChoice::Auto => ev.rho_auto(l, m),
        FormChoice::One => ev.rho_structured(l, m, Axis::One).map(|v| (v, Axis::One)),
        FormChoice::Two => ev.rho_structured(l, m, Axis::Two).map(|v| (v, Axis::Two)),
    };
    match res {
        Ok(v) => Ok(Ok(v)),
        Err(e @ (Error::PoleProximity { .. } | Error::UnsupportedEvaluation | Error::NearSingularG { .. })) => {
            Ok(Err(e.to_string()))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn run(s: &Settings) -> Result<Outcome, CliError> {
    let cfg = &s.config.rho;
    let grid = s.single_grid(cfg.n)?;
    if grid.len() > DENSE_GUARD {
        return Err(CliError::usage(format!(
            "ρ-tables need a factored S; {}×{} has {} unknowns, above {DENSE_GUARD}",
            grid.n1(),
            grid.n2(),
            grid.len()
        )));
    }
    if cfg.lambdas.is_empty() || cfg.mus.is_empty() {
        return Err(CliError::usage("[rho] lambdas and mus must be non-empty"));
    }
    let op = ConvOperator::new(samples_for(s.kernel(), &grid)?);
    let solver = Solver::new(&op, &s.tol)?;
    let ev = RhoEvaluator::from_solver(&solver)?;

    let lambdas = product_set(&cfg.lambdas);
    let (pairs, direct): (Vec<(Lambda, Lambda)>, Vec<C64>) = match cfg.pairs {
        PairMode::Product => {
            let mus = product_set(&cfg.mus);
            let t = rho_direct_table(&solver, &lambdas, &mus)?;
            let mut pairs = Vec::new();
            let mut vals = Vec::new();
            for (q, &l) in lambdas.iter().enumerate() {
                for (p, &m) in mus.iter().enumerate() {
                    pairs.push((l, m));
                    vals.push(t[(p, q)]);
                }
            }
            (pairs, vals)
        }
        PairMode::Diagonal => {
            let t = rho_direct_table(&solver, &lambdas, &lambdas)?;
            (lambdas.iter().map(|&l| (l, l)).collect(), (0..lambdas.len()).map(|q| t[(q, q)]).collect())
        }
    };

    let evaluated: Vec<Result<(C64, Axis), String>> = pairs
        .par_iter()
        .map(|&(l, m)| structured(&ev, l, m, cfg.form))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Row> = pairs
        .iter()
        .zip(direct)
        .zip(evaluated)
        .map(|((&(l, m), direct), structured)| Row { l, m, direct, structured })
        .collect();

    let mut skipped = Vec::new();
    let mut errs = Vec::new();
    let mut form_counts = [0usize; 2];
    for (k, r) in rows.iter().enumerate() {
        match &r.structured {
            Ok((v, axis)) => {
                form_counts[axis.index() - 1] += 1;
                let den = r.direct.norm();
                let e = (v - r.direct).norm();
                errs.push((k, if den > 0.0 { e / den } else { e }));
            }
            Err(reason) => skipped.push(Skipped { row: k, lambda: re2(r.l), mu: re2(r.m), reason: reason.clone() }),
        }
    }
    let worst = errs.iter().copied().fold(None, |acc: Option<(usize, f64)>, (k, e)| match acc {
        Some((_, best)) if best >= e => acc,
        _ => Some((k, e)),
    });
    let stats = Stats {
        evaluated: errs.len(),
        skipped: skipped.len(),
        max_relative_error: worst.map(|w| w.1),
        mean_relative_error: (!errs.is_empty()).then(|| errs.iter().map(|e| e.1).sum::<f64>() / errs.len() as f64),
        worst_row: worst.map(|w| w.0),
        form_counts,
    };

    let finite = rows.iter().all(|r| r.direct.re.is_finite() && r.direct.im.is_finite());
    let mut checks = vec![Check::new("direct_finite", finite, None, None, format!("{} direct values", rows.len()))];
    match worst {
        Some((k, e)) => {
            let mut c = Check::at_most("rho_relative_error", e, s.tol.rho_rel_err);
            c.detail = format!("{} (row {k}, {} of {} rows evaluated)", c.detail, errs.len(), rows.len());
            checks.push(c);
        }
        None => checks.push(Check::new(
            "rho_relative_error",
            false,
            None,
            Some(s.tol.rho_rel_err),
            format!(
                "all {} rows skipped: no admissible structured form (first reason: {})",
                rows.len(),
                skipped.first().map_or("none", |x| x.reason.as_str())
            ),
        )),
    }
    let passed = !checks.iter().any(Check::failed);

    let mut w = Writer::new(&s.out)?;
    let direct_rows: Vec<Vec<String>> = rows.iter().map(|r| csv_row(r.l, r.m, r.direct)).collect();
    let structured_rows: Vec<Vec<String>> =
        rows.iter().filter_map(|r| r.structured.as_ref().ok().map(|(v, _)| csv_row(r.l, r.m, *v))).collect();
    w.csv("rho_direct.csv", &COLUMNS, &direct_rows)?;
    w.csv("rho_structured.csv", &COLUMNS, &structured_rows)?;
    w.json(
        "rho.json",
        &Report {
            header: Header::new("rho", s),
            grid: GridMeta::from(&grid),
            pairs: cfg.pairs,
            form: cfg.form,
            rows: rows.len(),
            information_count: ev.information_count(),
            g_symmetry: ev.symmetry_residual(),
            condition: solver.condition(),
            stats,
            skipped: &skipped,
            checks: &checks,
            passed,
        },
    )?;
    Ok(Outcome { command: "rho", checks, files: w.into_files() })
}
