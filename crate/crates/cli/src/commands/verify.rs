//! `verify`: operator identities, displacement ranks, g-symmetry and FFT
//! agreement across the configured grid sizes, with fitted convergence orders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use diffkern2d_core::export::sci;
use diffkern2d_core::inversion::{compute_g, g_symmetry_residual, g_transform, Solver};
use diffkern2d_core::kernel::samples_for;
use diffkern2d_core::operators::{assemble_pi, displacement_rank, m4_identity_residual, displacement_identity_residual};
use diffkern2d_core::stats::fitted_order;
use diffkern2d_core::{Axis, ConvOperator, C64};

use crate::config::Settings;
use crate::error::CliError;
use crate::report::{order_check, Check, Header, Outcome, Writer};
use crate::svg::loglog_chart;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeResult {
    pub n: usize,
    pub identity_displacement: [f64; 2],
    pub identity_m4: [f64; 2],
    pub displacement_rank: [usize; 2],
    pub rank_bound: [usize; 2],
    /// `None` when `S` could not be factored.
    pub g_symmetry: Option<f64>,
    pub transform_involution: Option<f64>,
    pub condition: Option<f64>,
    pub fft_vs_dense: f64,
    pub solve_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Orders {
    pub identity_displacement: [Option<f64>; 2],
    pub identity_m4: [Option<f64>; 2],
    pub g_symmetry: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct Report<'a> {
    header: Header,
    sizes: &'a [usize],
    per_size: &'a [SizeResult],
    orders: Orders,
    checks: &'a [Check],
    passed: bool,
}

fn relative(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

fn run_size(s: &Settings, n: usize) -> Result<SizeResult, CliError> {
    let tol = &s.tol;
    let grid = s.grid_n(n)?;
    let samples = samples_for(s.kernel(), &grid)?;
    let op = ConvOperator::new(samples);
    let pi1 = assemble_pi(Axis::One, op.samples())?;
    let pi2 = assemble_pi(Axis::Two, op.samples())?;

    let dense = op.assemble_dense()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut fft_vs_dense: f64 = 0.0;
    for _ in 0..s.config.run.random_vectors {
        let f: Vec<C64> = (0..grid.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        fft_vs_dense = fft_vs_dense.max(relative(&op.apply_fft(&f), &dense.mul_vec(&f)));
    }

    let (g_symmetry, transform_involution, condition, solve_error) = match Solver::new(&op, tol) {
        Ok(solver) => {
            let g12 = compute_g(Axis::One, Axis::Two, &solver, &pi1, &pi2)?;
            let g21 = compute_g(Axis::Two, Axis::One, &solver, &pi2, &pi1)?;
            let back = g_transform(&g_transform(&g12));
            let inv = back.matrix().sub(g12.matrix()).frobenius_norm() / g12.matrix().frobenius_norm().max(f64::MIN_POSITIVE);
            (Some(g_symmetry_residual(&g12, &g21)?), Some(inv), solver.condition(), None)
        }
        Err(e) => (None, None, None, Some(e.to_string())),
    };

    Ok(SizeResult {
        n,
        identity_displacement: [displacement_identity_residual(Axis::One, &op, &pi1)?, displacement_identity_residual(Axis::Two, &op, &pi2)?],
        identity_m4: [
            m4_identity_residual(Axis::One, Axis::Two, op.samples())?,
            m4_identity_residual(Axis::Two, Axis::One, op.samples())?,
        ],
        displacement_rank: [
            displacement_rank(Axis::One, &op, tol.rank_rel)?,
            displacement_rank(Axis::Two, &op, tol.rank_rel)?,
        ],
        rank_bound: [2 * grid.n2() + 2, 2 * grid.n1() + 2],
        g_symmetry,
        transform_involution,
        condition,
        fft_vs_dense,
        solve_error,
    })
}

pub fn run(s: &Settings) -> Result<Outcome, CliError> {
    s.check_dense_sizes()?;
    let tol = &s.tol;
    let sizes = &s.sizes;
    let per_size: Vec<SizeResult> = sizes.iter().map(|&n| run_size(s, n)).collect::<Result<_, _>>()?;
    let col = |f: &dyn Fn(&SizeResult) -> f64| per_size.iter().map(f).collect::<Vec<f64>>();

    let mut checks = vec![
        order_check("identity_displacement_k1", sizes, &col(&|r| r.identity_displacement[0]), tol),
        order_check("identity_displacement_k2", sizes, &col(&|r| r.identity_displacement[1]), tol),
        order_check("identity_m4_i1_k2", sizes, &col(&|r| r.identity_m4[0]), tol),
        order_check("identity_m4_i2_k1", sizes, &col(&|r| r.identity_m4[1]), tol),
    ];
    for k in 0..2 {
        let worst = per_size.iter().find(|r| r.displacement_rank[k] > r.rank_bound[k]);
        let detail: Vec<String> =
            per_size.iter().map(|r| format!("n={}: {} ≤ {}", r.n, r.displacement_rank[k], r.rank_bound[k])).collect();
        let shown = worst.unwrap_or(&per_size[per_size.len() - 1]);
        checks.push(Check::new(
            format!("displacement_rank_k{}", k + 1),
            worst.is_none(),
            Some(shown.displacement_rank[k] as f64),
            Some(shown.rank_bound[k] as f64),
            detail.join("; "),
        ));
    }
    let gsym: Option<Vec<f64>> = per_size.iter().map(|r| r.g_symmetry).collect();
    match gsym {
        Some(v) => {
            checks.push(order_check("g_symmetry", sizes, &v, tol));
            let inv = per_size.iter().filter_map(|r| r.transform_involution).fold(0.0, f64::max);
            checks.push(Check::at_most("transform_involution", inv, tol.agreement));
        }
        None => {
            let why = per_size.iter().find_map(|r| r.solve_error.clone()).unwrap_or_default();
            checks.push(Check::new("g_symmetry", false, None, None, format!("S is not invertible: {why}")));
        }
    }
    let fft = per_size.iter().map(|r| r.fft_vs_dense).fold(0.0, f64::max);
    checks.push(Check::at_most("fft_vs_dense", fft, tol.agreement));

    let orders = Orders {
        identity_displacement: [fitted_order(sizes, &col(&|r| r.identity_displacement[0])), fitted_order(sizes, &col(&|r| r.identity_displacement[1]))],
        identity_m4: [fitted_order(sizes, &col(&|r| r.identity_m4[0])), fitted_order(sizes, &col(&|r| r.identity_m4[1]))],
        g_symmetry: per_size.iter().map(|r| r.g_symmetry).collect::<Option<Vec<f64>>>().and_then(|v| fitted_order(sizes, &v)),
    };
    let passed = !checks.iter().any(Check::failed);

    let mut w = Writer::new(&s.out)?;
    w.json(
        "verify.json",
        &Report { header: Header::new("verify", s), sizes, per_size: &per_size, orders, checks: &checks, passed },
    )?;
    let opt = |v: Option<f64>| v.map(sci).unwrap_or_default();
    let rows: Vec<Vec<String>> = per_size
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                sci(r.identity_displacement[0]),
                sci(r.identity_displacement[1]),
                sci(r.identity_m4[0]),
                sci(r.identity_m4[1]),
                opt(r.g_symmetry),
                r.displacement_rank[0].to_string(),
                r.displacement_rank[1].to_string(),
            ]
        })
        .collect();
    w.csv(
        "convergence.csv",
        &["n", "identity_displacement_k1", "identity_displacement_k2", "identity_m4_i1_k2", "identity_m4_i2_k1", "g_symmetry", "rank_k1", "rank_k2"],
        &rows,
    )?;
    let x: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let mut series = vec![
        ("A_kS − SA_k* identity, k=1".to_string(), col(&|r| r.identity_displacement[0])),
        ("A_kS − SA_k* identity, k=2".to_string(), col(&|r| r.identity_displacement[1])),
        ("M4 identity i=1".to_string(), col(&|r| r.identity_m4[0])),
        ("M4 identity i=2".to_string(), col(&|r| r.identity_m4[1])),
    ];
    if let Some(v) = per_size.iter().map(|r| r.g_symmetry).collect::<Option<Vec<f64>>>() {
        series.push(("g symmetry".to_string(), v));
    }
    w.text("convergence.svg", &loglog_chart("Residuals under refinement", "n", &x, &series))?;
    Ok(Outcome { command: "verify", checks, files: w.into_files() })
}
