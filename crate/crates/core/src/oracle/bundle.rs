//! Brute-force reference bundle: every operator assembled densely, `S⁻¹` by
//! a full nalgebra inverse, identity residuals, `g` blocks and a ρ-table.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::export::{write_json, write_matrix_csv};
use crate::grid::{Axis, GridSpec};
use crate::inversion::{exp_grid, g_symmetry_residual, product_set, GMatrix, Lambda, LAMBDA_SAMPLES, MU_SAMPLES};
use crate::kernel::{sample_kernel, KernelSamples, KernelSpec};
use crate::linalg::CMatrix;
use crate::operators::{
    assemble_pi, displacement_rank, m4_identity_residual, displacement_identity_residual, integration_op, k_matrix, ConvOperator,
    KName, PiPair,
};
use crate::oracle::quadrature::oracle_s;
use crate::tolerances::{Tolerances, DENSE_GUARD};
use crate::C64;

const SCHEMA: &str = "diffkern2d.bundle/1";

fn to_na(m: &CMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

fn from_na(m: &DMatrix<C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// `S⁻¹` through nalgebra's LU, independent of the crate's own factorization.
pub fn dense_inverse(s: &CMatrix) -> Result<CMatrix> {
    let inv = to_na(s).try_inverse().ok_or(Error::SingularOperator { condition: f64::INFINITY })?;
    let out = from_na(&inv);
    if !out.is_finite() {
        return Err(Error::SingularOperator { condition: f64::INFINITY });
    }
    Ok(out)
}

/// `g_ik = [K₃ᵢ; K₁ᵢ][I 0] − Π̂_k S⁻¹ Πᵢ` with an explicit inverse.
pub fn g_from_inverse(i: Axis, s_inv: &CMatrix, samples: &KernelSamples, pi_i: &PiPair, pi_k: &PiPair) -> Result<GMatrix> {
    let grid = *samples.grid();
    let k = i.other();
    let (ni, nk) = (grid.n(i), grid.n(k));
    let k3 = k_matrix(KName::K3(i), samples);
    let k1 = k_matrix(KName::K1(i), samples);
    let second = pi_k.pi_hat_dense().matmul(s_inv).matmul(&pi_i.pi_dense());
    let m = CMatrix::from_fn(2 * ni, 2 * nk, |r, c| {
        let first = match (c < nk, r < ni) {
            (false, _) => C64::new(0.0, 0.0),
            (true, true) => k3[(r, c)],
            (true, false) => k1[(r - ni, c)],
        };
        first - second[(r, c)]
    });
    GMatrix::new(i, k, grid, m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BundleResiduals {
    pub identity_displacement: [f64; 2],
    pub identity_m4: [f64; 2],
    pub displacement_rank: [usize; 2],
    pub rank_bound: [usize; 2],
    pub g_symmetry: f64,
    pub oracle_s_relative: f64,
    pub inverse_check: f64,
    pub condition_1norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct GridMeta {
    omega1: f64,
    omega2: f64,
    n1: usize,
    n2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct Manifest<'a> {
    schema: &'static str,
    grid: GridMeta,
    kernel_hash: &'a str,
    kernel: &'a KernelSpec,
    tolerances: &'a Tolerances,
    shapes: BTreeMap<String, [usize; 2]>,
    lambdas: Vec<[f64; 2]>,
    mus: Vec<[f64; 2]>,
    residuals: &'a BundleResiduals,
}

/// Everything assembled densely for one kernel on one grid.
#[derive(Debug, Clone)]
pub struct DenseBundle {
    pub grid: GridSpec,
    pub kernel: KernelSpec,
    pub kernel_hash: String,
    pub tolerances: Tolerances,
    pub matrices: BTreeMap<String, CMatrix>,
    pub g12: GMatrix,
    pub g21: GMatrix,
    pub lambdas: Vec<Lambda>,
    pub mus: Vec<Lambda>,
    /// `rho[(p, q)] = ρ(λ_q, μ_p)`.
    pub rho: CMatrix,
    pub residuals: BundleResiduals,
}

/// Builds the reference bundle; refuses grids with more than `DENSE_GUARD` points.
pub fn dense_everything(spec: &KernelSpec, grid: &GridSpec, tol: &Tolerances) -> Result<DenseBundle> {
    let n = grid.len();
    if n > DENSE_GUARD {
        return Err(Error::SizeGuard { size: n, limit: DENSE_GUARD });
    }
    spec.validate()?;
    let model = spec.model_on(grid);
    let samples = sample_kernel(&model, grid)?;
    let op = ConvOperator::new(samples.clone());
    let s = op.assemble_dense()?;
    let s_inv = dense_inverse(&s)?;
    let inverse_check = s.matmul(&s_inv).sub(&CMatrix::identity(n)).frobenius_norm() / (n as f64).sqrt();
    let condition_1norm = s.norm1() * s_inv.norm1();
    let s_oracle = oracle_s(&model, grid)?;

    let pis = [assemble_pi(Axis::One, &samples)?, assemble_pi(Axis::Two, &samples)?];
    let g12 = g_from_inverse(Axis::One, &s_inv, &samples, &pis[0], &pis[1])?;
    let g21 = g_from_inverse(Axis::Two, &s_inv, &samples, &pis[1], &pis[0])?;

    let residuals = BundleResiduals {
        identity_displacement: [displacement_identity_residual(Axis::One, &op, &pis[0])?, displacement_identity_residual(Axis::Two, &op, &pis[1])?],
        identity_m4: [
            m4_identity_residual(Axis::One, Axis::Two, &samples)?,
            m4_identity_residual(Axis::Two, Axis::One, &samples)?,
        ],
        displacement_rank: [
            displacement_rank(Axis::One, &op, tol.rank_rel)?,
            displacement_rank(Axis::Two, &op, tol.rank_rel)?,
        ],
        rank_bound: [2 * grid.n2() + 2, 2 * grid.n1() + 2],
        g_symmetry: g_symmetry_residual(&g12, &g21)?,
        oracle_s_relative: s_oracle.relative_difference(&s)?,
        inverse_check,
        condition_1norm,
    };

    let lambdas = product_set(&LAMBDA_SAMPLES);
    let mus = product_set(&MU_SAMPLES);
    let el = CMatrix::from_columns(n, &lambdas.iter().map(|&l| exp_grid(grid, l)).collect::<Vec<_>>());
    let em = CMatrix::from_columns(n, &mus.iter().map(|&m| exp_grid(grid, m)).collect::<Vec<_>>());
    let rho = em.adjoint().matmul(&s_inv).matmul(&el).scale(C64::new(grid.cell_area(), 0.0));

    let mut matrices = BTreeMap::new();
    matrices.insert("S".to_string(), s);
    matrices.insert("S_inv".to_string(), s_inv);
    matrices.insert("S_oracle".to_string(), s_oracle.matrix);
    for k in [Axis::One, Axis::Two] {
        matrices.insert(format!("A{}", k.index()), integration_op(grid, k).to_dense()?);
    }
    for (k, pi) in pis.iter().enumerate() {
        matrices.insert(format!("Pi{}", k + 1), pi.pi_dense());
        matrices.insert(format!("PiHat{}", k + 1), pi.pi_hat_dense());
    }
    matrices.insert("g12".to_string(), g12.matrix().clone());
    matrices.insert("g21".to_string(), g21.matrix().clone());
    matrices.insert("rho".to_string(), rho.clone());

    Ok(DenseBundle {
        grid: *grid,
        kernel: spec.clone(),
        kernel_hash: spec.hash(),
        tolerances: *tol,
        matrices,
        g12,
        g21,
        lambdas,
        mus,
        rho,
        residuals,
    })
}

impl DenseBundle {
    /// Writes `<name>.csv` per matrix plus `manifest.json`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, m) in &self.matrices {
            write_matrix_csv(&dir.join(format!("{name}.csv")), m)?;
        }
        let as_pairs = |v: &[Lambda]| v.iter().map(|l| [l[0].re, l[1].re]).collect::<Vec<_>>();
        let manifest = Manifest {
            schema: SCHEMA,
            grid: GridMeta {
                omega1: self.grid.omega1(),
                omega2: self.grid.omega2(),
                n1: self.grid.n1(),
                n2: self.grid.n2(),
            },
            kernel_hash: &self.kernel_hash,
            kernel: &self.kernel,
            tolerances: &self.tolerances,
            shapes: self.matrices.iter().map(|(k, m)| (k.clone(), [m.rows(), m.cols()])).collect(),
            lambdas: as_pairs(&self.lambdas),
            mus: as_pairs(&self.mus),
            residuals: &self.residuals,
        };
        write_json(&dir.join("manifest.json"), &manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inversion::{compute_g, rho_direct, Solver};
    use crate::kernel::Family;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(1.0, 1.0, n, n).unwrap()
    }

    #[test]
    fn identity_bundle_is_exact() {
        let spec = KernelSpec::from_family(Family::Identity);
        let b = dense_everything(&spec, &grid(6), &Tolerances::default()).unwrap();
        for r in b.residuals.identity_displacement.iter().chain(&b.residuals.identity_m4) {
            assert!(*r <= 1e-12, "{:?}", b.residuals);
        }
        assert!(b.residuals.g_symmetry <= 1e-12);
    }

    #[test]
    fn exp_bundle_g_matches_solver_route() {
        let spec = KernelSpec::from_family(Family::Exp { amp: 0.3, b1: 1.0, b2: 1.0 });
        let g = grid(8);
        let tol = Tolerances::default();
        let b = dense_everything(&spec, &g, &tol).unwrap();
        let op = ConvOperator::new(crate::kernel::samples_for(&spec, &g).unwrap());
        let solver = Solver::new(&op, &tol).unwrap();
        let (p1, p2) = (assemble_pi(Axis::One, op.samples()).unwrap(), assemble_pi(Axis::Two, op.samples()).unwrap());
        let g12 = compute_g(Axis::One, Axis::Two, &solver, &p1, &p2).unwrap();
        let rel = g12.matrix().sub(b.g12.matrix()).frobenius_norm() / b.g12.matrix().frobenius_norm();
        assert!(rel < 1e-10, "{rel}");
        let d = rho_direct(&solver, b.lambdas[7], b.mus[3]).unwrap();
        assert!((d - b.rho[(3, 7)]).norm() < 1e-10 * d.norm());
    }

    #[test]
    fn large_grid_is_refused() {
        let spec = KernelSpec::from_family(Family::Identity);
        assert!(matches!(
            dense_everything(&spec, &grid(128), &Tolerances::default()),
            Err(Error::SizeGuard { size: 16384, limit: 4096 })
        ));
    }

    #[test]
    fn writes_csv_and_manifest() {
        let dir = std::env::temp_dir().join(format!("dk2d-bundle-{}", std::process::id()));
        let spec = KernelSpec::from_family(Family::Identity);
        dense_everything(&spec, &grid(3), &Tolerances::default()).unwrap().write_to(&dir).unwrap();
        let manifest = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
        assert!(manifest.contains(&spec.hash()));
        assert!(dir.join("g12.csv").exists() && dir.join("S_inv.csv").exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
