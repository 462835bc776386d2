//! Analytic operators against the quadrature/finite-difference oracles, and
//! separable kernels against the 1D reference solver.

use diffkern2d_core::inversion::{product_set, rho_direct, Solver};
use diffkern2d_core::kernel::{sample_kernel, samples_for, Family, KernelSpec, ProfileSpec, SurfaceSpec};
use diffkern2d_core::operators::{integration_adjoint_op, integration_op, k_matrix, m_matrix, KName};
use diffkern2d_core::oracle::{oracle_integration, oracle_k_op, oracle_m_op, oracle_s, rho_1d, Kernel1D};
use diffkern2d_core::stats::fitted_order;
use diffkern2d_core::{Axis, ConvOperator, GridSpec, KernelModel, Tolerances};

const SIZES: [usize; 3] = [8, 16, 32];

fn smooth_model() -> KernelModel {
    KernelModel::new(
        1.0,
        ProfileSpec::Cos { amp: 0.1, freq: 1.0 },
        ProfileSpec::Exp { amp: 0.2, rate: 0.5 },
        SurfaceSpec::Exp { amp: 0.3, b1: 1.0, b2: 0.7 },
    )
}

fn grid(n: usize) -> GridSpec {
    GridSpec::new(1.0, 1.3, n, n).unwrap()
}

/// Passes when every error is at roundoff, or the fitted order is ≥ 0.8.
fn assert_converges(label: &str, errs: &[f64]) {
    if errs.iter().all(|&e| e <= 1e-12) {
        return;
    }
    let p = fitted_order(&SIZES, errs).unwrap();
    assert!(p >= 0.8, "{label}: order {p:.3}, errors {errs:?}");
}

#[test]
fn every_m_operator_converges_to_its_oracle() {
    let model = smooth_model();
    for j in 1..=4 {
        for k in 1..=2 {
            let errs: Vec<f64> = SIZES
                .iter()
                .map(|&n| {
                    let g = grid(n);
                    let s = sample_kernel(&model, &g).unwrap();
                    oracle_m_op(j, k, &model, &g).unwrap().relative_difference(&m_matrix(j, k, &s).unwrap()).unwrap()
                })
                .collect();
            assert_converges(&format!("M{j}{k}"), &errs);
        }
    }
}

#[test]
fn every_k_operator_converges_to_its_oracle() {
    let model = smooth_model();
    let names = [
        KName::K1(Axis::One),
        KName::K1(Axis::Two),
        KName::K2(Axis::One),
        KName::K2(Axis::Two),
        KName::K3(Axis::One),
        KName::K3(Axis::Two),
        KName::K4,
    ];
    for name in names {
        let errs: Vec<f64> = SIZES
            .iter()
            .map(|&n| {
                let g = grid(n);
                let s = sample_kernel(&model, &g).unwrap();
                oracle_k_op(name, &model, &g).unwrap().relative_difference(&k_matrix(name, &s)).unwrap()
            })
            .collect();
        assert_converges(&name.label(), &errs);
    }
}

#[test]
fn conv_operator_converges_to_its_oracle() {
    let model = smooth_model();
    let errs: Vec<f64> = SIZES
        .iter()
        .map(|&n| {
            let g = grid(n);
            let dense = ConvOperator::from_model(&model, &g).unwrap().assemble_dense().unwrap();
            oracle_s(&model, &g).unwrap().relative_difference(&dense).unwrap()
        })
        .collect();
    assert_converges("S", &errs);
}

#[test]
fn integration_operators_match_exact_oracle() {
    for &n in &SIZES[..2] {
        let g = grid(n);
        for axis in [Axis::One, Axis::Two] {
            let a = integration_op(&g, axis).to_dense().unwrap();
            let at = integration_adjoint_op(&g, axis).to_dense().unwrap();
            assert!(oracle_integration(&g, axis, false).unwrap().relative_difference(&a).unwrap() <= 1e-14);
            assert!(oracle_integration(&g, axis, true).unwrap().relative_difference(&at).unwrap() <= 1e-14);
        }
    }
}

fn separable_spec() -> KernelSpec {
    KernelSpec {
        c: None,
        alpha: None,
        beta: None,
        normalize: false,
        family: Family::Separable {
            c1: 1.0,
            axis1: ProfileSpec::Gaussian { amp: 0.4, width: 0.3 },
            c2: 1.5,
            axis2: ProfileSpec::Exp { amp: 0.2, rate: -1.0 },
        },
    }
}

#[test]
fn separable_operator_is_a_kronecker_product() {
    let spec = separable_spec();
    let g = GridSpec::new(1.0, 1.2, 5, 6).unwrap();
    let (f1, f2) = spec.separable_factors().unwrap();
    let k1 = Kernel1D::from_factor(&f1, &g, Axis::One).unwrap().cmatrix();
    let k2 = Kernel1D::from_factor(&f2, &g, Axis::Two).unwrap().cmatrix();
    let dense = ConvOperator::new(samples_for(&spec, &g).unwrap()).assemble_dense().unwrap();
    for r in 0..g.len() {
        for c in 0..g.len() {
            let ((a, b), (ap, bp)) = (g.coords(r), g.coords(c));
            let want = k1[(a, ap)] * k2[(b, bp)];
            assert!((dense[(r, c)] - want).norm() <= 1e-13, "({r}, {c}): {} vs {want}", dense[(r, c)]);
        }
    }
}

#[test]
fn separable_rho_is_a_product_of_1d_rhos() {
    let spec = separable_spec();
    let g = GridSpec::new(1.0, 1.0, 8, 8).unwrap();
    let (f1, f2) = spec.separable_factors().unwrap();
    let k1 = Kernel1D::from_factor(&f1, &g, Axis::One).unwrap();
    let k2 = Kernel1D::from_factor(&f2, &g, Axis::Two).unwrap();
    let solver = Solver::new(&ConvOperator::new(samples_for(&spec, &g).unwrap()), &Tolerances::default()).unwrap();
    let set = product_set(&[-1.3, 0.4, 2.2]);
    for &l in &set {
        for &m in &set {
            let want = rho_1d(&k1, l[0], m[0]).unwrap() * rho_1d(&k2, l[1], m[1]).unwrap();
            let got = rho_direct(&solver, l, m).unwrap();
            assert!((got - want).norm() <= 1e-10 * want.norm().max(1.0));
        }
    }
}
