//! The right-hand-side operators `M_jk` and `K` of the two operator
//! identities, in derivative-free form.
//!
//! Every outer `∂/∂x` is removed analytically: the derivative of a `½sgn`
//! factor contributes a point evaluation, the smooth parts contribute their
//! partial derivatives. With `t` ranging over midpoints:
//!
//! ```text
//! M₁₁f(x) = (c/2 + β(x₁))·f(x₂) + h₂Σ (½α′(x₂−t₂) + σ_{x₂}(x₁, x₂−t₂))·f(t₂)
//! M₂₁f(x₂) = h₁Σ f(t₁, x₂)                      M₃₁f(x) = f(x₂)
//! M₄₁f(x₂) = h₁Σ (c/2 − β(−t₁))·f(t₁, x₂)
//!          + h₁h₂Σ (½α′(x₂−t₂) − σ_{x₂}(−t₁, x₂−t₂))·f(t)
//! K₁₁f(x₁) = −h₂Σ s(x₁, −t₂)·f(t₂)                K₄f = h₁h₂Σ s(−t)·f(t)
//! K₃₁f = (h₂Σ f)·𝟏                                K₂ᵢ1 = 𝟏
//! ```
//!
//! and the axis-swapped counterparts `M₁₂`, `M₂₂`, `M₃₂`, `M₄₂`, `K₁₂`, `K₃₂`.

use crate::error::{Error, Result};
use crate::grid::Axis;
use crate::kernel::KernelSamples;
use crate::linalg::CMatrix;
use crate::operators::linop::{LinOp, Space};
use crate::C64;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Half-step index of midpoint `a`.
fn mid(a: usize) -> i64 {
    2 * a as i64 + 1
}

/// Half-step index of the midpoint difference `a − a′`.
fn diff(a: usize, ap: usize) -> i64 {
    2 * (a as i64 - ap as i64)
}

/// Source and target spaces of `M_jk` (`i ≠ k` is the line axis).
pub fn m_spaces(j: usize, k: Axis) -> Result<(Space, Space)> {
    let line = Space::Line(k.other());
    match j {
        1 | 3 => Ok((line, Space::Grid)),
        2 | 4 => Ok((Space::Grid, line)),
        _ => Err(Error::invalid(format!("no operator M_{j}{}; j must be 1..=4", k.index()))),
    }
}

/// Dense matrix of `M_jk`.
pub fn m_matrix(j: usize, k: usize, s: &KernelSamples) -> Result<CMatrix> {
    let axis = Axis::from_index(k).map_err(|_| Error::invalid(format!("no operator M_{j}{k}; k must be 1 or 2")))?;
    m_spaces(j, axis)?;
    let g = *s.grid();
    let (n1, n2) = (g.n1(), g.n2());
    let (h1, h2) = (g.h1(), g.h2());
    let half_c = 0.5 * s.c();
    let n = g.len();
    let m = match (j, axis) {
        (1, Axis::One) => CMatrix::from_fn(n, n2, |r, bp| {
            let (a, b) = g.coords(r);
            let mut v = h2 * (0.5 * s.alpha_d_h(diff(b, bp)) + s.sigma2_h(mid(a), diff(b, bp)));
            if b == bp {
                v += half_c + s.beta_h(mid(a));
            }
            re(v)
        }),
        (1, Axis::Two) => CMatrix::from_fn(n, n1, |r, ap| {
            let (a, b) = g.coords(r);
            let mut v = h1 * (0.5 * s.beta_d_h(diff(a, ap)) + s.sigma1_h(diff(a, ap), mid(b)));
            if a == ap {
                v += half_c + s.alpha_h(mid(b));
            }
            re(v)
        }),
        (2, Axis::One) => CMatrix::from_fn(n2, n, |b, c| if g.coords(c).1 == b { re(h1) } else { re(0.0) }),
        (2, Axis::Two) => CMatrix::from_fn(n1, n, |a, c| if g.coords(c).0 == a { re(h2) } else { re(0.0) }),
        (3, Axis::One) => CMatrix::from_fn(n, n2, |r, bp| if g.coords(r).1 == bp { re(1.0) } else { re(0.0) }),
        (3, Axis::Two) => CMatrix::from_fn(n, n1, |r, ap| if g.coords(r).0 == ap { re(1.0) } else { re(0.0) }),
        (4, Axis::One) => CMatrix::from_fn(n2, n, |b, c| {
            let (ap, bp) = g.coords(c);
            let mut v = h1 * h2 * (0.5 * s.alpha_d_h(diff(b, bp)) - s.sigma2_h(-mid(ap), diff(b, bp)));
            if b == bp {
                v += h1 * (half_c - s.beta_h(-mid(ap)));
            }
            re(v)
        }),
        (4, Axis::Two) => CMatrix::from_fn(n1, n, |a, c| {
            let (ap, bp) = g.coords(c);
            let mut v = h1 * h2 * (0.5 * s.beta_d_h(diff(a, ap)) - s.sigma1_h(diff(a, ap), -mid(bp)));
            if a == ap {
                v += h2 * (half_c - s.alpha_h(-mid(bp)));
            }
            re(v)
        }),
        _ => unreachable!("validated above"),
    };
    Ok(m)
}

/// `M_jk` as a [`LinOp`].
pub fn m_op(j: usize, k: usize, s: &KernelSamples) -> Result<LinOp> {
    let m = m_matrix(j, k, s)?;
    let (src, tgt) = m_spaces(j, Axis::from_index(k)?)?;
    LinOp::from_dense(format!("M{j}{k}"), *s.grid(), src, tgt, m)
}

/// The K-operators of the second identity family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KName {
    /// `K₁ᵢ: L²(0,ω_k) → L²(0,ω_i)`
    K1(Axis),
    /// `K₂ᵢ: ℂ → L²(0,ω_i)`
    K2(Axis),
    /// `K₃ᵢ: L²(0,ω_k) → L²(0,ω_i)`
    K3(Axis),
    /// `K₄: L²(Ω) → ℂ`
    K4,
}

impl KName {
    pub fn spaces(self) -> (Space, Space) {
        match self {
            KName::K1(i) | KName::K3(i) => (Space::Line(i.other()), Space::Line(i)),
            KName::K2(i) => (Space::Scalar, Space::Line(i)),
            KName::K4 => (Space::Grid, Space::Scalar),
        }
    }

    pub fn label(self) -> String {
        match self {
            KName::K1(i) => format!("K1{}", i.index()),
            KName::K2(i) => format!("K2{}", i.index()),
            KName::K3(i) => format!("K3{}", i.index()),
            KName::K4 => "K4".to_string(),
        }
    }
}

pub fn k_matrix(name: KName, s: &KernelSamples) -> CMatrix {
    let g = *s.grid();
    let (n1, n2) = (g.n1(), g.n2());
    let (h1, h2) = (g.h1(), g.h2());
    match name {
        KName::K1(Axis::One) => CMatrix::from_fn(n1, n2, |a, b| re(-h2 * s.s_h(mid(a), -mid(b)))),
        KName::K1(Axis::Two) => CMatrix::from_fn(n2, n1, |b, a| re(-h1 * s.s_h(-mid(a), mid(b)))),
        KName::K2(i) => CMatrix::from_fn(g.n(i), 1, |_, _| re(1.0)),
        KName::K3(Axis::One) => CMatrix::from_fn(n1, n2, |_, _| re(h2)),
        KName::K3(Axis::Two) => CMatrix::from_fn(n2, n1, |_, _| re(h1)),
        KName::K4 => CMatrix::from_fn(1, g.len(), |_, c| {
            let (a, b) = g.coords(c);
            re(h1 * h2 * s.s_h(-mid(a), -mid(b)))
        }),
    }
}

pub fn k_op(name: KName, s: &KernelSamples) -> LinOp {
    let (src, tgt) = name.spaces();
    LinOp::from_dense(name.label(), *s.grid(), src, tgt, k_matrix(name, s)).expect("shape is consistent by construction")
}

/// `Π_k = [M₁ₖ M₃ₖ]: L²₂(0,ω_i) → L²(Ω)` and `Π̂_k = [M₂ₖ; M₄ₖ]: L²(Ω) → L²₂(0,ω_i)`.
#[derive(Debug, Clone)]
pub struct PiPair {
    pub k: Axis,
    pub pi: LinOp,
    pub pi_hat: LinOp,
}

impl PiPair {
    /// The pair axis `i ≠ k`.
    pub fn pair_axis(&self) -> Axis {
        self.k.other()
    }

    pub fn pi_dense(&self) -> CMatrix {
        self.pi.to_dense().expect("Π is stored densely")
    }

    pub fn pi_hat_dense(&self) -> CMatrix {
        self.pi_hat.to_dense().expect("Π̂ is stored densely")
    }
}

pub fn assemble_pi(k: Axis, s: &KernelSamples) -> Result<PiPair> {
    let g = *s.grid();
    let kk = k.index();
    let m1 = m_matrix(1, kk, s)?;
    let m2 = m_matrix(2, kk, s)?;
    let m3 = m_matrix(3, kk, s)?;
    let m4 = m_matrix(4, kk, s)?;
    let ni = g.n(k.other());
    let n = g.len();
    let pi = CMatrix::from_fn(n, 2 * ni, |r, c| if c < ni { m1[(r, c)] } else { m3[(r, c - ni)] });
    let pi_hat = CMatrix::from_fn(2 * ni, n, |r, c| if r < ni { m2[(r, c)] } else { m4[(r - ni, c)] });
    let pair = Space::Pair(k.other());
    Ok(PiPair {
        k,
        pi: LinOp::from_dense(format!("Pi{kk}"), g, pair, Space::Grid, pi)?,
        pi_hat: LinOp::from_dense(format!("PiHat{kk}"), g, Space::Grid, pair, pi_hat)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::kernel::{sample_kernel, KernelModel};

    fn samples(c: f64, n1: usize, n2: usize) -> KernelSamples {
        let g = GridSpec::new(1.0, 1.0, n1, n2).unwrap();
        sample_kernel(&KernelModel::scalar(c), &g).unwrap()
    }

    #[test]
    fn m31_broadcasts_ones() {
        let s = samples(1.0, 3, 4);
        let out = m_op(3, 1, &s).unwrap().apply(&[re(1.0); 4]).unwrap();
        assert_eq!(out, vec![re(1.0); 12]);
    }

    #[test]
    fn zero_kernel_m11_vanishes() {
        let s = samples(0.0, 4, 4);
        assert_eq!(m_matrix(1, 1, &s).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn jump_only_expansions() {
        let s = samples(1.0, 4, 5);
        let m11 = m_matrix(1, 1, &s).unwrap();
        let m31 = m_matrix(3, 1, &s).unwrap();
        assert!(m11.sub(&m31.scale(re(0.5))).max_abs() < 1e-15);
        let m41 = m_matrix(4, 1, &s).unwrap();
        let m21 = m_matrix(2, 1, &s).unwrap();
        assert!(m41.sub(&m21.scale(re(0.5))).max_abs() < 1e-15);
    }

    #[test]
    fn invalid_indices() {
        let s = samples(1.0, 2, 2);
        assert!(matches!(m_op(5, 1, &s), Err(Error::InvalidArgument(_))));
        assert!(matches!(m_op(1, 3, &s), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn k_operator_examples() {
        let s = samples(1.0, 4, 4);
        assert_eq!(k_op(KName::K2(Axis::One), &s).apply(&[re(1.0)]).unwrap(), vec![re(1.0); 4]);
        let k31 = k_op(KName::K3(Axis::One), &s).apply(&[re(1.0); 4]).unwrap();
        assert!(k31.iter().all(|z| (z - 1.0).norm() < 1e-15));
        let k4 = k_op(KName::K4, &s).apply(&[re(1.0); 16]).unwrap();
        assert!((k4[0] - 0.25).norm() < 1e-15);
    }

    #[test]
    fn pi_hat_of_ones_for_jump_only_kernel() {
        let s = samples(1.0, 4, 4);
        let p = assemble_pi(Axis::One, &s).unwrap();
        let out = p.pi_hat.apply(&[re(1.0); 16]).unwrap();
        for (j, z) in out.iter().enumerate() {
            let want = if j < 4 { 1.0 } else { 0.5 };
            assert!((z - want).norm() < 1e-15);
        }
        let prod = p.pi_dense().matmul(&p.pi_hat_dense());
        assert!(prod.numerical_rank(1e-10) <= 8);
    }
}
