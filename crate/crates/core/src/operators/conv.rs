//! The discretized convolution operator
//!
//! ```text
//! S f = c·f + h₁(β′ ⋆₁ f) + h₂(α′ ⋆₂ f) + h₁h₂(v ⋆ f)
//! ```
//!
//! All four parts depend only on the offset `(p₁, p₂)` between grid points, so
//! they are merged into one offset table `T(p₁, p₂)` and `S` is the BTTB matrix
//! `S[(a,b),(a′,b′)] = T(a − a′, b − b′)`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{GridFn, GridSpec};
use crate::kernel::{sample_kernel, KernelModel, KernelSamples};
use crate::linalg::CMatrix;
use crate::operators::linop::{LinOp, Space};
use crate::tolerances::{DENSE_GUARD, REAL_DENSE_GUARD};
use crate::C64;

/// `n₁n₂` above which [`ConvOperator::apply`] switches to the FFT path.
pub const FFT_THRESHOLD: usize = 256;

#[derive(Clone)]
pub struct ConvOperator {
    samples: Arc<KernelSamples>,
    grid: GridSpec,
    table: Vec<f64>,
    p1: usize,
    p2: usize,
    /// Spectrum of the padded offset table, stored column-major (x₂ fastest).
    spectrum: Vec<C64>,
    fwd1: Arc<dyn Fft<f64>>,
    inv1: Arc<dyn Fft<f64>>,
    fwd2: Arc<dyn Fft<f64>>,
    inv2: Arc<dyn Fft<f64>>,
    fft_threshold: usize,
    /// Every off-center offset is zero, so `S = c·I`.
    scalar: bool,
}

impl fmt::Debug for ConvOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvOperator")
            .field("grid", &self.grid)
            .field("c", &self.samples.c())
            .field("padded", &(self.p1, self.p2))
            .field("fft_threshold", &self.fft_threshold)
            .finish()
    }
}

impl ConvOperator {
    pub fn new(samples: KernelSamples) -> Self {
        let grid = *samples.grid();
        let (n1, n2) = (grid.n1() as i64, grid.n2() as i64);
        let (h1, h2) = (grid.h1(), grid.h2());
        let m1 = (2 * n1 - 1) as usize;
        let mut table = Vec::with_capacity(m1 * (2 * n2 - 1) as usize);
        for p2 in -(n2 - 1)..n2 {
            for p1 in -(n1 - 1)..n1 {
                let mut t = h1 * h2 * samples.v(p1, p2);
                if p2 == 0 {
                    t += h1 * samples.beta_d_h(2 * p1);
                }
                if p1 == 0 {
                    t += h2 * samples.alpha_d_h(2 * p2);
                }
                if p1 == 0 && p2 == 0 {
                    t += samples.c();
                }
                table.push(t);
            }
        }

        let (p1, p2) = (2 * grid.n1(), 2 * grid.n2());
        let mut planner = FftPlanner::<f64>::new();
        let fwd1 = planner.plan_fft_forward(p1);
        let inv1 = planner.plan_fft_inverse(p1);
        let fwd2 = planner.plan_fft_forward(p2);
        let inv2 = planner.plan_fft_inverse(p2);

        let mut op = Self {
            samples: Arc::new(samples),
            grid,
            table,
            p1,
            p2,
            spectrum: Vec::new(),
            fwd1,
            inv1,
            fwd2,
            inv2,
            fft_threshold: FFT_THRESHOLD,
            scalar: false,
        };
        let center = ((n2 - 1) * (2 * n1 - 1) + n1 - 1) as usize;
        op.scalar = op.table.iter().enumerate().all(|(k, t)| k == center || *t == 0.0);
        let mut padded = vec![C64::new(0.0, 0.0); p1 * p2];
        for q2 in -(n2 - 1)..n2 {
            for q1 in -(n1 - 1)..n1 {
                let i = q1.rem_euclid(p1 as i64) as usize;
                let j = q2.rem_euclid(p2 as i64) as usize;
                padded[j * p1 + i] = C64::new(op.offset_value(q1, q2), 0.0);
            }
        }
        op.spectrum = op.forward(padded);
        op
    }

    pub fn from_model(model: &KernelModel, grid: &GridSpec) -> Result<Self> {
        Ok(Self::new(sample_kernel(model, grid)?))
    }

    pub fn with_fft_threshold(mut self, threshold: usize) -> Self {
        self.fft_threshold = threshold;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &KernelSamples {
        &self.samples
    }

    pub fn c(&self) -> f64 {
        self.samples.c()
    }

    /// `T(p₁, p₂)`, the matrix entry for offset `(a − a′, b − b′)`.
    #[inline]
    pub fn offset_value(&self, p1: i64, p2: i64) -> f64 {
        let (n1, n2) = (self.grid.n1() as i64, self.grid.n2() as i64);
        self.table[((p2 + n2 - 1) * (2 * n1 - 1) + p1 + n1 - 1) as usize]
    }

    /// Applies `S`, choosing the FFT path above the size threshold.
    pub fn apply(&self, f: &GridFn) -> Result<GridFn> {
        if f.grid() != &self.grid {
            return Err(Error::invalid("grid function lives on a different grid than the operator"));
        }
        GridFn::new(self.grid, self.apply_slice(f.values()))
    }

    /// `S = c·I` exactly (no off-center offsets).
    pub fn is_scalar(&self) -> bool {
        self.scalar
    }

    pub fn apply_slice(&self, f: &[C64]) -> Vec<C64> {
        if self.scalar {
            assert_eq!(f.len(), self.grid.len());
            let c = self.samples.c();
            f.iter().map(|x| x * c).collect()
        } else if self.grid.len() > self.fft_threshold {
            self.apply_fft(f)
        } else {
            self.apply_direct(f)
        }
    }

    /// Direct summation over the offset table, `O((n₁n₂)²)`.
    pub fn apply_direct(&self, f: &[C64]) -> Vec<C64> {
        assert_eq!(f.len(), self.grid.len());
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let m1 = 2 * n1 - 1;
        let mut out = vec![C64::new(0.0, 0.0); f.len()];
        for b in 0..n2 {
            for a in 0..n1 {
                let mut acc = C64::new(0.0, 0.0);
                for bp in 0..n2 {
                    let row = &self.table[(b + n2 - 1 - bp) * m1..];
                    let fr = &f[bp * n1..(bp + 1) * n1];
                    for (ap, x) in fr.iter().enumerate() {
                        acc += row[a + n1 - 1 - ap] * x;
                    }
                }
                out[b * n1 + a] = acc;
            }
        }
        out
    }

    /// Zero-padded circular convolution with one forward/inverse FFT pair.
    pub fn apply_fft(&self, f: &[C64]) -> Vec<C64> {
        assert_eq!(f.len(), self.grid.len());
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let mut padded = vec![C64::new(0.0, 0.0); self.p1 * self.p2];
        for b in 0..n2 {
            padded[b * self.p1..b * self.p1 + n1].copy_from_slice(&f[b * n1..(b + 1) * n1]);
        }
        let mut spec = self.forward(padded);
        for (x, k) in spec.iter_mut().zip(&self.spectrum) {
            *x *= k;
        }
        let full = self.inverse(spec);
        let mut out = Vec::with_capacity(f.len());
        for b in 0..n2 {
            out.extend_from_slice(&full[b * self.p1..b * self.p1 + n1]);
        }
        out
    }

    /// Row FFTs, transpose, column FFTs. Output is x₂-fastest.
    fn forward(&self, mut buf: Vec<C64>) -> Vec<C64> {
        self.fwd1.process(&mut buf);
        let mut t = transpose(&buf, self.p1, self.p2);
        self.fwd2.process(&mut t);
        t
    }

    fn inverse(&self, mut t: Vec<C64>) -> Vec<C64> {
        self.inv2.process(&mut t);
        let mut buf = transpose(&t, self.p2, self.p1);
        self.inv1.process(&mut buf);
        let scale = 1.0 / (self.p1 * self.p2) as f64;
        for x in &mut buf {
            *x *= scale;
        }
        buf
    }

    /// Dense complex matrix of `S`; refused above the dense guard.
    pub fn assemble_dense(&self) -> Result<CMatrix> {
        let n = self.grid.len();
        if n > DENSE_GUARD {
            return Err(Error::SizeGuard { size: n, limit: DENSE_GUARD });
        }
        let g = self.grid;
        Ok(CMatrix::from_fn(n, n, |r, c| {
            let (a, b) = g.coords(r);
            let (ap, bp) = g.coords(c);
            C64::new(self.offset_value(a as i64 - ap as i64, b as i64 - bp as i64), 0.0)
        }))
    }

    /// Dense real matrix of `S` (the kernel is real), with a larger guard so
    /// that dense-vs-FFT timings are possible at 128×128.
    pub fn assemble_dense_real(&self) -> Result<RealDense> {
        let n = self.grid.len();
        if n > REAL_DENSE_GUARD {
            return Err(Error::SizeGuard { size: n, limit: REAL_DENSE_GUARD });
        }
        let g = self.grid;
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
            let (a, b) = g.coords(r);
            for (c, x) in row.iter_mut().enumerate() {
                let (ap, bp) = g.coords(c);
                *x = self.offset_value(a as i64 - ap as i64, b as i64 - bp as i64);
            }
        });
        Ok(RealDense { n, data })
    }

    pub fn as_linop(&self) -> LinOp {
        let op = self.clone();
        LinOp::from_fn("S", self.grid, Space::Grid, Space::Grid, move |x| op.apply_slice(x))
    }
}

fn transpose(src: &[C64], cols: usize, rows: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); src.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = src[r * cols + c];
        }
    }
    out
}

/// `S f` for a grid function on the operator's grid.
pub fn conv_apply(s: &ConvOperator, f: &GridFn) -> Result<GridFn> {
    s.apply(f)
}

/// Row-major real square matrix.
#[derive(Debug, Clone)]
pub struct RealDense {
    n: usize,
    data: Vec<f64>,
}

impl RealDense {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        self.data
            .chunks(self.n)
            .map(|row| {
                let (mut re, mut im) = (0.0, 0.0);
                for (m, z) in row.iter().zip(x) {
                    re += m * z.re;
                    im += m * z.im;
                }
                C64::new(re, im)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{ProfileSpec, SurfaceSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
        (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    fn rel(a: &[C64], b: &[C64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
        num / den.max(f64::MIN_POSITIVE)
    }

    #[test]
    fn identity_kernel_returns_input() {
        let g = GridSpec::new(1.0, 1.0, 5, 3).unwrap();
        let s = ConvOperator::from_model(&KernelModel::scalar(1.0), &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random(g.len(), &mut rng);
        assert_eq!(s.apply_direct(&f), f);
        let big = GridSpec::new(1.0, 1.0, 20, 20).unwrap();
        let s = ConvOperator::from_model(&KernelModel::scalar(1.0), &big).unwrap();
        assert!(s.is_scalar());
        let f = random(big.len(), &mut rng);
        assert_eq!(s.apply_slice(&f), f);
    }

    #[test]
    fn constant_convolution_integrates() {
        let g = GridSpec::new(1.0, 1.0, 6, 6).unwrap();
        let m = KernelModel::with_sigma(0.0, SurfaceSpec::Poly { coeffs: vec![vec![0.0], vec![0.0, 1.0]] });
        let s = ConvOperator::from_model(&m, &g).unwrap();
        let out = s.apply_direct(&vec![C64::new(1.0, 0.0); g.len()]);
        assert!(out.iter().all(|z| (z - 1.0).norm() < 1e-14));
    }

    #[test]
    fn fft_direct_and_dense_agree() {
        let m = KernelModel::new(
            1.0,
            ProfileSpec::Cos { amp: 0.1, freq: 1.0 },
            ProfileSpec::Exp { amp: 0.2, rate: 0.5 },
            SurfaceSpec::Exp { amp: 0.3, b1: 1.0, b2: 1.0 },
        );
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n1, n2) in [(8, 8), (5, 9)] {
            let g = GridSpec::new(1.0, 1.3, n1, n2).unwrap();
            let s = ConvOperator::from_model(&m, &g).unwrap();
            let dense = s.assemble_dense().unwrap();
            let real = s.assemble_dense_real().unwrap();
            for _ in 0..5 {
                let f = random(g.len(), &mut rng);
                let d = s.apply_direct(&f);
                assert!(rel(&s.apply_fft(&f), &d) < 1e-13);
                assert!(rel(&dense.mul_vec(&f), &d) < 1e-14);
                assert!(rel(&real.matvec(&f), &d) < 1e-14);
            }
        }
    }

    #[test]
    fn guards_refuse_large_assemblies() {
        let g = GridSpec::new(1.0, 1.0, 65, 64).unwrap();
        let s = ConvOperator::from_model(&KernelModel::scalar(1.0), &g).unwrap();
        assert!(matches!(s.assemble_dense(), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let g = GridSpec::new(1.0, 1.0, 4, 4).unwrap();
        let other = GridSpec::new(1.0, 1.0, 4, 5).unwrap();
        let s = ConvOperator::from_model(&KernelModel::scalar(1.0), &g).unwrap();
        assert!(s.apply(&GridFn::zeros(other)).is_err());
    }
}
