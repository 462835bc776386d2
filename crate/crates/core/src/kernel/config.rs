//! Key/value (TOML) description of kernel models.
//!
//! ```toml
//! [grid]
//! omega1 = 1.0
//! omega2 = 1.0
//! n1 = 8
//! n2 = 8
//!
//! [kernel]
//! c = 1.0                                        # jump coefficient
//! alpha = { profile = "cos", amp = 0.1, freq = 1.0 }
//! beta = { profile = "exp", amp = 0.2, rate = 0.5 }
//! normalize = true                               # re-centre σ on the grid
//!
//! [kernel.family]
//! type = "exp"                                   # identity | exp | poly | separable | gaussian
//! amp = 0.3
//! b1 = 1.0
//! b2 = 1.0
//! ```
//!
//! `separable` takes `c1`, `axis1`, `c2`, `axis2` (the axis profiles are the
//! antiderivatives `V_i` of the 1D convolution kernels `v_i = V_i′`) and
//! determines `c`, α and β itself, so those keys must be absent.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::model::{KernelModel, ProfileSpec, ScaledProfile, SurfaceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Family {
    Identity,
    Exp { amp: f64, b1: f64, b2: f64 },
    Poly { coeffs: Vec<Vec<f64>> },
    Separable { c1: f64, axis1: ProfileSpec, c2: f64, axis2: ProfileSpec },
    Gaussian { amp: f64, s1: f64, s2: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<ProfileSpec>,
    #[serde(default = "default_true")]
    pub normalize: bool,
    pub family: Family,
}

fn default_true() -> bool {
    true
}

/// One factor `S⁽ⁱ⁾ = c_i·I + conv(V_i′)` of a separable kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableFactor {
    pub c: f64,
    pub profile: ProfileSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_one")]
    pub omega1: f64,
    #[serde(default = "default_one")]
    pub omega2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { omega1: 1.0, omega2: 1.0, n1: None, n2: None }
    }
}

fn default_one() -> f64 {
    1.0
}

impl GridConfig {
    /// Grid with the configured point counts, falling back to `n × n`.
    pub fn grid(&self, fallback: usize) -> Result<GridSpec> {
        GridSpec::new(self.omega1, self.omega2, self.n1.unwrap_or(fallback), self.n2.unwrap_or(fallback))
    }

    /// Grid for a refinement study: both sides get `n` points.
    pub fn grid_with(&self, n: usize) -> Result<GridSpec> {
        GridSpec::new(self.omega1, self.omega2, n, n)
    }
}

/// A `[grid]` + `[kernel]` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDocument {
    #[serde(default)]
    pub grid: GridConfig,
    pub kernel: KernelSpec,
}

impl KernelDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: Self = parse_toml(text)?;
        doc.kernel.validate()?;
        Ok(doc)
    }
}

fn cfg_err(location: &str, message: impl Into<String>) -> Error {
    Error::Config { location: location.to_string(), message: message.into() }
}

fn check_profile(loc: &str, p: &ProfileSpec) -> Result<()> {
    let ok = match p {
        ProfileSpec::Zero => true,
        ProfileSpec::Const { value } => value.is_finite(),
        ProfileSpec::Linear { slope, offset } => slope.is_finite() && offset.is_finite(),
        ProfileSpec::Exp { amp, rate } => amp.is_finite() && rate.is_finite(),
        ProfileSpec::Cos { amp, freq } => amp.is_finite() && freq.is_finite(),
        ProfileSpec::Gaussian { amp, width } => amp.is_finite() && width.is_finite() && *width > 0.0,
        ProfileSpec::Poly { coeffs } => !coeffs.is_empty() && coeffs.iter().all(|c| c.is_finite()),
    };
    if ok {
        Ok(())
    } else {
        Err(cfg_err(loc, format!("invalid profile parameters {p:?}")))
    }
}

impl KernelSpec {
    pub fn from_family(family: Family) -> Self {
        Self { c: None, alpha: None, beta: None, normalize: true, family }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.c {
            if !c.is_finite() {
                return Err(cfg_err("kernel.c", "must be finite"));
            }
        }
        if let Some(a) = &self.alpha {
            check_profile("kernel.alpha", a)?;
        }
        if let Some(b) = &self.beta {
            check_profile("kernel.beta", b)?;
        }
        match &self.family {
            Family::Identity => {}
            Family::Exp { amp, b1, b2 } => {
                if !(amp.is_finite() && b1.is_finite() && b2.is_finite()) {
                    return Err(cfg_err("kernel.family", "exp parameters must be finite"));
                }
            }
            Family::Poly { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(cfg_err("kernel.family.coeffs", "need a non-empty finite coefficient table"));
                }
            }
            Family::Gaussian { amp, s1, s2 } => {
                if !(amp.is_finite() && *s1 > 0.0 && *s2 > 0.0) {
                    return Err(cfg_err("kernel.family", "gaussian needs finite amp and positive s1, s2"));
                }
            }
            Family::Separable { c1, axis1, c2, axis2 } => {
                for (key, present) in
                    [("kernel.c", self.c.is_some()), ("kernel.alpha", self.alpha.is_some()), ("kernel.beta", self.beta.is_some())]
                {
                    if present {
                        return Err(cfg_err(key, "not allowed with the separable family (set by c1, c2 and the axis profiles)"));
                    }
                }
                if !(c1.is_finite() && c2.is_finite()) {
                    return Err(cfg_err("kernel.family", "c1 and c2 must be finite"));
                }
                check_profile("kernel.family.axis1", axis1)?;
                check_profile("kernel.family.axis2", axis2)?;
            }
        }
        Ok(())
    }

    /// The kernel model, before normalization.
    pub fn model(&self) -> KernelModel {
        let c = self.c.unwrap_or(1.0);
        let alpha = self.alpha.clone().unwrap_or_default();
        let beta = self.beta.clone().unwrap_or_default();
        match &self.family {
            Family::Identity => KernelModel::new(c, alpha, beta, SurfaceSpec::Zero),
            Family::Exp { amp, b1, b2 } => {
                KernelModel::new(c, alpha, beta, SurfaceSpec::Exp { amp: *amp, b1: *b1, b2: *b2 })
            }
            Family::Poly { coeffs } => KernelModel::new(c, alpha, beta, SurfaceSpec::Poly { coeffs: coeffs.clone() }),
            Family::Gaussian { amp, s1, s2 } => {
                KernelModel::new(c, alpha, beta, SurfaceSpec::Gaussian { amp: *amp, s1: *s1, s2: *s2 })
            }
            Family::Separable { c1, axis1, c2, axis2 } => KernelModel::new(
                c1 * c2,
                ScaledProfile { factor: *c1, inner: axis2.clone() },
                ScaledProfile { factor: *c2, inner: axis1.clone() },
                SurfaceSpec::Product { axis1: axis1.clone(), axis2: axis2.clone() },
            ),
        }
    }

    /// The model actually used on `grid` (normalized when requested).
    pub fn model_on(&self, grid: &GridSpec) -> KernelModel {
        let m = self.model();
        if self.normalize {
            m.normalized(grid)
        } else {
            m
        }
    }

    pub fn separable_factors(&self) -> Option<(SeparableFactor, SeparableFactor)> {
        match &self.family {
            Family::Separable { c1, axis1, c2, axis2 } => Some((
                SeparableFactor { c: *c1, profile: axis1.clone() },
                SeparableFactor { c: *c2, profile: axis2.clone() },
            )),
            _ => None,
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("kernel spec serializes");
        hex_digest(json.as_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses a TOML document, reporting failures with line and key.
pub fn parse_toml<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let location = match e.span() {
            Some(span) => {
                let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                format!("line {line}")
            }
            None => "document".to_string(),
        };
        Error::Config { location, message: e.message().trim().to_string() }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exp_document() {
        let doc = KernelDocument::parse(
            r#"
[grid]
omega1 = 2.0
n1 = 8
n2 = 4

[kernel]
c = 1
alpha = { profile = "cos", amp = 0.1, freq = 1.0 }

[kernel.family]
type = "exp"
amp = 0.3
b1 = 1.0
b2 = 1
"#,
        )
        .unwrap();
        assert_eq!(doc.grid.omega1, 2.0);
        assert_eq!(doc.grid.omega2, 1.0);
        let g = doc.grid.grid(16).unwrap();
        assert_eq!((g.n1(), g.n2()), (8, 4));
        assert!(doc.kernel.normalize);
        assert_eq!(doc.kernel.family, Family::Exp { amp: 0.3, b1: 1.0, b2: 1.0 });
        let m = doc.kernel.model();
        assert_eq!(m.c, 1.0);
        assert!((m.alpha.value(0.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn unknown_family_reports_line() {
        let err = KernelDocument::parse("[kernel]\nc = 1.0\n[kernel.family]\ntype = \"bogus\"\n").unwrap_err();
        match err {
            Error::Config { location, message } => {
                assert!(location.starts_with("line "), "{location}");
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn misspelled_field_is_rejected() {
        let err = KernelDocument::parse("[kernel]\ncc = 1.0\n[kernel.family]\ntype = \"identity\"\n").unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        assert!(err.to_string().contains("cc"), "{err}");
    }

    #[test]
    fn separable_rejects_explicit_c() {
        let text = r#"
[kernel]
c = 2.0
[kernel.family]
type = "separable"
c1 = 1.0
c2 = 1.0
axis1 = { profile = "exp", amp = 0.2, rate = 1.0 }
axis2 = { profile = "zero" }
"#;
        match KernelDocument::parse(text).unwrap_err() {
            Error::Config { location, .. } => assert_eq!(location, "kernel.c"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn separable_model_is_a_tensor_product() {
        let spec = KernelSpec::from_family(Family::Separable {
            c1: 1.5,
            axis1: ProfileSpec::Exp { amp: 0.2, rate: 1.0 },
            c2: 0.5,
            axis2: ProfileSpec::Cos { amp: 0.3, freq: 2.0 },
        });
        let m = spec.model();
        assert_eq!(m.c, 0.75);
        let y = 0.37;
        assert!((m.alpha.derivative(y) - 1.5 * (-0.3 * 2.0 * (2.0 * y).sin())).abs() < 1e-15);
        assert!((m.beta.derivative(y) - 0.5 * 0.2 * y.exp()).abs() < 1e-15);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = KernelSpec::from_family(Family::Identity);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.c = Some(2.0);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
