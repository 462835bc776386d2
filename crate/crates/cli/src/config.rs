//! Run configuration: a TOML file with `[grid]`, `[kernel]`, `[run]`,
//! `[tolerances]`, `[rho]`, `[deconv]` and `[reconstruct]` sections, merged
//! with command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use diffkern2d_core::export::hex_digest;
use diffkern2d_core::inversion::{LAMBDA_SAMPLES, MU_SAMPLES};
use diffkern2d_core::kernel::config::parse_toml;
use diffkern2d_core::kernel::GridConfig;
use diffkern2d_core::tolerances::DENSE_GUARD;
use diffkern2d_core::{GridSpec, KernelSpec, Tolerances};

use crate::error::CliError;

pub const DEFAULT_SIZES: [usize; 3] = [8, 16, 32];
pub const DEFAULT_OUT: &str = "diffkern2d-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: GridConfig,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub rho: RhoSection,
    #[serde(default)]
    pub deconv: DeconvSection,
    #[serde(default)]
    pub reconstruct: ReconstructSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// If present, must name the command being run.
    pub command: Option<String>,
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: u64,
    /// Relative to the config file.
    pub out: Option<PathBuf>,
    /// Random vectors per grid for the FFT-vs-dense matvec check.
    #[serde(default = "default_random_vectors")]
    pub random_vectors: usize,
}

fn default_random_vectors() -> usize {
    8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PairMode {
    /// Every λ against every μ.
    #[default]
    Product,
    /// `μ = λ` for every λ.
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FormChoice {
    /// `i = 1`, or `i = 2` when the `i = 1` form sits on a pole.
    #[default]
    Auto,
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoSection {
    pub n: Option<usize>,
    /// Per-coordinate values; λ ranges over all pairs drawn from this list.
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_mus")]
    pub mus: Vec<f64>,
    #[serde(default)]
    pub pairs: PairMode,
    #[serde(default)]
    pub form: FormChoice,
}

fn default_lambdas() -> Vec<f64> {
    LAMBDA_SAMPLES.to_vec()
}

fn default_mus() -> Vec<f64> {
    MU_SAMPLES.to_vec()
}

impl Default for RhoSection {
    fn default() -> Self {
        Self { n: None, lambdas: default_lambdas(), mus: default_mus(), pairs: PairMode::Product, form: FormChoice::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "lowercase", deny_unknown_fields)]
pub enum Synthetic {
    Checkerboard {
        #[serde(default = "default_tile")]
        tile: usize,
        #[serde(default = "default_maxval")]
        maxval: u32,
    },
}

fn default_tile() -> usize {
    4
}

fn default_maxval() -> u32 {
    255
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeconvSection {
    /// P2 graymap (`.pgm`) or CSV matrix, relative to the config file.
    pub input: Option<PathBuf>,
    pub synthetic: Option<Synthetic>,
    #[serde(default = "default_min_psnr")]
    pub min_psnr: f64,
}

fn default_min_psnr() -> f64 {
    80.0
}

impl Default for DeconvSection {
    fn default() -> Self {
        Self { input: None, synthetic: None, min_psnr: default_min_psnr() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ReconstructSection {
    pub n: Option<usize>,
    /// Also write the full ρ-table as CSV (n₁²n₂² rows).
    #[serde(default)]
    pub write_table: bool,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = parse_toml(text)?;
        cfg.kernel.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))
            .map_err(CliError::Usage)?;
        Self::parse(&text)
    }
}

/// Command-line overrides shared by every command.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub sizes: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub tol: Vec<(String, f64)>,
}

/// Config merged with overrides; everything a command needs.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: RunConfig,
    pub config_dir: PathBuf,
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub out: PathBuf,
    pub tol: Tolerances,
}

#[derive(Serialize)]
struct HashInput<'a> {
    config: &'a RunConfig,
    sizes: &'a [usize],
    seed: u64,
    tolerances: &'a Tolerances,
}

impl Settings {
    pub fn new(config: RunConfig, config_path: &Path, command: &str, ov: &Overrides) -> Result<Self, CliError> {
        if let Some(c) = &config.run.command {
            if c != command {
                return Err(CliError::usage(format!("config is for `{c}` but the command is `{command}`")));
            }
        }
        let config_dir = config_path.parent().map(Path::to_path_buf).unwrap_or_default();
        let sizes = ov.sizes.clone().or_else(|| config.run.sizes.clone()).unwrap_or_else(|| DEFAULT_SIZES.to_vec());
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(CliError::usage("grid sizes must be a non-empty list of positive integers"));
        }
        let seed = ov.seed.unwrap_or(config.run.seed);
        let out = match (&ov.out, &config.run.out) {
            (Some(o), _) => o.clone(),
            (None, Some(o)) => config_dir.join(o),
            (None, None) => PathBuf::from(DEFAULT_OUT),
        };
        let mut tol = config.tolerances;
        for (k, v) in &ov.tol {
            tol.set(k, *v)?;
        }
        Ok(Self { config, config_dir, sizes, seed, out, tol })
    }

    /// SHA-256 of everything that determines the numbers in a report
    /// (the output directory is excluded).
    pub fn hash(&self) -> String {
        let input = HashInput { config: &self.config, sizes: &self.sizes, seed: self.seed, tolerances: &self.tol };
        hex_digest(serde_json::to_string(&input).expect("settings serialize").as_bytes())
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.config.kernel
    }

    /// Square grid with `n` points per side on the configured rectangle.
    pub fn grid_n(&self, n: usize) -> Result<GridSpec, CliError> {
        Ok(self.config.grid.grid_with(n)?)
    }

    /// The single grid of a one-shot command: `n` from its section, else the
    /// `[grid]` point counts, else the first size.
    pub fn single_grid(&self, section_n: Option<usize>) -> Result<GridSpec, CliError> {
        match section_n {
            Some(n) => self.grid_n(n),
            None => Ok(self.config.grid.grid(self.sizes[0])?),
        }
    }

    /// Every size must fit the dense guard.
    pub fn check_dense_sizes(&self) -> Result<(), CliError> {
        for &n in &self.sizes {
            if n * n > DENSE_GUARD {
                return Err(CliError::usage(format!(
                    "grid size {n} needs {} unknowns, above the dense limit of {DENSE_GUARD}; use sizes ≤ 64",
                    n * n
                )));
            }
        }
        Ok(())
    }

    pub fn resolve_input(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.config_dir.join(p)
        }
    }
}

/// Parses `key=value` for `--tol-override`.
pub fn parse_tol_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}
