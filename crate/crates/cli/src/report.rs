//! Report pieces shared by every command.

use std::path::{Path, PathBuf};

use serde::Serialize;

use diffkern2d_core::export::{write_csv, write_json};
use diffkern2d_core::stats::fitted_order;
use diffkern2d_core::{GridSpec, KernelSpec, Tolerances};

use crate::config::Settings;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable with the given inputs (for example one grid size and an
    /// order fit).
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, value: Option<f64>, bound: Option<f64>, detail: impl Into<String>) -> Self {
        let status = if passed { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, value, bound, detail: detail.into() }
    }

    /// `value ≤ bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value <= bound, Some(value), Some(bound), format!("{value:e} ≤ {bound:e}"))
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

/// Passes when every value is already at roundoff level, or when the fitted
/// order over `sizes` reaches `tol.min_order()`.
pub fn order_check(name: &str, sizes: &[usize], values: &[f64], tol: &Tolerances) -> Check {
    let max = values.iter().cloned().fold(0.0, f64::max);
    if max <= tol.agreement {
        return Check::new(name, true, Some(max), Some(tol.agreement), "exact: every value at roundoff level");
    }
    match fitted_order(sizes, values) {
        Some(p) => {
            let min = tol.min_order();
            Check::new(name, p >= min, Some(p), Some(min), format!("fitted order {p:.3} (needs ≥ {min:.3})"))
        }
        None => Check {
            name: name.into(),
            status: Status::Skipped,
            value: None,
            bound: Some(tol.min_order()),
            detail: "order fit needs at least two grid sizes".into(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMeta {
    pub omega1: f64,
    pub omega2: f64,
    pub n1: usize,
    pub n2: usize,
}

impl From<&GridSpec> for GridMeta {
    fn from(g: &GridSpec) -> Self {
        Self { omega1: g.omega1(), omega2: g.omega2(), n1: g.n1(), n2: g.n2() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header {
    pub schema: String,
    pub command: &'static str,
    pub config_hash: String,
    pub kernel_hash: String,
    pub seed: u64,
    pub kernel: KernelSpec,
    pub tolerances: Tolerances,
}

impl Header {
    pub fn new(command: &'static str, s: &Settings) -> Self {
        Self {
            schema: format!("diffkern2d.{command}/1"),
            command,
            config_hash: s.hash(),
            kernel_hash: s.kernel().hash(),
            seed: s.seed,
            kernel: s.kernel().clone(),
            tolerances: s.tol,
        }
    }
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: &'static str,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        !self.checks.iter().any(Check::failed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            crate::error::EXIT_PASS
        } else {
            crate::error::EXIT_CONTRACT
        }
    }
}

/// Collects output files in order.
pub struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let p = self.dir.join(name);
        write_json(&p, value)?;
        self.files.push(p);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let p = self.dir.join(name);
        write_csv(&p, header, rows)?;
        self.files.push(p);
        Ok(())
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let p = self.dir.join(name);
        std::fs::write(&p, body)?;
        self.files.push(p);
        Ok(())
    }

    pub fn into_files(self) -> Vec<PathBuf> {
        self.files
    }
}
