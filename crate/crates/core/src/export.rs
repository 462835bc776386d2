//! CSV and JSON helpers shared by reports and reference bundles.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::linalg::CMatrix;

pub use crate::kernel::config::hex_digest;

/// Full-precision scientific notation used in every exported number.
pub fn sci(x: f64) -> String {
    format!("{x:.17e}")
}

/// Writes a dense matrix as CSV (row-major, `re,im` pairs per entry).
pub fn write_matrix_csv(path: &Path, m: &CMatrix) -> Result<()> {
    fs::write(path, m.to_csv())?;
    Ok(())
}

/// Pretty JSON with a trailing newline; field order follows the struct.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// Simple CSV table writer: header plus rows of preformatted cells.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}
