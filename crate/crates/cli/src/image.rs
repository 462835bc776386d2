//! Plain-text images: P2 graymaps and CSV matrices. Row `r`, column `c`
//! maps to grid point `(a, b) = (c, r)`.

use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// Row-major, `height` rows of `width` values.
    pub pixels: Vec<f64>,
    /// Peak value for PSNR: the P2 maxval, or the largest magnitude for CSV.
    pub peak: f64,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>, peak: f64) -> Result<Self, CliError> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(CliError::usage(format!("image data does not fill {width}×{height}")));
        }
        Ok(Self { width, height, pixels, peak })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read image {}: {e}", path.display())))?;
        let is_pgm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) || text.trim_start().starts_with("P2");
        if is_pgm {
            parse_p2(&text)
        } else {
            parse_csv(&text)
        }
    }

    /// P2 output: values rounded and clamped to `[0, maxval]`.
    pub fn to_p2(&self, maxval: u32) -> String {
        let mut s = format!("P2\n{} {}\n{maxval}\n", self.width, self.height);
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> =
                row.iter().map(|v| (v.round().clamp(0.0, maxval as f64) as u32).to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Full-precision CSV, one image row per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|v| diffkern2d_core::export::sci(*v)).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

fn parse_p2(text: &str) -> Result<Image, CliError> {
    let mut tokens = text.lines().map(|l| l.split('#').next().unwrap_or("")).flat_map(str::split_whitespace);
    if tokens.next() != Some("P2") {
        return Err(CliError::usage("graymap must start with the P2 magic number"));
    }
    let mut header = |what: &str| -> Result<usize, CliError> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| CliError::usage(format!("graymap header: missing or invalid {what}")))
    };
    let (w, h, maxval) = (header("width")?, header("height")?, header("maxval")?);
    if maxval == 0 {
        return Err(CliError::usage("graymap maxval must be positive"));
    }
    let pixels: Vec<f64> = tokens
        .map(|t| t.parse::<u32>().map(f64::from).map_err(|_| CliError::usage(format!("graymap pixel `{t}` is not an integer"))))
        .collect::<Result<_, _>>()?;
    if pixels.len() != w * h {
        return Err(CliError::usage(format!("graymap declares {w}×{h} but holds {} pixels", pixels.len())));
    }
    Image::new(w, h, pixels, maxval as f64)
}

fn parse_csv(text: &str) -> Result<Image, CliError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row = line
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::usage(format!("CSV line {}: `{}` is not a number", k + 1, t.trim()))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let h = rows.len();
    let w = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != w) {
        return Err(CliError::usage("CSV rows have different lengths"));
    }
    let pixels: Vec<f64> = rows.into_iter().flatten().collect();
    let peak = pixels.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Image::new(w, h, pixels, if peak > 0.0 { peak } else { 1.0 })
}

/// `10·log10(peak² / MSE)`; `None` when the images are identical.
pub fn psnr(original: &[f64], other: &[f64], peak: f64) -> Option<f64> {
    let mse = original.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / original.len() as f64;
    if mse == 0.0 {
        None
    } else {
        Some(10.0 * (peak * peak / mse).log10())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2_round_trip() {
        let img = parse_p2("P2\n# comment\n3 2\n255\n0 10 20\n30 40 255\n").unwrap();
        assert_eq!((img.width, img.height, img.peak), (3, 2, 255.0));
        assert_eq!(parse_p2(&img.to_p2(255)).unwrap(), img);
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_p2("P5\n1 1\n255\n0\n").is_err());
        assert!(parse_p2("P2\n2 2\n255\n0 1 2\n").is_err());
        assert!(parse_csv("1,2\n3\n").is_err());
        assert!(parse_csv("1,x\n").is_err());
    }

    #[test]
    fn csv_and_psnr() {
        let img = parse_csv("1.5,-2\n0,4\n").unwrap();
        assert_eq!(img.peak, 4.0);
        assert_eq!(psnr(&img.pixels, &img.pixels, 4.0), None);
        let noisy: Vec<f64> = img.pixels.iter().map(|v| v + 0.04).collect();
        assert!((psnr(&img.pixels, &noisy, 4.0).unwrap() - 40.0).abs() < 1e-9);
    }
}
