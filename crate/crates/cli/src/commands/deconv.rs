//! `deconv`: blur an image with `S`, recover it with `S⁻¹`, report PSNR.

use serde::Serialize;

use diffkern2d_core::inversion::Solver;
use diffkern2d_core::kernel::samples_for;
use diffkern2d_core::{ConvOperator, GridFn, GridSpec, C64};

use crate::config::{Settings, Synthetic};
use crate::error::CliError;
use crate::image::{psnr, Image};
use crate::report::{Check, GridMeta, Header, Outcome, Writer};

#[derive(Serialize)]
struct Report<'a> {
    header: Header,
    grid: GridMeta,
    source: String,
    /// `None` when the recovered image equals the original exactly.
    psnr_db: Option<f64>,
    exact: bool,
    max_abs_error: f64,
    blur_psnr_db: Option<f64>,
    condition: Option<f64>,
    checks: &'a [Check],
    passed: bool,
}

fn checkerboard(n1: usize, n2: usize, tile: usize, maxval: u32) -> Result<Image, CliError> {
    if tile == 0 {
        return Err(CliError::usage("checkerboard tile must be positive"));
    }
    let pixels = (0..n2)
        .flat_map(|r| (0..n1).map(move |c| if (r / tile + c / tile).is_multiple_of(2) { maxval as f64 } else { 0.0 }))
        .collect();
    Image::new(n1, n2, pixels, maxval as f64)
}

fn to_grid(img: &Image, grid: GridSpec) -> GridFn {
    GridFn::new(grid, img.pixels.iter().map(|&p| C64::new(p, 0.0)).collect()).expect("image matches grid")
}

fn from_grid(f: &[C64], like: &Image) -> Image {
    Image { width: like.width, height: like.height, pixels: f.iter().map(|z| z.re).collect(), peak: like.peak }
}

pub fn run(s: &Settings) -> Result<Outcome, CliError> {
    let cfg = &s.config.deconv;
    let gc = s.config.grid;
    let (original, source, maxval) = match (&cfg.input, &cfg.synthetic) {
        (Some(_), Some(_)) => return Err(CliError::usage("[deconv] takes either `input` or `synthetic`, not both")),
        (Some(p), None) => {
            let path = s.resolve_input(p);
            let img = Image::read(&path)?;
            let maxval = img.peak.round().max(1.0) as u32;
            (img, path.display().to_string(), maxval)
        }
        (None, Some(Synthetic::Checkerboard { tile, maxval })) => {
            let n1 = gc.n1.unwrap_or(s.sizes[0]);
            let n2 = gc.n2.unwrap_or(s.sizes[0]);
            (checkerboard(n1, n2, *tile, *maxval)?, format!("checkerboard {n1}×{n2}, tile {tile}"), *maxval)
        }
        (None, None) => return Err(CliError::usage("[deconv] needs an `input` image or a `synthetic` pattern")),
    };
    for (want, got, what) in [(gc.n1, original.width, "width"), (gc.n2, original.height, "height")] {
        if let Some(n) = want {
            if n != got {
                return Err(CliError::usage(format!(
                    "image {what} is {got} but the grid expects {n} ({}×{} image, grid {}×{})",
                    original.width,
                    original.height,
                    gc.n1.unwrap_or(original.width),
                    gc.n2.unwrap_or(original.height)
                )));
            }
        }
    }
    let grid = GridSpec::new(gc.omega1, gc.omega2, original.width, original.height)?;
    let op = ConvOperator::new(samples_for(s.kernel(), &grid)?);
    let f = to_grid(&original, grid);
    let blurred = op.apply(&f)?;

    let (recovered, condition) = if op.is_scalar() && op.c() != 0.0 {
        let c = op.c();
        (blurred.values().iter().map(|z| z / c).collect::<Vec<_>>(), Some(1.0))
    } else {
        let solver = Solver::new(&op, &s.tol)?;
        (solver.solve(&blurred)?.into_values(), solver.condition())
    };
    let blurred_img = from_grid(blurred.values(), &original);
    let recovered_img = from_grid(&recovered, &original);
    let max_abs_error = original.pixels.iter().zip(&recovered_img.pixels).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let exact = max_abs_error == 0.0;
    let db = psnr(&original.pixels, &recovered_img.pixels, original.peak);

    let check = match db {
        None => Check::new("psnr", true, None, Some(cfg.min_psnr), "recovered image equals the original exactly"),
        Some(v) => Check::new("psnr", v >= cfg.min_psnr, Some(v), Some(cfg.min_psnr), format!("{v:.3} dB (needs ≥ {} dB)", cfg.min_psnr)),
    };
    let checks = vec![check];
    let passed = !checks.iter().any(Check::failed);

    let mut w = Writer::new(&s.out)?;
    if cfg.synthetic.is_some() {
        w.text("original.pgm", &original.to_p2(maxval))?;
    }
    w.text("blurred.pgm", &blurred_img.to_p2(maxval))?;
    w.text("recovered.pgm", &recovered_img.to_p2(maxval))?;
    w.text("recovered.csv", &recovered_img.to_csv())?;
    w.json(
        "deconv.json",
        &Report {
            header: Header::new("deconv", s),
            grid: GridMeta::from(&grid),
            source,
            psnr_db: db,
            exact,
            max_abs_error,
            blur_psnr_db: psnr(&original.pixels, &blurred_img.pixels, original.peak),
            condition,
            checks: &checks,
            passed,
        },
    )?;
    Ok(Outcome { command: "deconv", checks, files: w.into_files() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkerboard_pattern() {
        let img = checkerboard(4, 2, 2, 9).unwrap();
        assert_eq!(img.pixels, vec![9.0, 9.0, 0.0, 0.0, 9.0, 9.0, 0.0, 0.0]);
        assert!(checkerboard(4, 4, 0, 9).is_err());
    }
}
