//! Small fitting helpers for convergence studies.

/// Least-squares slope of `log(err)` against `log(n)`, negated.
///
/// Returns `None` when fewer than two usable points exist (non-positive errors
/// are skipped).
pub fn fitted_order(sizes: &[usize], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = sizes
        .iter()
        .zip(errors)
        .filter(|(_, e)| **e > 0.0 && e.is_finite())
        .map(|(n, e)| ((*n as f64).ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_order_data() {
        let sizes = [8, 16, 32];
        let errs: Vec<f64> = sizes.iter().map(|&n| 3.0 / (n * n) as f64).collect();
        let p = fitted_order(&sizes, &errs).unwrap();
        assert!((p - 2.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert!(fitted_order(&[8], &[1.0]).is_none());
        assert!(fitted_order(&[8, 16], &[0.0, 1.0]).is_none());
    }
}
