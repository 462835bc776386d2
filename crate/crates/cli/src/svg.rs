//! Minimal static log–log line chart for convergence studies.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 60.0;
const FLOOR: f64 = 1e-18;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// `series` are `(label, y-values)` over the shared `x`. Values at or below
/// zero are drawn at the `1e-18` floor.
pub fn loglog_chart(title: &str, x_label: &str, x: &[f64], series: &[(String, Vec<f64>)]) -> String {
    let lx: Vec<f64> = x.iter().map(|v| v.max(FLOOR).log10()).collect();
    let ly: Vec<Vec<f64>> = series.iter().map(|(_, ys)| ys.iter().map(|v| v.max(FLOOR).log10()).collect()).collect();
    let (x0, x1) = bounds(lx.iter().copied());
    let (y0, y1) = bounds(ly.iter().flatten().copied());
    let px = |v: f64| PAD + (v - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |v: f64| H - PAD - (v - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{} (log10)</text>"#, W / 2.0, H - 15.0, escape(x_label));
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">{:.1}</text>"#, PAD - 40.0, py(y0), y0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12">{:.1}</text>"#, PAD - 40.0, py(y1) + 4.0, y1);
    for (xv, lv) in x.iter().zip(&lx) {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" font-size="12" text-anchor="middle">{xv}</text>"#, px(*lv), H - PAD + 18.0);
    }
    for (k, ((label, _), ys)) in series.iter().zip(&ly).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = lx.iter().zip(ys).map(|(a, b)| format!("{:.2},{:.2}", px(*a), py(*b))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        let ly_pos = PAD + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly_pos}" font-size="12" fill="{color}">{}</text>"#,
            W - PAD - 150.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
