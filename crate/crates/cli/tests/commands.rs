use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const IDENTITY: &str = "[kernel]\nc = 1.0\n\n[kernel.family]\ntype = \"identity\"\n";
const EXP: &str = "[kernel]\nc = 1.0\nalpha = { profile = \"cos\", amp = 0.1, freq = 1.0 }\nbeta = { profile = \"exp\", amp = 0.2, rate = 0.5 }\n\n[kernel.family]\ntype = \"exp\"\namp = 0.3\nb1 = 1.0\nb2 = 1.0\n";
const GAUSSIAN: &str = "[kernel]\nc = 1.0\n\n[kernel.family]\ntype = \"gaussian\"\namp = 0.5\ns1 = 0.3\ns2 = 0.3\n";

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn config(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn exec(&self, cmd: &str, config: &Path, extra: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_diffkern2d"))
            .arg(cmd)
            .arg("--config")
            .arg(config)
            .arg("--out")
            .arg(self.out())
            .args(extra)
            .env_remove("DIFFKERN2D_THREADS")
            .output()
            .unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&std::fs::read_to_string(self.out().join(name)).unwrap()).unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_identity_kernel_passes_exactly() {
    let r = Run::new();
    let o = r.exec("verify", &r.config("id.toml", IDENTITY), &["--sizes", "8"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let report = r.json("verify.json");
    assert_eq!(report["passed"], Value::Bool(true));
    for res in report["per_size"].as_array().unwrap() {
        for key in ["identity_displacement", "identity_m4"] {
            for v in res[key].as_array().unwrap() {
                assert!(v.as_f64().unwrap() <= 1e-12);
            }
        }
    }
    assert!(r.out().join("convergence.svg").exists());
}

#[test]
fn verify_exp_kernel_converges() {
    let r = Run::new();
    let o = r.exec("verify", &r.config("exp.toml", EXP), &["--sizes", "8,16,32"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let orders = &r.json("verify.json")["orders"];
    assert!(orders["g_symmetry"].as_f64().unwrap() >= 0.8);
    assert!(orders["identity_displacement"][0].as_f64().unwrap() >= 0.8);
}

#[test]
fn malformed_config_is_a_usage_error() {
    let r = Run::new();
    let o = r.exec("verify", &r.config("bad.toml", "[kernel\nc = 1\n"), &[]);
    assert_eq!(code(&o), 2);
    let o = r.exec("verify", &r.config("unknown.toml", &format!("{IDENTITY}\n[tolerances]\nagrement = 1.0\n")), &[]);
    assert_eq!(code(&o), 2);
    let o = r.exec("verify", &r.dir.path().join("missing.toml"), &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_arguments_are_usage_errors() {
    let r = Run::new();
    let cfg = r.config("id.toml", IDENTITY);
    assert_eq!(code(&r.exec("verify", &cfg, &["--tol-override", "agreement"])), 2);
    assert_eq!(code(&r.exec("verify", &cfg, &["--tol-override", "nope=1"])), 2);
    assert_eq!(code(&r.exec("verify", &cfg, &["--sizes", "8,x"])), 2);
    assert_eq!(code(&r.exec("verify", &cfg, &["--sizes", "128"])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_diffkern2d")).arg("verify").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn thread_count_comes_from_the_environment() {
    let r = Run::new();
    let cfg = r.config("id.toml", IDENTITY);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_diffkern2d"))
            .args(["verify", "--sizes", "8", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(r.out())
            .env("DIFFKERN2D_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("2")), 0);
    assert_eq!(code(&run("zero")), 2);
    assert_eq!(code(&run("0")), 2);
}

#[test]
fn rho_identity_diagonal_gives_area_over_c() {
    let r = Run::new();
    let body = "[grid]\nomega1 = 1.0\nomega2 = 2.0\n\n[kernel]\nc = 2.0\n\n[kernel.family]\ntype = \"identity\"\n\n[rho]\nn = 8\npairs = \"diagonal\"\n";
    let o = r.exec("rho", &r.config("rho.toml", body), &[]);
    // μ = λ in both coordinates leaves no structured form: every row is
    // skipped and the run fails, but the direct table is still written.
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("all 25 rows skipped"));
    let direct = std::fs::read_to_string(r.out().join("rho_direct.csv")).unwrap();
    let rows: Vec<&str> = direct.lines().skip(1).collect();
    assert_eq!(rows.len(), 25);
    for row in rows {
        let cols: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((cols[8] - 1.0).abs() < 1e-12 && cols[9].abs() < 1e-12, "{row}");
    }
    let report = r.json("rho.json");
    assert_eq!(report["stats"]["skipped"], 25);
    assert!(report["skipped"][0]["reason"].as_str().unwrap().contains("coincide"));
}

#[test]
fn rho_exp_kernel_error_below_configured_bound() {
    let r = Run::new();
    let body = format!("{EXP}\n[rho]\nn = 16\n\n[tolerances]\nrho_rel_err = 0.2\n");
    let o = r.exec("rho", &r.config("rho.toml", &body), &[]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let report = r.json("rho.json");
    let err = report["stats"]["max_relative_error"].as_f64().unwrap();
    assert!(err > 0.0 && err <= 0.2);
    assert_eq!(report["stats"]["evaluated"], 625);
    let structured = std::fs::read_to_string(r.out().join("rho_structured.csv")).unwrap();
    assert!(structured.starts_with("lambda1_re,lambda1_im,lambda2_re,lambda2_im,mu1_re"));
    assert_eq!(structured.lines().count(), 626);
}

#[test]
fn rho_forced_form_skips_poles() {
    let r = Run::new();
    let body = format!("{EXP}\n[rho]\nn = 8\nlambdas = [0.5, 1.5]\nmus = [0.5, 2.5]\nform = \"one\"\n");
    let o = r.exec("rho", &r.config("rho.toml", &body), &["--tol-override", "rho_rel_err=0.2"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let report = r.json("rho.json");
    // 16 pairs; the i = 1 form needs μ₂ ≠ λ₂, which fails for 4 of them.
    // One of those also has μ₁ = λ₁ and admits no form at all.
    assert_eq!(report["stats"]["evaluated"], 12);
    let reasons: Vec<&str> = report["skipped"].as_array().unwrap().iter().map(|s| s["reason"].as_str().unwrap()).collect();
    assert_eq!(reasons.iter().filter(|r| r.contains("use the i = 2 form")).count(), 3);
    assert_eq!(reasons.iter().filter(|r| r.contains("coincide")).count(), 1);
}

fn pgm(path: &Path, w: usize, h: usize) {
    let mut s = format!("P2\n{w} {h}\n255\n");
    for r in 0..h {
        let row: Vec<String> = (0..w).map(|c| ((r * 7 + c * 13) % 256).to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn deconv_identity_blur_is_exact() {
    let r = Run::new();
    pgm(&r.dir.path().join("img.pgm"), 40, 24);
    let cfg = r.config("d.toml", &format!("{IDENTITY}\n[deconv]\ninput = \"img.pgm\"\n"));
    let o = r.exec("deconv", &cfg, &[]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let report = r.json("deconv.json");
    assert_eq!(report["exact"], Value::Bool(true));
    assert!(report["psnr_db"].is_null());
    assert_eq!(
        std::fs::read_to_string(r.out().join("recovered.pgm")).unwrap(),
        std::fs::read_to_string(r.dir.path().join("img.pgm")).unwrap()
    );
}

#[test]
fn deconv_smooth_blur_on_checkerboard() {
    let r = Run::new();
    let body = format!("[grid]\nn1 = 32\nn2 = 32\n\n{GAUSSIAN}\n[deconv]\nsynthetic = {{ pattern = \"checkerboard\", tile = 4 }}\n");
    let o = r.exec("deconv", &r.config("d.toml", &body), &[]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let report = r.json("deconv.json");
    assert!(report["psnr_db"].as_f64().unwrap() >= 80.0);
    assert!(report["blur_psnr_db"].as_f64().unwrap() < 80.0);
    for f in ["original.pgm", "blurred.pgm", "recovered.pgm", "recovered.csv"] {
        assert!(r.out().join(f).exists(), "{f}");
    }
}

#[test]
fn deconv_size_mismatch_is_a_usage_error() {
    let r = Run::new();
    pgm(&r.dir.path().join("img.pgm"), 16, 16);
    let cfg = r.config("d.toml", &format!("[grid]\nn1 = 32\nn2 = 32\n\n{IDENTITY}\n[deconv]\ninput = \"img.pgm\"\n"));
    let o = r.exec("deconv", &cfg, &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("16"));
}

#[test]
fn reconstruct_identity_and_exp() {
    let r = Run::new();
    let o = r.exec("reconstruct", &r.config("id.toml", &format!("{IDENTITY}\n[reconstruct]\nn = 6\n")), &[]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let rep = r.json("reconstruct.json");
    assert!(rep["reconstruction_error"].as_f64().unwrap() <= 1e-10);
    assert!(rep["structure"]["residual"].as_f64().unwrap() <= 1e-12);

    let o = r.exec("reconstruct", &r.config("exp.toml", &format!("{EXP}\n[reconstruct]\nn = 8\nwrite_table = true\n")), &[]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let rep = r.json("reconstruct.json");
    assert!(rep["reconstruction_error"].as_f64().unwrap() <= 1e-9);
    assert!(rep["structure"]["residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(rep["rank"], 64);
    let table = std::fs::read_to_string(r.out().join("rho_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 64 * 64 + 1);
}

#[test]
fn reconstruct_refuses_large_grids() {
    let r = Run::new();
    let o = r.exec("reconstruct", &r.config("big.toml", &format!("{EXP}\n[reconstruct]\nn = 40\n")), &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("at most 32"));
}

#[test]
fn config_command_must_match() {
    let r = Run::new();
    let cfg = r.config("v.toml", &format!("{IDENTITY}\n[run]\ncommand = \"verify\"\n"));
    assert_eq!(code(&r.exec("rho", &cfg, &[])), 2);
}
