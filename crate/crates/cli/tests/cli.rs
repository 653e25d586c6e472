use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn maxdiq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxdiq"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

/// Squared coupling of the damped oscillator with `ω = c|k|`, natural units.
fn lorentz_f2(w: f64) -> f64 {
    let (w0, g, wp) = (1.0f64, 0.2f64, 0.5f64);
    let nu = (w0 * w0 - g * g / 4.0).sqrt();
    wp * wp / (16.0 * PI * PI * nu * w * w)
        * (g / (g * g / 4.0 + (nu - w).powi(2)) - g / (g * g / 4.0 + (nu + w).powi(2)))
}

#[test]
fn transform_lorentz_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = maxdiq(
        dir.path(),
        &["transform", "--model", "lorentz", "--omega0", "1", "--gamma", "0.2", "--omegap", "0.5", "--role", "electric", "--grid-omega", "0.05:10:400"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("f2.csv")).unwrap();
    assert!(text.starts_with("omega,f2\n"));
    let data = rows(&dir.path().join("f2.csv"));
    assert_eq!(data.len(), 400);
    for r in data {
        let exact = lorentz_f2(r[0]);
        assert!((r[1] - exact).abs() <= 1e-6 * exact, "{} {} {}", r[0], r[1], exact);
    }
}

#[test]
fn transform_back_to_chi() {
    let dir = tempfile::tempdir().unwrap();
    let o = maxdiq(
        dir.path(),
        &["transform", "--model", "lorentz", "--omega0", "1", "--gamma", "0.2", "--omegap", "0.5", "--route", "im-chi", "--grid-omega", "0:60:24001"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = dir.path().join("f2.csv");
    let o = maxdiq(
        dir.path(),
        &["transform", "--direction", "to-chi", "--coupling-table", table.to_str().unwrap(), "--grid-t", "0.5:5:10"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let nu = (1.0f64 - 0.01).sqrt();
    for r in rows(&dir.path().join("chi_t.csv")) {
        let exact = 0.25 * (-0.1 * r[0]).exp() * (nu * r[0]).sin() / nu;
        assert!((r[1] - exact).abs() < 1e-3, "{r:?} {exact}");
    }
}

#[test]
fn vacuum_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = maxdiq(dir.path(), &["scenario", "--name", "vacuum", "--omega-q", "1"]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert!(String::from_utf8_lossy(&o.stdout).contains("scenario vacuum: PASS"));
}

#[test]
fn dispersion_invariance_check_prints_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let o = maxdiq(
        dir.path(),
        &["validate", "--check", "dispersion-invariance", "--model", "lorentz", "--omega0", "1", "--gamma", "0.2", "--omegap", "0.5"],
    );
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    let dev: f64 = out
        .split("deviation ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(dev < 1e-12);
}

#[test]
fn failed_validation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = maxdiq(
        dir.path(),
        &["validate", "--check", "kk", "--model", "lorentz", "--omega0", "1", "--gamma", "0.2", "--omegap", "0.5", "--tolerance", "1e-30"],
    );
    assert_eq!(code(&o), 2);
    let o = maxdiq(dir.path(), &["validate", "--check", "ode-residual", "--model", "step", "--beta", "1", "--omega-q", "2", "--grid-t", "0:20:801"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&maxdiq(dir.path(), &["frobnicate"])), 64);
    assert_eq!(code(&maxdiq(dir.path(), &["kernel", "--kind", "Z", "--model", "step"])), 64);
    assert_eq!(code(&maxdiq(dir.path(), &["kernel", "--kind", "Z", "--model", "vacuum", "--grid-t", "1:2"])), 64);
    assert_eq!(
        code(&maxdiq(dir.path(), &["kernel", "--kind", "Z", "--model", "tabulated", "--table", "/definitely/not/here.csv"])),
        74
    );
    let resonant = (1.25f64).sqrt().to_string();
    let o = maxdiq(
        dir.path(),
        &["kernel", "--kind", "Q", "--model", "lorentz", "--omega0", "1", "--gamma", "0", "--omegap", "0.5", "--omega-k", &resonant],
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("resonance"));
    let blocked = dir.path().join("file");
    fs::write(&blocked, "").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_maxdiq"))
        .args(["scenario", "--name", "vacuum", "--output-dir"])
        .arg(blocked.join("sub"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 74);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["kernel", "--kind", "zeta", "--model", "box", "--chi0", "1", "--delta", "0.5", "--omega-q", "1", "--omega-k", "0.7", "--grid-t", "0:10:201"],
        &["scenario", "--name", "step", "--points", "300", "--couplings", "--noise"],
        &["noise", "--model", "lorentz", "--omega0", "1", "--gamma", "0.2", "--omegap", "0.5", "--magnetic", "step:0.5"],
    ];
    for args in runs {
        assert_eq!(code(&maxdiq(a.path(), args)), 0);
        assert_eq!(code(&maxdiq(b.path(), args)), 0);
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 10);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn csv_format() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&maxdiq(dir.path(), &["kernel", "--kind", "Z", "--model", "vacuum", "--grid-t", "0:1:3"])), 0);
    assert_eq!(
        fs::read_to_string(dir.path().join("Z_plus.csv")).unwrap(),
        "t,re,im\n0.0,1.0,0.0\n0.5,0.8775825618903728,-0.479425538604203\n1.0,0.5403023058681398,-0.8414709848078965\n"
    );
    assert_eq!(code(&maxdiq(dir.path(), &["noise", "--model", "step", "--beta", "2", "--grid-omega", "2:4:2"])), 0);
    let noise = fs::read_to_string(dir.path().join("noise.csv")).unwrap();
    assert!(noise.starts_with("omega,w_e,w_m,f2,g2\n"));
    let last = rows(&dir.path().join("noise.csv"))[1].clone();
    assert!((last[1] - 0.5 / PI).abs() < 1e-15);
}

#[test]
fn config_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"name": "lorentz", "points": 512, "couplings": false}"#).unwrap();
    let o = maxdiq(dir.path(), &["scenario", "--name", "vacuum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["name"], "lorentz");
    assert_eq!(rows(&dir.path().join("Q_plus.csv")).len(), 512);
    fs::write(&cfg, "[1, 2]").unwrap();
    assert_eq!(code(&maxdiq(dir.path(), &["scenario", "--config", cfg.to_str().unwrap()])), 64);
}

#[test]
fn scenario_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"name": "box", "params": {"delta": 0.01}, "grids": {"points": 400}, "outputs": {"signs": ["plus"]}, "tolerances": {"abs": 0.02}}"#).unwrap();
    let o = maxdiq(dir.path(), &["scenario", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let dev = report["kernels"][0]["result"]["max_abs_deviation"].as_f64().unwrap();
    assert!(dev > 1e-3 && dev < 2e-2, "{dev}");
}

#[test]
fn help_documents_units() {
    for sub in ["transform", "kernel", "validate", "scenario", "noise"] {
        let o = Command::new(env!("CARGO_BIN_EXE_maxdiq")).args([sub, "--help"]).output().unwrap();
        assert_eq!(code(&o), 0);
        let text = String::from_utf8_lossy(&o.stdout);
        assert!(text.contains("[rad/time]"), "{sub}");
        assert!(text.contains("--units"), "{sub}");
    }
}
