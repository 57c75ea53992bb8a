use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thinflow"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("thinflow-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stderr_line(out: &Output) -> String {
    let s = String::from_utf8_lossy(&out.stderr).to_string();
    assert_eq!(s.trim_end().lines().count(), 1, "{s}");
    s.trim_end().to_string()
}

fn rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn gen_run_diagnose_pipeline_at_n2_n256() {
    let d = scratch("pipeline");
    let start = Instant::now();
    let w0 = d.join("w0.bin");
    ok(bin().args(["gen-data", "--n", "2", "--N", "256", "--out"]).arg(&w0).output().unwrap());
    ok(bin().args(["run", "--T", "0.5", "--init"]).arg(&w0).arg("--out").arg(d.join("run")).output().unwrap());
    fs::write(d.join("seeds.txt"), "0.1 0.1\n-0.3, 0.2\n").unwrap();
    ok(bin()
        .args(["diagnose", "--T", "0.5", "--set", "tracers.yudovich_pairs=20", "--init"])
        .arg(&w0)
        .arg("--tracers")
        .arg(d.join("seeds.txt"))
        .arg("--out")
        .arg(d.join("diag"))
        .output()
        .unwrap());
    assert!(start.elapsed() < Duration::from_secs(300));

    assert_eq!(rows(&d.join("run/diagnostics.csv")), 51);
    for f in ["config.resolved", "manifest.txt", "final.bin"] {
        assert!(d.join("run").join(f).exists(), "{f}");
    }
    let manifest = fs::read_to_string(d.join("run/manifest.txt")).unwrap();
    assert!(manifest.starts_with("thinflow ") && manifest.contains("w0.bin"));
    let origin = fs::read_to_string(d.join("diag/origin.csv")).unwrap();
    assert!(origin.starts_with("t,du11,du22,du12,du21,deta11,deta22,deta12,deta21,det\n"));
    let key = fs::read_to_string(d.join("diag/key_integral.csv")).unwrap();
    assert!(key.starts_with("t,r,I,I_1,I_2,I_3,supB_ratio\n"), "{key}");
    assert_eq!(rows(&d.join("diag/tracers.csv")), 42);
    assert!(d.join("diag/yudovich.csv").exists());
}

#[test]
fn zero_horizon_writes_initial_diagnostics_only() {
    let d = scratch("t0");
    ok(bin().args(["run", "--T", "0", "--N", "64", "--n", "1", "--set", "bubble.small_scale_index=2", "--out"]).arg(&d).output().unwrap());
    assert_eq!(rows(&d.join("diagnostics.csv")), 1);
    let resolved = fs::read_to_string(d.join("config.resolved")).unwrap();
    assert!(resolved.contains("t_end = 0.0"), "{resolved}");
}

#[test]
fn runs_are_bitwise_reproducible() {
    let d = scratch("repeat");
    for k in ["a", "b"] {
        ok(bin()
            .args(["run", "--T", "0.2", "--N", "64", "--n", "1", "--nu", "1e-3", "--set", "bubble.small_scale_index=2", "--out"])
            .arg(d.join(k))
            .output()
            .unwrap());
    }
    assert_eq!(fs::read(d.join("a/diagnostics.csv")).unwrap(), fs::read(d.join("b/diagnostics.csv")).unwrap());
    assert_eq!(fs::read(d.join("a/final.bin")).unwrap(), fs::read(d.join("b/final.bin")).unwrap());
}

#[test]
fn errors_are_one_categorized_line() {
    let d = scratch("errors");
    let plan = d.join("plan.toml");
    fs::write(&plan, "[plan]\nn_list = []\n").unwrap();
    let out = bin().args(["sweep", "--plan"]).arg(&plan).arg("--out").arg(d.join("s")).output().unwrap();
    assert!(!out.status.success());
    assert!(stderr_line(&out).starts_with("error: config: "));

    let cfg = d.join("typo.toml");
    fs::write(&cfg, "[solver]\nviskosity = 1e-3\n").unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(d.join("r")).output().unwrap();
    assert!(!out.status.success());
    let line = stderr_line(&out);
    assert!(line.starts_with("error: config: ") && line.contains("viskosity"), "{line}");

    let out = bin().args(["run", "--N", "64", "--out"]).arg(d.join("coarse")).output().unwrap();
    assert!(stderr_line(&out).starts_with("error: under-resolved: "));

    let out = bin().args(["frobnicate"]).output().unwrap();
    assert!(!out.status.success());
    assert!(stderr_line(&out).starts_with("error: usage: "));
}

#[test]
fn sweep_then_export_round_trips() {
    let d = scratch("sweep");
    let plan = d.join("plan.toml");
    fs::write(
        &plan,
        "[bubble]\nl0 = 1\n\n[plan]\nn_list = [1, 2, 3]\npairing = \"explicit\"\nc = 2.0\nprefactor = 0.1\nt_end = 0.05\n\
         grid_offset = 5\n\n[solver]\ncadence = 0.01\n",
    )
    .unwrap();
    ok(bin().args(["sweep", "--plan"]).arg(&plan).arg("--out").arg(d.join("s")).output().unwrap());
    assert_eq!(rows(&d.join("s/records.csv")), 3);
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(d.join("s/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["records"].as_array().unwrap().len(), 3);
    let fit = &summary["scaling_fit"];
    for k in ["slope", "slope_ci", "c0_fit", "c0_ci"] {
        assert!(!fit[k].is_null(), "{k}");
    }
    ok(bin().args(["export", "--summary"]).arg(d.join("s/summary.json")).arg("--out").arg(d.join("e")).output().unwrap());
    assert_eq!(fs::read_to_string(d.join("s/records.csv")).unwrap(), fs::read_to_string(d.join("e/records.csv")).unwrap());
    ok(bin()
        .args(["export", "--format", "json", "--summary"])
        .arg(d.join("s/summary.json"))
        .arg("--out")
        .arg(d.join("j"))
        .output()
        .unwrap());
    assert_eq!(fs::read_to_string(d.join("s/summary.json")).unwrap(), fs::read_to_string(d.join("j/summary.json")).unwrap());
}
