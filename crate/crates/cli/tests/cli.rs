use atomfiber::guideprops::two_wire_analytic;
use atomfiber::PhysicalConstants;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_atomfiber");
const PRESETS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/presets");

fn preset(name: &str) -> Value {
    let text = std::fs::read_to_string(Path::new(PRESETS).join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn write_doc(dir: &Path, name: &str, doc: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    path
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("ATOMFIBER_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args, &[]);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Parses the machine-readable error line.
fn error_line(out: &Output) -> (String, String) {
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    let line = stderr
        .lines()
        .find(|l| l.starts_with("error: kind="))
        .unwrap_or_else(|| panic!("no error line in {stderr:?}"));
    let rest = line.strip_prefix("error: kind=").unwrap();
    let (kind, message) = rest.split_once(" message=").unwrap();
    (kind.to_string(), message.to_string())
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn small_spiral(dir: &Path) -> PathBuf {
    let mut doc = preset("spiral_fig3.json");
    doc["ensemble"]["count"] = json!(300);
    doc["integration"]["total_time"] = json!("2 ms");
    doc["integration"]["snapshots"] = json!(["0 ms", "1 ms", "2 ms"]);
    write_doc(dir, "small.json", &doc)
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[test]
fn simulate_is_reproducible_for_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = small_spiral(tmp.path());
    let s = scenario.to_str().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ok(&["simulate", "--scenario", s, "--seed", "7", "--out", a.to_str().unwrap()]);
    ok(&["simulate", "--scenario", s, "--seed", "7", "--out", b.to_str().unwrap()]);
    let (ca, cb) = (dir_contents(&a), dir_contents(&b));
    assert!(ca.contains_key("snapshot_002.csv") && ca.contains_key("losses.csv") && ca.contains_key("density_002.csv"));
    assert_eq!(ca, cb);
    let c = tmp.path().join("c");
    ok(&["simulate", "--scenario", s, "--seed", "8", "--out", c.to_str().unwrap()]);
    assert_ne!(ca["snapshot_000.csv"], dir_contents(&c)["snapshot_000.csv"]);
}

#[test]
fn simulate_is_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = small_spiral(tmp.path());
    let s = scenario.to_str().unwrap();
    let one = tmp.path().join("one");
    let eight = tmp.path().join("eight");
    let env = tmp.path().join("env");
    ok(&["simulate", "--scenario", s, "--seed", "3", "--threads", "1", "--out", one.to_str().unwrap()]);
    ok(&["simulate", "--scenario", s, "--seed", "3", "--threads", "8", "--out", eight.to_str().unwrap()]);
    let out = run(
        &["simulate", "--scenario", s, "--seed", "3", "--out", env.to_str().unwrap()],
        &[("ATOMFIBER_THREADS", "4")],
    );
    assert!(out.status.success());
    assert_eq!(dir_contents(&one), dir_contents(&eight));
    assert_eq!(dir_contents(&one), dir_contents(&env));
}

#[test]
fn thread_flag_overrides_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let s = Path::new(PRESETS).join("top_rb87.json");
    let out_dir = tmp.path().join("o");
    let args = ["top-params", "--scenario", s.to_str().unwrap(), "--out", out_dir.to_str().unwrap()];
    let bad_env = run(&args, &[("ATOMFIBER_THREADS", "many")]);
    assert_eq!(error_line(&bad_env).0, "usage");
    let mut with_flag = args.to_vec();
    with_flag.extend(["--threads", "2"]);
    assert!(run(&with_flag, &[("ATOMFIBER_THREADS", "many")]).status.success());
}

#[test]
fn simulate_requires_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = small_spiral(tmp.path());
    let out = run(
        &["simulate", "--scenario", scenario.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()],
        &[],
    );
    let (kind, message) = error_line(&out);
    assert_eq!(kind, "usage");
    assert!(message.contains("--seed"));
}

#[test]
fn manifest_records_hash_versions_and_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = small_spiral(tmp.path());
    let o = tmp.path().join("o");
    ok(&["simulate", "--scenario", scenario.to_str().unwrap(), "--seed", "11", "--out", o.to_str().unwrap()]);
    let manifest: Value = serde_json::from_slice(&std::fs::read(o.join("run.json")).unwrap()).unwrap();
    let hash = hex::encode(Sha256::digest(std::fs::read(&scenario).unwrap()));
    assert_eq!(manifest["inputs_sha256"], json!(hash));
    assert_eq!(manifest["seed"], json!(11));
    assert_eq!(manifest["command"], json!("simulate"));
    assert_eq!(manifest["versions"]["atomfiber-core"], json!(atomfiber::VERSION));
}

#[test]
fn lifetime_fit_and_profile_read_simulate_output() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = small_spiral(tmp.path());
    let s = scenario.to_str().unwrap();
    let sim = tmp.path().join("sim");
    ok(&["simulate", "--scenario", s, "--seed", "5", "--out", sim.to_str().unwrap()]);
    let prof = tmp.path().join("prof");
    ok(&["profile", "--scenario", s, "--input", sim.to_str().unwrap(), "--out", prof.to_str().unwrap()]);
    let (simc, profc) = (dir_contents(&sim), dir_contents(&prof));
    for k in 0..3 {
        for kind in ["density", "velocity"] {
            let name = format!("{kind}_{k:03}.csv");
            assert_eq!(simc[&name], profc[&name], "{name}");
        }
    }
    // the default fit window starts at 300 ms, beyond this 2 ms run
    let fit = tmp.path().join("fit");
    let out = run(
        &["lifetime-fit", "--scenario", s, "--input", sim.to_str().unwrap(), "--out", fit.to_str().unwrap()],
        &[],
    );
    assert_eq!(error_line(&out).0, "fit");
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&scenario).unwrap()).unwrap();
    doc["outputs"]["fit_window"] = json!(["0 s", "inf"]);
    doc["outputs"]["survival_interval"] = json!("0.1 ms");
    let s2 = write_doc(tmp.path(), "fit.json", &doc);
    ok(&["lifetime-fit", "--scenario", s2.to_str().unwrap(), "--input", sim.to_str().unwrap(), "--out", fit.to_str().unwrap()]);
    let fit_csv = std::fs::read_to_string(fit.join("lifetime_fit.csv")).unwrap();
    assert!(fit_csv.starts_with(atomfiber::analysis::FIT_HEADER));
    let survival = std::fs::read_to_string(fit.join("survival.csv")).unwrap();
    assert_eq!(survival.lines().count(), 1 + 21);
}

#[test]
fn field_map_minimum_sits_at_analytic_height() {
    let tmp = tempfile::tempdir().unwrap();
    let s = Path::new(PRESETS).join("straight_pair_scan.json");
    let o = tmp.path().join("o");
    ok(&["field-map", "--scenario", s.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    let rows = csv_rows(&std::fs::read_to_string(o.join("field_map.csv")).unwrap());
    assert_eq!(rows.len(), 31 * 30);
    let best = rows
        .iter()
        .filter(|r| r[7].is_finite())
        .min_by(|a, b| a[7].total_cmp(&b[7]))
        .unwrap();
    let (h, _) = two_wire_analytic(1.0, 57.5e-6, 20e-4, &PhysicalConstants::CODATA2018).unwrap();
    let step = (600e-6 - 10e-6) / 29.0;
    assert!((best[2] - h).abs() <= step, "minimum at z = {} vs h = {h}", best[2]);
    assert!(best[1].abs() < 1e-9);
}

#[test]
fn zero_current_gives_uniform_bias() {
    let tmp = tempfile::tempdir().unwrap();
    let mut doc = preset("straight_pair_scan.json");
    doc["waveforms"][0]["current"] = json!("0 A");
    doc["bias"]["field"] = json!(["1 G", "-2 G", "3 G"]);
    let s = write_doc(tmp.path(), "zero.json", &doc);
    let o = tmp.path().join("o");
    ok(&["field-map", "--scenario", s.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    for r in csv_rows(&std::fs::read_to_string(o.join("field_map.csv")).unwrap()) {
        assert_eq!([r[4], r[5], r[6]], [1e-4, -2e-4, 3e-4]);
    }
}

#[test]
fn top_field_map_is_periodic() {
    let tmp = tempfile::tempdir().unwrap();
    let mut doc = preset("top_rb87.json");
    doc["field_map"] = json!({
        "lo": ["0 um", "-10 um", "15 um"],
        "hi": ["0 um", "10 um", "25 um"],
        "counts": [1, 5, 5],
        "times": ["3 us", "23 us"]
    });
    let s = write_doc(tmp.path(), "top.json", &doc);
    let o = tmp.path().join("o");
    ok(&["field-map", "--scenario", s.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    let rows = csv_rows(&std::fs::read_to_string(o.join("field_map.csv")).unwrap());
    let (first, second) = rows.split_at(25);
    for (a, b) in first.iter().zip(second) {
        for k in 4..8 {
            assert!((a[k] - b[k]).abs() <= 1e-12 * a[7].abs(), "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn guide_scan_preset_and_partial_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let s = Path::new(PRESETS).join("straight_pair_scan.json");
    let o = tmp.path().join("o");
    ok(&["guide-scan", "--scenario", s.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    let rows = csv_rows(&std::fs::read_to_string(o.join("guide_scan.csv")).unwrap());
    assert_eq!(rows.len(), 9);
    assert!((rows[0][2] - 450.0).abs() / 450.0 < 0.15);
    assert!((rows[8][2] - 35.0).abs() / 35.0 < 0.10);

    let mut doc = preset("straight_pair_scan.json");
    doc["scan"]["biases"] = json!(["10 G", "200 G", "20 G"]);
    let partial = write_doc(tmp.path(), "partial.json", &doc);
    let o2 = tmp.path().join("o2");
    ok(&["guide-scan", "--scenario", partial.to_str().unwrap(), "--out", o2.to_str().unwrap()]);
    let rows = csv_rows(&std::fs::read_to_string(o2.join("guide_scan.csv")).unwrap());
    assert!(rows[0][2].is_finite() && rows[2][2].is_finite());
    assert!(rows[1][2].is_nan());

    doc["scan"]["biases"] = json!([]);
    let empty = write_doc(tmp.path(), "empty.json", &doc);
    let out = run(&["guide-scan", "--scenario", empty.to_str().unwrap(), "--out", o2.to_str().unwrap()], &[]);
    assert_eq!(error_line(&out).0, "usage");
}

#[test]
fn top_params_reports_and_rejects_static_limit() {
    let tmp = tempfile::tempdir().unwrap();
    let s = Path::new(PRESETS).join("top_rb87.json");
    let o = tmp.path().join("o");
    let out = ok(&["top-params", "--scenario", s.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("Larmor frequency"));
    let csv = std::fs::read_to_string(o.join("top_params.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let f_lar: f64 = row[4].parse().unwrap();
    let f_trap: f64 = row[5].parse().unwrap();
    assert!((f_lar - 500.0).abs() / 500.0 < 0.05);
    assert!((f_trap - 5.0).abs() / 5.0 < 0.10);

    let mut doc = preset("top_rb87.json");
    doc["top"]["imod"] = json!("0 mA");
    let q = write_doc(tmp.path(), "quad.json", &doc);
    let out = run(&["top-params", "--scenario", q.to_str().unwrap(), "--out", o.to_str().unwrap()], &[]);
    let (kind, message) = error_line(&out);
    assert_eq!(kind, "static-quadrupole-limit");
    assert!(message.contains("static quadrupole limit"));

    doc["top"]["imod"] = json!("10 mA");
    doc["top"]["frequency"] = json!("400 kHz");
    let fast = write_doc(tmp.path(), "fast.json", &doc);
    let o3 = tmp.path().join("o3");
    ok(&["top-params", "--scenario", fast.to_str().unwrap(), "--out", o3.to_str().unwrap()]);
    let csv = std::fs::read_to_string(o3.join("top_params.csv")).unwrap();
    assert!(csv.trim_end().ends_with(",false"));
}

#[test]
fn invalid_documents_give_error_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("o");
    let mut doc = preset("sideguide.json");
    doc["unexpected"] = json!(1);
    let s = write_doc(tmp.path(), "unknown.json", &doc);
    let out = run(&["field-map", "--scenario", s.to_str().unwrap(), "--out", o.to_str().unwrap()], &[]);
    assert_eq!(error_line(&out).0, "scenario");

    let mut doc = preset("sideguide.json");
    doc["geometry"]["length"] = json!("10 uK");
    let s = write_doc(tmp.path(), "unit.json", &doc);
    let out = run(&["field-map", "--scenario", s.to_str().unwrap(), "--out", o.to_str().unwrap()], &[]);
    let (kind, message) = error_line(&out);
    assert_eq!(kind, "scenario");
    assert!(message.contains("geometry.length"), "{message}");

    let missing = tmp.path().join("missing.json");
    let out = run(&["field-map", "--scenario", missing.to_str().unwrap(), "--out", o.to_str().unwrap()], &[]);
    assert_eq!(error_line(&out).0, "io");

    let out = run(&["no-such-command"], &[]);
    assert_eq!(error_line(&out).0, "usage");
}

#[test]
fn input_document_is_not_modified() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = small_spiral(tmp.path());
    let before = std::fs::read(&scenario).unwrap();
    let mtime = std::fs::metadata(&scenario).unwrap().modified().unwrap();
    let s = scenario.to_str().unwrap();
    let o = tmp.path().join("o");
    ok(&["simulate", "--scenario", s, "--seed", "1", "--out", o.to_str().unwrap()]);
    ok(&["profile", "--scenario", s, "--input", o.to_str().unwrap(), "--out", tmp.path().join("p").to_str().unwrap()]);
    assert_eq!(std::fs::read(&scenario).unwrap(), before);
    assert_eq!(std::fs::metadata(&scenario).unwrap().modified().unwrap(), mtime);
}
