use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lowdisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowdisc"))
        .args(args)
        .env_remove("LOWDISC_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn num(v: &Value) -> f64 {
    v.as_str().expect("decimal string").parse().unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    String::from_utf8(o.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn analyze_reports_low_discriminant() {
    let o = lowdisc(&["analyze", "--disc", "-115147"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!((num(&r["lambda"]) + 4.98563e-6).abs() < 5e-11);
    assert_eq!(r["is_low"], true);
    assert!(r["error"].is_null());
}

#[test]
fn analyze_minus_163_is_not_low() {
    let o = lowdisc(&["analyze", "--disc", "-163"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["is_low"], false);
    assert_eq!(r["satisfies_lowdef"], true);
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        &["analyze", "--disc", "-10"][..],
        &["analyze", "--disc", "-163", "--precision", "16"],
        &["analyze", "--disc", "-163", "--eps", "1e-40"],
        &["analyze", "--disc", "-163", "--tol", "abc"],
        &["analyze", "--disc", "-163", "--zeros", "1"],
        &["analyze", "--disc", "-163", "--zeros-file", "/nonexistent/zeros.txt"],
        &["analyze"],
        &["frobnicate"],
        &["scan", "--lo", "-3", "--hi", "-100"],
        &["scan", "--lo", "-10", "--hi", "5"],
        &["flow", "--disc", "-163", "--t-end", "2"],
        &["flow", "--disc", "-163", "--m", "0"],
        &["plotdata", "--disc", "-163", "--lo", "1", "--hi", "0"],
    ] {
        let o = lowdisc(args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    assert_eq!(code(&lowdisc(&["--help"])), 0);
}

#[test]
fn imported_zeros_must_match() {
    let dir = tempfile::tempdir().unwrap();
    let good = lowdisc(&["analyze", "--disc", "-163"]);
    let g1 = json(&good)["gamma1"].as_str().unwrap().to_string();

    // A list that skips the first zero fails the sum rule: exit 2 with the
    // stage recorded in the report.
    let path = dir.path().join("zeros.txt");
    std::fs::write(&path, "# ordinates\n2.3685339467881\n4.0550685388139\n").unwrap();
    let o = lowdisc(&["analyze", "--disc", "-163", "--zeros-file", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["error"]["stage"], "certify");

    std::fs::write(&path, "0.3\n2.3685339467881\n").unwrap();
    let o = lowdisc(&["analyze", "--disc", "-163", "--zeros-file", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["error"]["stage"], "zeros");

    let text = format!("{g1}\n2.36853394678810445463775392749\n4.05506853881393230806036536941\n");
    std::fs::write(&path, text).unwrap();
    let o = lowdisc(&["analyze", "--disc", "-163", "--zeros-file", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!((num(&json(&o)["lambda"]) - num(&json(&good)["lambda"])).abs() < 1e-15);
}

fn cache_files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

#[test]
fn cache_hit_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let first = lowdisc(&["analyze", "--disc", "-1411", "--cache-dir", d]);
    assert_eq!(code(&first), 0);
    let files = cache_files(dir.path());
    assert_eq!(files.len(), 1);
    assert!(files[0].starts_with("analyze_1411_"));

    let second = lowdisc(&["analyze", "--disc", "-1411", "--cache-dir", d]);
    assert_eq!(first.stdout, second.stdout);
    // Recomputation without a cache is deterministic too.
    assert_eq!(first.stdout, lowdisc(&["analyze", "--disc", "-1411"]).stdout);

    // The stored entry is what is served: tampering shows through.
    let p = dir.path().join(&files[0]);
    let tampered = String::from_utf8(first.stdout.clone())
        .unwrap()
        .replace("\"is_low\": true", "\"is_low\": false");
    std::fs::write(&p, &tampered).unwrap();
    let third = lowdisc(&["analyze", "--disc", "-1411", "--cache-dir", d]);
    assert_eq!(third.stdout, tampered.as_bytes());

    // A different configuration gets its own entry.
    lowdisc(&["analyze", "--disc", "-1411", "--cache-dir", d, "--tol", "1e-13"]);
    assert_eq!(cache_files(dir.path()).len(), 2);
}

#[test]
fn cache_dir_defaults_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lowdisc"))
        .args(["scan", "--lo", "-20", "--hi", "-3"])
        .env("LOWDISC_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let files = cache_files(dir.path());
    assert_eq!(files.len(), json(&o)["count"].as_u64().unwrap() as usize);
    assert!(files.iter().all(|f| f.starts_with("scan_")));
}

#[test]
fn scan_low_range_counts() {
    let o = lowdisc(&["scan", "--lo", "-119", "--hi", "-3"]);
    assert_eq!(code(&o), 0);
    let s = json(&o);
    assert_eq!(s["count"], 38);
    assert_eq!(s["positive_sum_below_trigamma"], 19);
    assert_eq!(s["positive_local_min"], 7);
    let mins: Vec<i64> = s["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["class"] == "positive-local-min")
        .map(|e| e["disc"].as_i64().unwrap())
        .collect();
    assert_eq!(mins, [-3, -4, -7, -8, -11, -15, -23]);
    // Output is in order of increasing D.
    let discs: Vec<i64> = s["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["disc"].as_i64().unwrap())
        .collect();
    assert!(discs.windows(2).all(|w| w[0] > w[1]));
}

#[test]
fn scan_beyond_119_has_no_minima() {
    let o = lowdisc(&["scan", "--lo", "-2000", "--hi", "-120"]);
    assert_eq!(code(&o), 0);
    let s = json(&o);
    assert_eq!(s["positive_local_min"], 0);
    assert_eq!(s["positive_sum_below_trigamma"], 0);
    assert_eq!(s["classes"]["positive-local-max"], s["count"]);
    assert_eq!(s["failures"], 0);
}

#[test]
fn scan_empty_range_and_full_mode() {
    let o = lowdisc(&["scan", "--lo", "-2", "--hi", "-1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["count"], 0);
    assert!(json(&o)["entries"].as_array().unwrap().is_empty());

    let o = lowdisc(&["scan", "--lo", "-163", "--hi", "-163", "--full"]);
    assert_eq!(code(&o), 0);
    let s = json(&o);
    assert_eq!(s["count"], 1);
    assert_eq!(s["entries"][0]["report"]["disc"], -163);
    assert_eq!(s["low"], 0);
    assert!((num(&s["best_lambda"]) + 2.15787e-2).abs() < 5e-7);

    let o = lowdisc(&["scan", "--lo", "-163", "--hi", "-163", "--full", "--format", "csv"]);
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains(&"lambda".to_string()));
}

#[test]
fn flow_separates_mirror_pair() {
    let o = lowdisc(&["flow", "--disc", "-115147", "--m", "8", "--t-end", "1", "--samples", "11"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&o);
    let header: Vec<String> = ["t", "x_1", "x_2", "x_3", "x_4", "x_5", "x_6", "x_7", "x_8"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    assert_eq!(rows[0], header);
    assert_eq!(rows.len(), 12);
    let x1: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(x1.windows(2).all(|w| w[1] > w[0]));
    assert!((x1[0] - 0.0031576).abs() < 1e-6);
}

#[test]
fn flow_at_zero_time_returns_seeds() {
    let o = lowdisc(&["flow", "--disc", "-163", "--m", "3", "--t-end", "0"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], "0");
    let a = json(&lowdisc(&["analyze", "--disc", "-163"]));
    let g1: f64 = rows[1][1].parse().unwrap();
    assert!((g1 - num(&a["gamma1"])).abs() < 1e-12);
}

#[test]
fn flow_json_has_diagnostics() {
    let o = lowdisc(&[
        "flow", "--disc", "-163", "--m", "6", "--t-end", "0.1", "--samples", "3", "--format", "json",
    ]);
    assert_eq!(code(&o), 0);
    let d = json(&o);
    assert_eq!(d["samples"].as_array().unwrap().len(), 3);
    assert!(d["collision"].is_null());
    for g in d["diagnostics"].as_array().unwrap() {
        assert_eq!(g["decay_bound_ok"], true);
    }
}

#[test]
fn flow_oracle_check_passes() {
    let o = lowdisc(&[
        "flow", "--disc", "-163", "--m", "16", "--t-end", "0.2", "--samples", "2", "--oracle-check",
    ]);
    assert_eq!(code(&o), 0);
    let d = json(&o);
    assert_eq!(d["all_ok"], true);
    let rows = d["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    // At t = 0 the flow starts on the roots.
    for g in rows[0]["gaps"].as_array().unwrap() {
        assert!(g.as_f64().unwrap() < 1e-6);
    }
}

#[test]
fn plotdata_matches_known_values() {
    let o = lowdisc(&["plotdata", "--disc", "-115147"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&o);
    assert_eq!(rows[0], ["t", "Z"]);
    assert_eq!(rows.len(), 602);
    let z: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(((z[0] - 6.03627e-5) / 6.03627e-5).abs() < 1e-5);
    // Grid step 0.01: the first sign change brackets 0.0031576.
    assert!(z[0] > 0.0 && z[1] < 0.0);

    let o = lowdisc(&["plotdata", "--disc", "-163", "--lo", "-2", "--hi", "2", "--samples", "9"]);
    let rows = csv_rows(&o);
    for k in 1..=4 {
        assert_eq!(rows[k][1], rows[10 - k][1]);
    }
}
