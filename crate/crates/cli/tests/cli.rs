use std::collections::HashSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spectral-forge"));
    c.env_remove("SPECTRAL_FORGE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("each line is JSON"))
        .collect()
}

fn check<'a>(report: &'a [Value], name: &str) -> &'a Value {
    report
        .iter()
        .find(|l| l["kind"] == "check" && l["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn temp_json(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn ps_example_agrees_across_modes() {
    let out = run(&["ps", "--level", "6", "--q1", "2", "--q2", "3", "--s", "2.5", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = lines(&out);
    let results = check(&rep, "series_vs_closed")["detail"]["results"].as_array().unwrap().clone();
    assert_eq!(results.len(), 3);
    let values: Vec<(f64, f64)> = results
        .iter()
        .map(|r| (r["value"][0].as_f64().unwrap(), r["value"][1].as_f64().unwrap()))
        .collect();
    for a in &values {
        for b in &values {
            assert!(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() <= 1e-6);
        }
    }
    assert_eq!(check(&rep, "even_vanishes")["value"], 0.0);
}

#[test]
fn ps_single_mode_and_complex_s() {
    let out = run(&["ps", "--level", "6", "--q1", "2", "--q2", "3", "--s", "2.5+i", "--mode", "closed"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = lines(&out);
    assert_eq!(rep[0]["parameters"]["s"], serde_json::json!([2.5, 1.0]));
    assert_eq!(check(&rep, "closed.value")["detail"]["result"]["mode"], "closed");
}

#[test]
fn ps_rejects_bad_split() {
    let out = run(&["ps", "--level", "6", "--q1", "2", "--q2", "5", "--s", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q1*q2"));
}

#[test]
fn smooth_example_value() {
    let f = temp_json("[0.1, 0.2]");
    let out = run(&["smooth", "--spectrum", f.path().to_str().unwrap(), "--T", "0.15", "--w", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = check(&lines(&out), "value")["value"].as_f64().unwrap();
    assert!((v - 0.05).abs() < 1e-15);
}

#[test]
fn smooth_sandwich_and_bad_spectrum() {
    let out = run(&["smooth", "--spectrum", &data("spectrum_small.json"), "--T", "0.15", "--delta", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = lines(&out);
    assert_eq!(check(&rep, "sandwich.lower")["pass"], true);
    assert_eq!(check(&rep, "sandwich.upper")["pass"], true);

    let f = temp_json("[0.3, -1.0]");
    let out = run(&["smooth", "--spectrum", f.path().to_str().unwrap(), "--T", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["smooth", "--spectrum", "/nonexistent/spectrum.json", "--T", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rankin_example_passes() {
    let out = run(&["rankin", "--seed", "1", "--s", "3.5"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = lines(&out);
    let summary = rep.last().unwrap();
    assert_eq!(summary["kind"], "summary");
    assert_eq!(summary["failed"], 0);
}

#[test]
fn failed_check_gives_nonzero_exit() {
    let out = run(&["rankin", "--systems", "1", "--tolerance", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(lines(&out).last().unwrap()["pass"], false);
}

#[test]
fn usage_errors() {
    for args in [
        &["bogus"][..],
        &["rankin", "--unknown-flag"][..],
        &["ps", "--level", "6"][..],
        &["ps", "--level", "6", "--q1", "2", "--q2", "3", "--s", "abc"][..],
        &["ps", "--level", "6", "--q1", "2", "--q2", "3", "--s", "3", "--mode", "guess"][..],
        &[][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"), "{args:?}");
        assert!(out.stdout.is_empty());
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn reports_are_deterministic_without_timestamps() {
    for args in [
        &["kato", "--seed", "5", "--families", "3", "--no-timestamp"][..],
        &["bessel", "--seed", "5", "--count", "5", "--no-timestamp"][..],
        &["rankin", "--seed", "2", "--systems", "3", "--no-timestamp"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!String::from_utf8_lossy(&a.stdout).contains("wall_time"));
    }
    let timed = lines(&run(&["characters", "--q", "7"]));
    assert!(timed[0].get("timestamp").is_some());
    assert!(timed.last().unwrap().get("wall_time_s").is_some());
}

#[test]
fn seed_changes_random_suites() {
    let a = run(&["bessel", "--seed", "1", "--count", "3", "--no-timestamp"]);
    let b = run(&["bessel", "--seed", "2", "--count", "3", "--no-timestamp"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn check_names_unique_and_summary_consistent() {
    let rep = lines(&run(&["kato", "--families", "4", "--dim", "5", "--eps-grid", "0.1,0.03,0.01,0.003"]));
    let checks: Vec<&Value> = rep.iter().filter(|l| l["kind"] == "check").collect();
    let names: HashSet<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names.len(), checks.len());
    assert_eq!(rep.last().unwrap()["checks"], checks.len());
    for (i, c) in checks.iter().enumerate() {
        assert_eq!(c["index"], i);
    }
}

#[test]
fn csv_output() {
    let out = run(&["characters", "--q", "5", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[2], "name");
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| &r[5] == "true"));
}

#[test]
fn config_defaults_and_flag_override() {
    let cfg = temp_json(r#"{"seed": 11, "no_timestamp": true}"#);
    let path = cfg.path().to_str().unwrap();
    let from_config = run(&["bessel", "--count", "2", "--config", path]);
    let explicit = run(&["bessel", "--count", "2", "--seed", "11", "--no-timestamp"]);
    assert_eq!(from_config.stdout, explicit.stdout);
    let overridden = lines(&run(&["bessel", "--count", "2", "--config", path, "--seed", "3"]));
    assert_eq!(overridden[0]["seed"], 3);

    let bad = temp_json(r#"{"sed": 1}"#);
    assert_eq!(run(&["bessel", "--config", bad.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn thread_cap_environment() {
    let out = bin()
        .args(["bessel", "--count", "4", "--no-timestamp"])
        .env("SPECTRAL_FORGE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, run(&["bessel", "--count", "4", "--no-timestamp"]).stdout);
    let bad = bin().args(["characters", "--q", "3"]).env("SPECTRAL_FORGE_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn trace_on_bundled_classes() {
    let out = run(&["trace", "--classes", &data("modular_group_truncated.json"), "--z", "0.5+0.2i"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rep = lines(&out);
    assert_eq!(check(&rep, "assembly")["value"], 0.0);
    assert_eq!(check(&rep, "total.linearity")["pass"], true);

    let broken = temp_json(r#"{"area": 1.0, "cusps": {"open": 2, "closed": 0, "chi_values": [], "k1": 1, "phi_trace": 0.0}}"#);
    assert_eq!(run(&["trace", "--classes", broken.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn twist_scan_infinite_threshold_is_empty() {
    let out = run(&["twist-scan", "--rmax", "12", "--threshold", "inf", "--terms", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = lines(&out);
    assert_eq!(check(&rep, "scan")["value"], 0.0);
    assert_eq!(rep.len(), 3);
}

#[test]
fn twist_scan_hits_are_stable() {
    let out = run(&["twist-scan", "--s", "2", "--M", "1", "--rmax", "20", "--terms", "5000"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = lines(&out);
    assert!(check(&rep, "scan")["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn characters_mod_five() {
    let rep = lines(&run(&["characters", "--q", "5"]));
    let parities: Vec<i64> = rep
        .iter()
        .filter(|l| l["kind"] == "check" && l["name"] != "count")
        .map(|l| l["detail"]["parity"].as_i64().unwrap())
        .collect();
    assert_eq!(parities.len(), 4);
    assert_eq!(parities.iter().filter(|&&p| p == 1).count(), 2);
    assert_eq!(parities.iter().filter(|&&p| p == -1).count(), 2);
}
