use std::fs;
use std::process::{Command, Output};

fn qwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .env_remove("QWALK_JOBS")
        .output()
        .expect("failed to launch qwalk")
}

fn stdout(args: &[&str]) -> String {
    let out = qwalk(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn spectrum_of_nine_by_nine() {
    let text = stdout(&["spectrum", "--n", "9", "--boundary", "open"]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,n,lambda"));
    let values: Vec<f64> = lines
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 81);
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    assert!(values[0].abs() < 1e-8 && values[80] < 8.0);
}

#[test]
fn corner_series_first_peak() {
    let text = stdout(&[
        "evolve", "--n", "15", "--source", "corner", "--t-max", "20", "--dt", "0.01",
        "--observe", "opposite-corner", "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["meta"]["command"], "evolve");
    let peak = &doc["data"]["first_peak"];
    let (t, v) = (peak["time"].as_f64().unwrap(), peak["value"].as_f64().unwrap());
    assert!((t - 8.4).abs() <= 0.2, "{t}");
    assert!((v - 0.08).abs() <= 0.01, "{v}");
    assert_eq!(doc["data"]["t"].as_array().unwrap().len(), 2001);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (path, jobs) in [(&a, "1"), (&b, "3")] {
        let out = qwalk(&[
            "scan", "--n-min", "1", "--n-max", "13", "--format", "json", "--jobs", jobs,
            "-o", path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let args = ["limiting", "--n", "5,6", "--source", "corner"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn scan_flags_six_and_twelve() {
    let text = stdout(&["scan", "--n-min", "1", "--n-max", "13"]);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("N,chi_cc,chi_oc,diff_scaled,asymmetric,tolerance_sensitive")
    );
    let flagged: Vec<usize> = lines
        .filter(|l| l.split(',').nth(4) == Some("true"))
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(flagged, vec![6, 12]);
}

#[test]
fn limiting_fields_are_normalized() {
    let text = stdout(&["limiting", "--n", "5", "--source", "middle", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let total = doc["data"][0]["total"].as_f64().unwrap();
    assert!((total - 1.0).abs() < 1e-10);
    assert_eq!(doc["data"][0]["grid"].as_array().unwrap().len(), 5);
}

#[test]
fn snapshots_cover_every_node() {
    let text = stdout(&["evolve", "--n", "4", "--times", "0,1.5"]);
    assert_eq!(text.lines().count(), 1 + 2 * 16);
    assert!(text.starts_with("t,kx,ky,value\n"));
}

#[test]
fn bloch_compare_columns() {
    let text = stdout(&["bloch-compare", "--n", "5", "--source", "middle", "--t-max", "1", "--dt", "0.5"]);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("N,jx,jy,kx,ky,t,finite,pbc,pbc_return,bulk")
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..6], &["5", "3", "3", "3", "3", "0.0000000000000000e0"]);
    assert_eq!(lines.count(), 2);
}

#[test]
fn invalid_configuration_is_reported_at_once() {
    let out = qwalk(&["evolve", "--n", "4", "--source", "middle", "--observe", "9,9", "--gamma", "-2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--gamma"));
    assert!(err.contains("no middle node"));
    assert!(err.contains("outside"));
    assert!(out.stdout.is_empty());
}

#[test]
fn unwritable_output_is_an_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let out = qwalk(&["spectrum", "--n", "3", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn jobs_fall_back_to_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(["spectrum", "--n", "3"])
        .env("QWALK_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
