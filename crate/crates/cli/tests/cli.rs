use std::path::Path;
use std::process::{Command, Output};

fn bclab(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bclab"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const POWER_FAMILY: &str = r#"{"template": "nested_left", "a": {"kind": "closed", "template": "power", "c": 1.0, "p": -0.5}}"#;

fn write_config(dir: &Path, horizon: usize, prediction: &str) -> String {
    let path = dir.join("cfg.json");
    let body = format!(
        r#"{{"process": {{"kind": "iid"}}, "family": {POWER_FAMILY}, "horizon": {horizon},
            "trajectories": 8, "seed": 42, "prediction": "{prediction}"}}"#
    );
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn simulate_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 10_000, "sbc");
    let out = dir.path().join("run");
    let o = bclab(
        &["simulate", "--config", &cfg, "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["hits.jsonl", "summary.csv", "criteria.json", "report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(csv.starts_with("checkpoint,mean_ratio,median_S,q10,q90,hit_frac_late\n"));
    std::fs::remove_file(out.join("summary.md")).unwrap();
    let o = bclab(
        &["report", "--run", out.to_str().unwrap(), "--format", "md"],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let md = std::fs::read_to_string(out.join("summary.md")).unwrap();
    assert!(md.contains("| prediction Sbc | Pass |"));
}

#[test]
fn failing_prediction_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 1000, "not_bc");
    assert_eq!(code(&bclab(&["simulate", "--config", &cfg], &[])), 2);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 5000, "bc");
    let mut hits = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "3"), ("c", "3")] {
        let out = dir.path().join(name);
        let o = bclab(
            &["simulate", "--config", &cfg, "--out", out.to_str().unwrap()],
            &[("BCLAB_THREADS", threads)],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        hits.push(std::fs::read(out.join("hits.jsonl")).unwrap());
    }
    assert_eq!(hits[0], hits[1]);
    assert_eq!(hits[1], hits[2]);
}

#[test]
fn config_errors_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 50, "bc");
    assert_eq!(code(&bclab(&["simulate", "--config", &cfg], &[])), 4);
    assert_eq!(
        code(&bclab(&["simulate", "--config", "/nonexistent.json"], &[])),
        4
    );
    assert_eq!(code(&bclab(&["simulate"], &[])), 4);
    let good = write_config(dir.path(), 1000, "bc");
    assert_eq!(
        code(&bclab(
            &["simulate", "--config", &good],
            &[("BCLAB_THREADS", "zero")]
        )),
        4
    );
}

#[test]
fn criteria_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = |name: &str, p: f64| {
        let path = dir.path().join(name);
        let body = format!(
            r#"{{"check": "pairwise", "mode": "strong", "horizon": 10000,
                "gamma": {{"kind": "closed", "template": "power", "c": 0.0, "p": 0.0}},
                "phi": {{"kind": "closed", "template": "power", "c": 0.0, "p": 0.0}},
                "alpha": {{"kind": "closed", "template": "power", "c": 0.0, "p": 0.0}},
                "p": {{"kind": "closed", "template": "power", "c": 1.0, "p": {p}}}}}"#
        );
        std::fs::write(&path, body).unwrap();
        path
    };
    let ok = bclab(
        &[
            "criteria",
            "--spec",
            spec("ok.json", -0.5).to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let reports: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(reports[0]["criterion"], "pairwise_strong");
    let bad = bclab(
        &[
            "criteria",
            "--spec",
            spec("bad.json", -2.0).to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&bad), 2);
}

#[test]
fn mixing_tables() {
    let o = bclab(
        &[
            "mixing", "--task", "dmr", "--a", "1", "--grid", "200", "--lags", "10,20",
        ],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,value,lower,upper");
    assert_eq!(lines.len(), 3);
    let o = bclab(
        &[
            "mixing", "--task", "circle", "--k-max", "1000", "--grid", "256", "--lags", "4",
        ],
        &[],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(code(&bclab(&["mixing", "--task", "kernel"], &[])), 4);
}
