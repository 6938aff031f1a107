use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn advs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_advs")).args(args).env_remove("ADVS_BUDGET").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

/// (method, p1, rel_dev) for each CSV row of a p1 report.
fn p1_rows(text: &str) -> Vec<(String, f64, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[3].to_string(), f[4].parse().unwrap(), f[6].parse().unwrap())
        })
        .collect()
}

#[test]
fn gap_examples() {
    assert_eq!(stdout(&advs(&["gap", "--n", "2", "--s", "0.5"])), "s,gap\n0.5,0.5\n");
    assert_eq!(stdout(&advs(&["gap", "--n", "10", "--s", "0"])), "s,gap\n0,1\n");
    assert_eq!(stdout(&advs(&["gap", "--n", "4", "--grid", "3"])), "s,gap\n0,1\n0.5,0.25\n1,1\n");
}

#[test]
fn gap_json_round_trips() {
    let o = advs(&["gap", "--n", "12", "--s", "0.1,0.3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let g = v[1]["gap"].as_f64().unwrap();
    let d = 1.0 - 2.0f64.powi(-12);
    assert_eq!(g, ((1.0 - 2.0 * 0.3f64).powi(2) * d + 2.0f64.powi(-12)).sqrt());
}

#[test]
fn uniform_schedule_document() {
    let o = advs(&["schedule", "--kind", "uniform", "--n", "4", "--runtime", "10"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["T"].as_f64().unwrap(), 10.0);
    for pair in v["grid"].as_array().unwrap() {
        let (t, s) = (pair[0].as_f64().unwrap(), pair[1].as_f64().unwrap());
        assert!((s - t / 10.0).abs() < 1e-12);
    }
}

#[test]
fn matrix_elements_carry_signs() {
    let o = advs(&["matrix-elements", "--n", "2", "--s", "0.5", "--form", "large-n"]);
    let text = stdout(&o);
    // Marked item 01: z signs follow the bits, x is always negative.
    assert!(text.contains("0.5,0,x,-0.5,0\n"), "{text}");
    assert!(text.contains("0.5,0,z,0.5,0\n"), "{text}");
    assert!(text.contains("0.5,1,z,-0.5,0\n"), "{text}");
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(advs(&["gap", "--n", "2"]).status.code(), Some(1));
    assert_eq!(advs(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(advs(&["p1", "--config", "/nonexistent/run.json"]).status.code(), Some(1));
    assert_eq!(advs(&["gap", "--n", "2", "--s", "1.5"]).status.code(), Some(1));
}

#[test]
fn bad_configs_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        r#"{"n_range": [6], "schedules": ["uniform"], "baths": ["ohmic"], "colour": 1}"#,
        r#"{"n_range": [6], "schedules": ["uniform"], "baths": ["ohmic"], "seed": 3}"#,
        r#"{"n_range": [6], "schedules": ["uniform"], "baths": ["no_such_bath"]}"#,
        r#"{"n_range": [], "schedules": ["uniform"], "baths": ["ohmic"]}"#,
        "not json",
    ] {
        let cfg = write_config(dir.path(), body);
        let o = advs(&["p1", "--config", &cfg]);
        assert_eq!(o.status.code(), Some(1), "{body}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn numerical_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"n_range": [8], "schedules": ["gap_squared"], "baths": ["photon_thermal(3)"]}"#);
    let o = Command::new(env!("CARGO_BIN_EXE_advs")).args(["p1", "--config", &cfg]).env("ADVS_BUDGET", "100").output().unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let o = Command::new(env!("CARGO_BIN_EXE_advs")).args(["gap", "--n", "2", "--s", "0.5"]).env("ADVS_BUDGET", "lots").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn zero_coupling_gives_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"n_range": [6], "schedules": ["gap_squared"], "baths": ["photon_thermal(3)"], "lambda": 0}"#);
    let o = advs(&["p1", "--config", &cfg, "--method", "all"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = p1_rows(&stdout(&o));
    assert_eq!(rows.len(), 3, "markov skipped for a structured bath");
    assert!(rows.iter().all(|r| r.1 == 0.0 && r.2 == 0.0));
}

#[test]
fn time_and_frequency_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"n_range": [6], "schedules": ["gap_linear"], "baths": ["photon_thermal(3)"], "topology": "independent_baths", "methods": ["frequency_domain", "time_domain"]}"#,
    );
    let o = advs(&["p1", "--config", &cfg]);
    let rows = p1_rows(&stdout(&o));
    assert_eq!(rows[1].0, "time");
    assert!(rows[1].2 < 1e-3, "{rows:?}");
}

#[test]
fn markovian_slope_through_the_fit_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"n_range": [8, 10, 12, 14, 16, 18, 20], "schedules": ["gap_squared"], "baths": ["markovian"], "methods": ["markovian"]}"#);
    let out = dir.path().join("out");
    let o = advs(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = advs(&["fit", out.join("sweep.csv").to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let k = v[0]["exponent"].as_f64().unwrap();
    assert!((k - 0.5).abs() < 0.05, "{k}");
    assert_eq!(v[0]["class"], "non-scalable");
}

#[test]
fn fit_recovers_synthetic_sqrt() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("n,N,schedule,preset,method,T,gap_min,p1,err,seconds\n");
    for n in 6..=12 {
        let big = 1u64 << n;
        csv += &format!("{n},{big},uniform,ohmic,freq,1,1,{},0,0\n", 0.001 * (big as f64).sqrt());
    }
    let path = dir.path().join("synthetic.csv");
    fs::write(&path, csv).unwrap();
    let o = advs(&["fit", path.to_str().unwrap()]);
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((row[3].parse::<f64>().unwrap() - 0.5).abs() < 1e-12, "{text}");
}

#[test]
fn sweep_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"n_range": [6, 7, 8, 9], "schedules": ["gap_squared", "gap_linear"], "baths": ["photon_thermal(1)", "photon_thermal(3)"], "methods": ["frequency_domain", "asymptotic"], "format": "dat"}"#,
    );
    let mut outputs = Vec::new();
    for (run, jobs) in [("a", "1"), ("b", "4")] {
        let out = dir.path().join(run);
        let o = advs(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", jobs]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("photon_thermal(1)"));
        outputs.push(["sweep.csv", "summary.json", "sweep.dat"].map(|f| fs::read(out.join(f)).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let header = String::from_utf8(outputs[0][0].clone()).unwrap();
    assert!(header.starts_with("n,N,schedule,preset,method,T,gap_min,p1,err,seconds\n"));
}

#[test]
fn sweep_to_stdout_in_each_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"n_range": [6, 7, 8, 9], "schedules": ["gap_squared"], "baths": ["photon_thermal(3)"]}"#);
    let csv = stdout(&advs(&["sweep", "--config", &cfg]));
    assert_eq!(csv.lines().count(), 5);
    let json = stdout(&advs(&["sweep", "--config", &cfg, "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["classifications"][0]["class"], "scalable");
    let dat = stdout(&advs(&["sweep", "--config", &cfg, "--format", "dat", "--n", "6..10"]));
    assert_eq!(dat.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).count(), 5);
}
