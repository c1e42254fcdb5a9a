use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lorenz-reservoir"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: [&str; 10] = [
    "--washout", "200", "--train", "1000", "--test", "200", "--horizon", "300", "--sync", "100",
];

#[test]
fn generate_writes_csv_and_scaler() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = bin(&["generate", "--samples", "50", "--seed", "4", "--out", arg(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("k,X,Y,Z"));
    assert_eq!(text.lines().count(), 51);
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("traj.scaler.json")).unwrap()).unwrap();
    assert_eq!(side["seed"], 4);
    assert_eq!(side["min"].as_array().unwrap().len(), 3);
}

#[test]
fn run_emits_model_timeseries_and_psd() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let ts = dir.path().join("ts.csv");
    let psd = dir.path().join("psd.csv");
    let mut args = vec![
        "run", "--topology", "ring", "--rho", "0.2", "--seed", "3", "--lambda", "1e-5",
        "--emit-model", arg(&model), "--emit-timeseries", arg(&ts), "--emit-psd", arg(&psd),
    ];
    args.extend_from_slice(&SMALL);
    let o = bin(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let record: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(record["topology"], "ring");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(m["lambda"], 1e-5);
    assert_eq!(m["W_a"].as_array().unwrap().len(), 20);
    assert_eq!(m["rho_a"], record["rho_a"]);

    let ts_text = std::fs::read_to_string(&ts).unwrap();
    assert_eq!(ts_text.lines().next(), Some("k,X,Y,Z,Xhat,Yhat,Zhat"));
    assert_eq!(ts_text.lines().count(), 301);
    assert_eq!(std::fs::read_to_string(&psd).unwrap().lines().next(), Some("f,S"));
    assert!(dir.path().join("psd.target.csv").exists());
}

#[test]
fn sweep_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let mut args = vec![
        "sweep", "--topologies", "uncoupled,random", "--rho-min", "0", "--rho-max", "0.2",
        "--rho-step", "0.1", "--realizations", "2", "--seed", "9", "--out", arg(&out),
        "--threads", "2",
    ];
    args.extend_from_slice(&SMALL);
    let o = bin(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let records = std::fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 2 * 3 * 2);
    assert!(out.join("meta.json").exists());

    let again = dir.path().join("again");
    let o = bin(&["analyze", "--records", arg(&out.join("records.csv")), "--out", arg(&again)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read_to_string(again.join("summary.csv")).unwrap(),
        std::fs::read_to_string(out.join("summary.csv")).unwrap()
    );
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("a.csv");
    std::fs::write(
        &cfg,
        format!(r#"{{"samples": 30, "seed": 1, "out": "{}"}}"#, arg(&out)),
    )
    .unwrap();
    let o = bin(&["--config", arg(&cfg), "generate", "--samples", "12"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 13);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    assert_eq!(code(&bin(&["generate", "--seed", "1", "--out", arg(&out)])), 2);
    assert_eq!(code(&bin(&["run", "--topology", "star", "--rho", "0.1", "--seed", "1"])), 2);
    assert_eq!(code(&bin(&["run", "--topology", "ring", "--rho", "-1", "--seed", "1"])), 2);
    assert_eq!(code(&bin(&["frobnicate"])), 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"unknown-key": 1}"#).unwrap();
    assert_eq!(code(&bin(&["--config", arg(&bad), "generate"])), 2);
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.csv");
    let o = bin(&["analyze", "--records", arg(&missing), "--out", arg(dir.path())]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("none.csv"));
}
