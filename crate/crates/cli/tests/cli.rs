use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn nmcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmcode")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn capacity_prints_value() {
    let o = nmcode(&["bounds", "capacity", "--rho-r", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.75\n");
}

#[test]
fn bounds_json_and_missing_field() {
    let o = nmcode(&["bounds", "regime-c2", "--rho", "0.6", "--rho-r", "0.2", "--rho-w", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "main");
    let o = nmcode(&["bounds", "c2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("delta"));
}

#[test]
fn amd_audit_exit_codes() {
    let o = nmcode(&["amd", "audit", "--k", "3", "--u", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["max_failure"], "1/4");
    // (k, u) = (1, 2) exceeds the closed-form bound
    let o = nmcode(&["amd", "audit", "--k", "1", "--u", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = nmcode(&["amd", "audit", "--k", "3", "--u", "3", "--format", "csv"]);
    assert!(stdout(&o).starts_with("delta,failure_rate\n"));
}

#[test]
fn wt_audit_csv_header() {
    let o = nmcode(&["wt", "audit", "--h", "3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("set,m0,m1,sd\n"));
    let o = nmcode(&["wt", "audit", "--h", "3"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["zero_up_to"], 3);
    assert_eq!(v["witness_set"].as_array().unwrap().len(), 4);
}

#[test]
fn lecss_verify_toy() {
    let o = nmcode(&["lecss", "verify"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((v["measured_d"].as_u64(), v["measured_t"].as_u64()), (Some(4), Some(3)));
}

#[test]
fn nm_audit_schema_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = ["nm", "audit", "--construction", "2", "--h", "5", "--adversaries", "6", "--mode", "montecarlo"];
    for path in [&a, &b] {
        let mut v: Vec<&str> = args.to_vec();
        v.extend(["--samples", "20000", "--seed", "7", "--out", path.to_str().unwrap()]);
        assert_eq!(nmcode(&v).status.code(), Some(0));
    }
    let (ja, jb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let v: Value = serde_json::from_slice(&ja).unwrap();
    for key in ["code_params", "regime", "claimed_bound", "per_adversary", "max_sd", "mode", "seed", "samples"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let row = &v["per_adversary"][0];
    for key in ["f_digest", "max_sd", "worst_m"] {
        assert!(row.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["seed"], 7);
    assert_eq!(v["mode"], "montecarlo");
}

#[test]
fn nm_audit_thread_count_does_not_change_output() {
    let args = ["nm", "audit", "--h", "4", "--adversaries", "8", "--seed", "2"];
    let one = Command::new(env!("CARGO_BIN_EXE_nmcode")).args(args).env("NMCODE_THREADS", "1").output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_nmcode")).args(args).env("NMCODE_THREADS", "4").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_nmcode")).args(args).env("NMCODE_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn infeasible_exact_suggests_montecarlo() {
    let o = nmcode(&["nm", "audit", "--w", "8", "--n", "8", "--ell", "3", "--rho-r", "0.25", "--adversaries", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--mode montecarlo"), "{}", stderr(&o));
}

#[test]
fn config_file_handling() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, "").unwrap();
    let o = nmcode(&["--config", empty.to_str().unwrap(), "bounds", "capacity"]);
    assert_eq!(stdout(&o), "1\n");

    let file = dir.path().join("cfg.json");
    fs::write(&file, "{\"rho_r\": 0.5}").unwrap();
    let o = nmcode(&["--config", file.to_str().unwrap(), "bounds", "capacity"]);
    assert_eq!(stdout(&o), "0.5\n");
    let o = nmcode(&["--config", file.to_str().unwrap(), "bounds", "capacity", "--rho-r", "0.25"]);
    assert_eq!(stdout(&o), "0.75\n");

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"seed\": 1,\n  \"colour\": 3\n}").unwrap();
    let o = nmcode(&["--config", bad.to_str().unwrap(), "bounds", "capacity"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour") && stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn smt_run_and_rejection() {
    let o = nmcode(&["smt", "run", "--adversaries", "20", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["secrecy"]["max_sd_exact"], "0");
    assert_eq!(v["delta"], "1/4");
    assert_eq!(v["nm_audit"]["bound_respected"], true);
    let o = nmcode(&["smt", "run", "--t", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(1 + t/n)/2"));
}

#[test]
fn code_build_reports_regime() {
    let o = nmcode(&["code", "build", "--construction", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["regime"]["verdict"], "main");
    assert_eq!(v["read_budget"], 1);
}
