//! End-to-end runs of the `inls` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn inls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inls")).args(args).env_remove("INLS_THREADS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().next().unwrap_or_else(|| panic!("no stderr"));
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn s(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn ground_state_against_frozen_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("gs");
    let o = inls(&["ground-state", "--N", "3", "--b", "1", "--p", "2.5", "--omega", "1", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    let gs = &r["results"]["ground_state"];
    assert!(gs["pohozaev"].as_array().unwrap().iter().all(|v| v.as_f64().unwrap() <= 1e-6));
    assert!(rel(gs["center_value"].as_f64().unwrap(), 1.40675412948363) < 1e-6);
    assert!(rel(gs["functionals"]["mass"].as_f64().unwrap(), 84.81073575646701) < 1e-5);
    assert!(rel(gs["action_value"].as_f64().unwrap(), 28.2702452520337) < 1e-5);
    assert!(gs["boundary_value"].as_f64().unwrap() < 1e-4);

    let table = rows(&out.join("profile.csv"));
    assert_eq!(table[0], ["r", "re", "im"]);
    assert_eq!(table.len() - 1, gs["grid"]["nodes"].as_u64().unwrap() as usize);
    for cell in table[1..].iter().flatten() {
        let x: f64 = cell.parse().unwrap();
        assert_eq!(&format!("{x:.16e}"), cell);
    }
}

#[test]
fn instability_family_classifies_k_minus() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = tmp.path().join("inst");
    let o = inls(&["instability", "--N", "3", "--b", "1", "--p", "4", "--lambda", "0.2", "--out", s(&inst)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&inst)["results"]["tag"], "KMinus");

    let cl = tmp.path().join("cl");
    let field = inst.join("phi_lambda.csv");
    let o =
        inls(&["classify", "--N", "3", "--b", "1", "--p", "4", "--omega", "1", "--input", s(&field), "--out", s(&cl)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&cl);
    assert_eq!(r["results"]["tag"], "KMinus");
    let c = &r["results"]["classification"];
    assert!(c["s_value"].as_f64().unwrap() < c["d_value"].as_f64().unwrap());
    assert!(c["p_value"].as_f64().unwrap() < 0.0);
}

#[test]
fn unmet_blowup_expectation_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ev");
    let o = inls(&[
        "evolve",
        "--N",
        "3",
        "--b",
        "1",
        "--p",
        "2.5",
        "--amplitude",
        "0.5",
        "--T",
        "0.5",
        "--expect",
        "blowup",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 4);
    let err = stderr_json(&o);
    assert_eq!(err["exit_code"], 4);
    assert_eq!(err["error"], "expectation");
    let r = report(&out);
    assert_eq!(r["exit_code"], 4);
    assert_eq!(r["results"]["trajectory"]["status"], "Finished");
    let table = rows(&out.join("trajectory.csv"));
    assert_eq!(
        table[0],
        ["t", "mass", "energy", "kinetic", "potential", "virial", "variance", "grad_norm", "dist_to_Q"]
    );
    assert_eq!(table.len() - 1, 11);
}

#[test]
fn standing_wave_keeps_distance() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sw");
    let o = inls(&[
        "evolve",
        "--N",
        "3",
        "--b",
        "1",
        "--p",
        "2.5",
        "--datum",
        "ground-state",
        "--T",
        "0.5",
        "--expect",
        "global",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert!(r["results"]["trajectory"]["max_distance"].as_f64().unwrap() <= 1e-6);
    assert_eq!(r["results"]["classification"]["tag"], "AboveThreshold");
}

#[test]
fn validation_errors_exit_2_with_json() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let cases: Vec<Vec<&str>> = vec![
        vec!["ground-state", "--N", "3", "--b", "1", "--p", "7"],
        vec!["ground-state", "--N", "3", "--b", "1", "--p", "2.5", "--omega", "-1"],
        vec!["ground-state", "--N", "1", "--b", "1", "--p", "2.5"],
        vec!["ground-state", "--N", "3", "--b", "1"],
        vec!["ground-state", "--N", "3", "--b", "1", "--p", "2.5", "--R", "10"],
        vec!["stability", "--N", "3", "--b", "1", "--p", "4"],
        vec!["normalized", "--N", "3", "--b", "1", "--p", "3"],
        vec!["mass-critical", "--N", "3", "--b", "1", "--p", "2.5"],
        vec!["classify", "--N", "3", "--b", "1", "--p", "2.5"],
        vec!["classify", "--N", "3", "--b", "1", "--p", "2.5", "--input", "/nonexistent/field.csv"],
        vec!["evolve", "--N", "3", "--b", "1", "--p", "2.5", "--T", "-1"],
        vec!["no-such-command"],
        vec!["ground-state", "--bogus"],
    ];
    for mut args in cases {
        if args[0] != "no-such-command" {
            args.extend(["--out", s(&out)]);
        }
        let o = inls(&args);
        assert_eq!(code(&o), 2, "{args:?}");
        let err = stderr_json(&o);
        assert_eq!(err["error"], "validation", "{args:?}");
        assert!(err["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
    assert!(!out.join("report.json").exists());
}

#[test]
fn solver_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("coarse");
    let o = inls(&["ground-state", "--N", "3", "--b", "1", "--p", "2.5", "--R", "12", "--M", "32", "--out", s(&out)]);
    assert_eq!(code(&o), 3);
    assert_eq!(stderr_json(&o)["error"], "solver");
    assert_eq!(report(&out)["exit_code"], 3);
}

#[test]
fn d_omega_sweep_rows_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = inls(&["d-omega-sweep", "--N", "3", "--b", "1", "--p", "2.5", "--out", s(dir)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv_a = fs::read(a.join("d_omega.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("d_omega.csv")).unwrap());
    let table = rows(&a.join("d_omega.csv"));
    assert_eq!(table[0], ["omega", "d_numeric", "d_closed_form", "rel_diff"]);
    let omegas: Vec<f64> = table[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(omegas, [0.25, 0.5, 1.0, 2.0, 4.0]);
    for row in &table[1..] {
        let (d, closed): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        assert!(d > 0.0);
        assert!(rel(d, closed) <= 1e-6);
    }
    assert_eq!(report(&a)["results"]["convex"], true);
}

#[test]
fn flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("scenario.json");
    fs::write(
        &cfg,
        r#"{"name": "from-file", "kind": "d-omega-sweep",
            "params": {"dim": 3, "b": 1, "p": "5/2"},
            "settings": {"omegas": [2.0, 0.5, 1.0]}}"#,
    )
    .unwrap();
    let out = tmp.path().join("o");
    let o = inls(&["d-omega-sweep", "--config", s(&cfg), "--omegas", "1,3", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["name"], "from-file");
    assert_eq!(r["scenario"]["settings"]["omegas"], serde_json::json!([1.0, 3.0]));
    assert_eq!(r["scenario"]["params"]["p"], "5/2");
    assert_eq!(rows(&out.join("d_omega.csv")).len(), 3);

    let o = inls(&["ground-state", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn report_reruns_as_config() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let o = inls(&["mass-critical", "--N", "3", "--b", "1", "--p", "3", "--out", s(&first)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&first);
    let res = &r["results"];
    assert!(res["max_ratio_error"].as_f64().unwrap() <= 1e-10);
    assert_eq!(res["energies_negative"], true);

    let cfg = tmp.path().join("again.json");
    fs::write(&cfg, r["scenario"].to_string()).unwrap();
    let second = tmp.path().join("second");
    let o = inls(&["mass-critical", "--config", s(&cfg), "--out", s(&second)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(first.join("mass_critical.csv")).unwrap(), fs::read(second.join("mass_critical.csv")).unwrap());
}

#[test]
fn sweep_orders_rows_and_reports_worst() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("sweep.json");
    fs::write(
        &cfg,
        r#"{"defaults": {"params": {"dim": 3, "b": 1, "p": 2.5}},
            "scenarios": [
              {"name": "zeta", "kind": "ground-state"},
              {"name": "alpha", "kind": "d-omega-sweep", "settings": {"omegas": [1.0, 2.0]}},
              {"name": "bad", "kind": "stability", "params": {"p": 4}},
              {"name": "mid", "kind": "evolve", "settings": {"t_final": 0.1, "expect": "blowup"}}
            ]}"#,
    )
    .unwrap();
    let out = tmp.path().join("sw");
    let o = Command::new(env!("CARGO_BIN_EXE_inls"))
        .args(["sweep", "--config", s(&cfg), "--out", s(&out)])
        .env("INLS_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 4);
    let table = rows(&out.join("summary.csv"));
    assert_eq!(table[0], ["name", "kind", "exit_code", "status", "message"]);
    let names: Vec<&str> = table[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["alpha", "bad", "mid", "zeta"]);
    let codes: Vec<&str> = table[1..].iter().map(|r| r[2].as_str()).collect();
    assert_eq!(codes, ["0", "2", "4", "0"]);
    assert!(out.join("zeta").join("profile.csv").exists());
    assert!(out.join("alpha").join("d_omega.csv").exists());
}

#[test]
fn empty_sweep_is_success() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("empty.json");
    fs::write(&cfg, r#"{"scenarios": []}"#).unwrap();
    let out = tmp.path().join("sw");
    let o = inls(&["sweep", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap(), "name,kind,exit_code,status,message\n");
}

#[test]
fn duplicate_sweep_names_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("dup.json");
    fs::write(&cfg, r#"{"scenarios": [{"name": "a", "kind": "ground-state"}, {"name": "a", "kind": "identities"}]}"#)
        .unwrap();
    let o = inls(&["sweep", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_thread_cap_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_inls"))
        .args(["ground-state", "--N", "3", "--b", "1", "--p", "2.5", "--out", s(&tmp.path().join("o"))])
        .env("INLS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn m_c_ladder_decreasing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("mc");
    let o = inls(&["m-c-sweep", "--N", "3", "--b", "1", "--p", "2.5", "--c-ladder", "120,85,170", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&out.join("m_c.csv"));
    assert_eq!(table[0], ["c", "m_c", "omega_c", "iterations", "residual"]);
    let c: Vec<f64> = table[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    let m: Vec<f64> = table[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(c, [85.0, 120.0, 170.0]);
    assert!(m.iter().all(|&v| v < 0.0));
    for i in 0..3 {
        for j in i + 1..3 {
            assert!(m[j] < m[i]);
            assert!(m[j] < c[j] / c[i] * m[i]);
        }
    }
    for r in &table[1..] {
        assert!(r[4].parse::<f64>().unwrap() <= 1e-5);
    }
}

#[test]
fn short_stability_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("st");
    let o = inls(&["stability", "--N", "3", "--b", "1", "--p", "2.5", "--T", "1", "--seeds", "3,7", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["results"]["within_margin"], true);
    assert!(out.join("trajectory_seed3.csv").exists());
    assert!(out.join("trajectory_seed7.csv").exists());
    let seeds = r["results"]["seeds"].as_array().unwrap();
    assert_eq!(seeds[0]["seed"], 3);
    for row in seeds {
        assert_eq!(row["status"], "Finished");
    }
}
