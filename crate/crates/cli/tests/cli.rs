use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hfboost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfboost")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = hfboost(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn err_line(args: &[&str]) -> String {
    let out = hfboost(args);
    assert!(!out.status.success(), "{args:?} should fail");
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert_eq!(err.trim_end().lines().count(), 1, "one-line error expected, got {err:?}");
    assert!(err.starts_with("error: "));
    err
}

fn write_config(dir: &Path, edit: impl FnOnce(&mut Value)) -> String {
    let mut cfg: Value = serde_json::to_value(hfboost::scenario::ScenarioConfig::paper_default()).unwrap();
    edit(&mut cfg);
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn design_observer_reports_gain_and_residuals() {
    let v = ok_json(&["design-observer", "--freq", "400", "--sample-rate", "18000", "--rho", "0.99"]);
    let printed = [0.0098, 0.0195, 0.0019, 0.0192, 0.0037, 0.0189, 0.0047];
    for (got, want) in v["L_d"].as_array().unwrap().iter().zip(printed) {
        assert!((f(got) - want).abs() < 2e-3);
    }
    assert_eq!(v["S_d"].as_array().unwrap().len(), 7);
    assert!((f(&v["T"]) - 1.0 / 18000.0).abs() < 1e-18);

    let v = ok_json(&["design-observer", "--freq", "100", "--sample-rate", "18000", "--rho", "0.99"]);
    assert!(v["residuals"].as_array().unwrap().iter().all(|r| f(r) <= 1e-6));
}

#[test]
fn design_observer_rejects_bad_rho() {
    let e = err_line(&["design-observer", "--freq", "400", "--sample-rate", "18000", "--rho", "1.5"]);
    assert!(e.contains("rho must be in (0,1)"), "{e}");
}

#[test]
fn simulate_then_analyze_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("off.csv");
    let metrics = dir.path().join("off.json");
    let summary = ok_json(&[
        "simulate",
        "--preset",
        "paper-default",
        "--feedback",
        "off",
        "--trace",
        trace.to_str().unwrap(),
        "--metrics",
        metrics.to_str().unwrap(),
    ]);
    assert!((f(&summary["mean_v_dc"]) - 24.0).abs() < 0.005 * 24.0);
    let on_disk: Value = serde_json::from_str(&std::fs::read_to_string(&metrics).unwrap()).unwrap();
    assert_eq!(on_disk, summary);

    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,v_dc,i_L,duty,zv1,zv2,zv3,zv4,zv5,zv6,zv7,zi1,zi2,zi3,zi4,zi5,zi6,zi7,i_load,beta"
    );
    assert_eq!(lines.count(), 18_000);

    for (column, key) in [("v_dc", "v_dc"), ("i_L", "i_l")] {
        let m = ok_json(&["analyze", "--trace", trace.to_str().unwrap(), "--column", column]);
        assert_eq!(m, summary[key], "{column}");
    }
}

#[test]
fn analyze_with_baseline_reports_reduction() {
    let dir = tempfile::tempdir().unwrap();
    let off = dir.path().join("off.csv");
    let on = dir.path().join("v.csv");
    ok_json(&["simulate", "--preset", "paper-default", "--trace", off.to_str().unwrap()]);
    ok_json(&["simulate", "--preset", "paper-default", "--feedback", "voltage", "--trace", on.to_str().unwrap()]);
    let m = ok_json(&["analyze", "--trace", on.to_str().unwrap(), "--baseline", off.to_str().unwrap()]);
    let base = ok_json(&["analyze", "--trace", off.to_str().unwrap()]);
    let want = (f(&base["p2p_lowpass"]) - f(&m["p2p_lowpass"])) / f(&base["p2p_lowpass"]);
    assert_eq!(f(&m["reduction_vs_baseline"]), want);
    assert!(want >= 0.4);
}

fn synthetic_trace(path: &Path, v: impl Fn(f64) -> f64) {
    let mut w = csv::Writer::from_path(path).unwrap();
    w.write_record(hfboost::analysis::Column::header()).unwrap();
    let beta = 2.0 * PI * 400.0;
    for k in 0..9000 {
        let t = k as f64 / 18000.0;
        let mut row = [0.0; 20];
        row[0] = t;
        row[1] = v(t);
        row[19] = beta;
        w.write_record(row.iter().map(|x| x.to_string())).unwrap();
    }
    w.flush().unwrap();
}

#[test]
fn analyze_synthetic_traces() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.csv");
    synthetic_trace(&flat, |_| 24.0);
    let m = ok_json(&["analyze", "--trace", flat.to_str().unwrap()]);
    assert_eq!(f(&m["p2p_raw"]), 0.0);
    assert_eq!(f(&m["p2p_lowpass"]), 0.0);

    let tone = dir.path().join("tone.csv");
    let w = 2.0 * PI * 400.0;
    synthetic_trace(&tone, |t| 24.0 + 0.1 * (w * t).cos() + 0.03 * (3.0 * w * t + 0.4).cos());
    let m = ok_json(&["analyze", "--trace", tone.to_str().unwrap(), "--window", "0.1:0.45", "--fundamental", "400"]);
    let h = m["harmonics"].as_array().unwrap();
    for (got, want) in h.iter().zip([0.1, 0.0, 0.03]) {
        assert!((f(&got["magnitude"]) - want).abs() <= 0.01 * 0.1, "{got}");
    }
    assert!(m["switching_mag"].is_null());
}

#[test]
fn calc_ripple_reproduces_design_values() {
    let base = [
        "calc-ripple",
        "--vin",
        "13.9",
        "--vout",
        "24",
        "--iout",
        "2.65",
        "--fs",
        "18000",
        "--L",
        "330e-6",
        "--C",
        "470e-6",
        "--esr",
        "0.1",
        "--dv",
        "0.24",
        "--duty",
    ];
    let mut args = base.to_vec();
    args.push("0.55");
    let v = ok_json(&args);
    assert!((f(&v["c_out_min"]) - 337.4e-6).abs() < 0.1e-6);
    assert!((f(&v["dv_esr"]) - 0.653).abs() < 1e-3);
    assert!((f(&v["di_est"][0]) - 0.915).abs() < 1e-3);
    assert!((f(&v["di_est"][1]) - 1.830).abs() < 1e-3);
    assert!((f(&v["di_max"]) - 1.287).abs() < 1e-3);
    assert!((f(&v["di_max_simulated"]) - f(&v["di_max"])).abs() < 0.05 * f(&v["di_max"]));

    let mut args = base.to_vec();
    args.push("0");
    let v = ok_json(&args);
    assert_eq!(f(&v["di_max"]), 0.0);
}

#[test]
fn config_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |c| c["sim"]["duration"] = 0.0.into());
    let e = err_line(&["simulate", "--config", &cfg]);
    assert!(e.contains("duration"), "{e}");

    let cfg = write_config(dir.path(), |c| {
        c["controller"]["Kv"].as_object_mut().unwrap().insert("z8".into(), 0.1.into());
    });
    let e = err_line(&["simulate", "--config", &cfg]);
    assert!(e.contains("z8"), "{e}");

    let e = err_line(&["simulate", "--preset", "nope"]);
    assert!(e.starts_with("error: input:"), "{e}");
}

#[test]
fn divergence_exits_nonzero_with_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |c| c["controller"]["v_ref"] = 2.0.into());
    let trace = dir.path().join("partial.csv");
    let e = err_line(&["simulate", "--config", &cfg, "--trace", trace.to_str().unwrap()]);
    assert!(e.starts_with("error: divergence:"), "{e}");
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.lines().count() >= 2);
}

#[test]
fn tune_is_deterministic_and_emits_gains() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |c| c["sim"]["duration"] = 0.3.into());
    let args = ["tune", "--config", &cfg, "--target", "voltage", "--grid-points", "5", "--passes", "1"];
    let a = ok_json(&args);
    let b = ok_json(&args);
    assert_eq!(a, b);
    assert_eq!(a["target"], "voltage");
    for g in ["z2", "z3", "z4", "z5", "z6", "z7"] {
        assert!(a["K"][g].is_f64());
    }
    assert!(f(&a["objective"]) <= f(&a["baseline"]));
    let want = (f(&a["baseline"]) - f(&a["objective"])) / f(&a["baseline"]);
    assert_eq!(f(&a["reduction"]), want);
}
