//! End-to-end runs of the `rtn` binary.

use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn rtn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtn"))
        .args(args)
        .env_remove("RTN_SEED")
        .output()
        .expect("binary runs")
}

fn ok_stdout(args: &[&str]) -> String {
    let out = rtn(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rtt5(dir: &Path) -> String {
    let path = dir.join("rtt5.json");
    let p = path.to_str().unwrap();
    ok_stdout(&["geometry", "rtt", "--n", "5", "--closed", "--a", "2", "--b", "2", "--out", p]);
    p.to_string()
}

#[test]
fn effdim_of_closed_rtt5() {
    let dir = tempfile::tempdir().unwrap();
    let g = rtt5(dir.path());
    let v: Value = serde_json::from_str(&ok_stdout(&["effdim", "--geometry", &g])).unwrap();
    assert_eq!(v["inv_deff"], "7808/59049");
    let closed: Value = serde_json::from_str(&ok_stdout(&["effdim", "--geometry", &g, "--closed-form"])).unwrap();
    assert_eq!(closed["inv_deff"], "7808/59049");
}

#[test]
fn partition_reports_exact_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let g = rtt5(dir.path());
    let v: Value =
        serde_json::from_str(&ok_stdout(&["partition", "--geometry", &g, "--bounds", "--order", "min-degree"]))
            .unwrap();
    assert!(v["exact_num"].is_string() && v["exact_den"].is_string());
    assert!(v["lower"].is_string() && v["upper"].is_string());
}

#[test]
fn hierarchy_rtt_rows_are_maximal() {
    let csv = ok_stdout(&["hierarchy", "--n", "20", "--b-range", "2:10"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "geometry,b,a,n,inv_deff_num,inv_deff_den,scaled_float");
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 5 * 9);
    for b in 2..=10 {
        let at_b: Vec<&Vec<String>> = rows.iter().filter(|r| r[1] == b.to_string()).collect();
        let value = |name: &str| -> f64 {
            at_b.iter().find(|r| r[0] == name).unwrap()[6].parse().unwrap()
        };
        let rtt = value("rtt");
        for r in &at_b {
            if r[0] != "rtt" {
                assert!(rtt > r[6].parse::<f64>().unwrap(), "b={b}: {} not below rtt", r[0]);
            }
        }
        assert!(value("single-tensor") <= value("black-hole-center"));
    }
}

#[test]
fn moments_cue_exits_cleanly() {
    let v: Value = serde_json::from_str(&ok_stdout(&[
        "moments", "--ensemble", "cue", "--dim", "4", "--samples", "1000",
    ]))
    .unwrap();
    assert_eq!(v["dim"], 4);
    assert!(v["entries"].as_array().unwrap().len() > 0);
}

#[test]
fn output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let g = rtt5(dir.path());
    let run = |threads: &str, name: &str| {
        let path = dir.path().join(name);
        ok_stdout(&[
            "mc", "--geometry", &g, "--what", "overlap4", "--samples", "3000", "--seed", "5", "--threads", threads,
            "--out", path.to_str().unwrap(),
        ]);
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("1", "a.json"), run("4", "b.json"));

    let hier = |threads: &str| ok_stdout(&["hierarchy", "--n", "20", "--b-range", "2:4", "--threads", threads]);
    assert_eq!(hier("1"), hier("3"));
}

#[test]
fn rtn_seed_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let g = rtt5(dir.path());
    let args = ["mc", "--geometry", g.as_str(), "--samples", "500", "--seed", "1"];
    let with_env = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_rtn")).args(args).env("RTN_SEED", seed).output().unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let plain = ok_stdout(&["mc", "--geometry", &g, "--samples", "500", "--seed", "9"]);
    assert_eq!(String::from_utf8(with_env("9")).unwrap(), plain);
    assert_ne!(with_env("9"), with_env("10"));
}

#[test]
fn dynamics_writes_series_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let g = rtt5(dir.path());
    let series = dir.path().join("series.csv");
    let summary = dir.path().join("summary.json");
    ok_stdout(&[
        "dynamics", "--geometry", &g, "--hamiltonian", "ising-closed", "--observable", "X:1", "--t-max", "100",
        "--points", "50", "--seed", "3", "--out", series.to_str().unwrap(), "--summary", summary.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&series).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,expval");
    assert_eq!(text.lines().count(), 51);
    let s: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    for key in ["time_avg", "time_std", "fluct_exact", "inv_deff_state", "sqrt_inv_deff_bound"] {
        assert!(s[key].is_number(), "missing {key}");
    }
    assert!((s["sqrt_inv_deff_bound"].as_f64().unwrap() - (7808.0f64 / 59049.0).sqrt()).abs() < 1e-12);
}

#[test]
fn mincut_of_rtt_region() {
    let dir = tempfile::tempdir().unwrap();
    let g = rtt5(dir.path());
    let v: Value = serde_json::from_str(&ok_stdout(&["mincut", "--geometry", &g, "--region", "0,1"])).unwrap();
    assert!((v["cut_weight"].as_f64().unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);
    let n_cut = v["cut_edges"].as_array().unwrap().len() + v["cut_legs"].as_array().unwrap().len();
    assert_eq!(n_cut, 2);
}

#[test]
fn geometry_round_trips_through_fuse_and_info() {
    let dir = tempfile::tempdir().unwrap();
    let g = rtt5(dir.path());
    let fused = dir.path().join("fused.json");
    ok_stdout(&["geometry", "fuse", "--geometry", &g, "--j", "0", "--k", "1", "--out", fused.to_str().unwrap()]);
    let info: Value =
        serde_json::from_str(&ok_stdout(&["geometry", "info", "--geometry", fused.to_str().unwrap()])).unwrap();
    assert_eq!(info["n_vertices"], 4);
    assert_eq!(info["n_legs"], 5);
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(rtn(&["effdim", "--geometry", "/nonexistent/g.json"]).status.code(), Some(2));
    assert_eq!(rtn(&["hierarchy", "--b-range", "5:2"]).status.code(), Some(2));
    assert_eq!(rtn(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(rtn(&["effdim", "--bogus"]).status.code(), Some(2));
    assert_eq!(rtn(&["moments", "--dim", "3", "--ensemble", "cse", "--samples", "1000"]).status.code(), Some(2));
}

#[test]
fn resource_limits_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.json");
    ok_stdout(&["geometry", "single", "--n", "40", "--a", "2", "--out", path.to_str().unwrap()]);
    let out = rtn(&["mc", "--geometry", path.to_str().unwrap(), "--samples", "10"]);
    assert_eq!(out.status.code(), Some(3));
}
