//! End-to-end runs of the `arg-ibd` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_arg-ibd"));
    cmd.env_remove("ARG_IBD_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn probabilities(csv: &str) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn exact_two_loci_at_unit_scale() {
    let out = stdout(&run(&["exact", "--loci", "0,1", "--rho", "1"]));
    assert!(out.starts_with("partition,probability\n"));
    let p = probabilities(&out);
    assert_eq!(p.len(), 2);
    assert!(p.iter().all(|&x| (x - 0.5).abs() < 1e-15), "{p:?}");
}

#[test]
fn exact_json_lists_every_state() {
    let out = stdout(&run(&["exact", "--loci", "0,1,3", "--rho", "2", "--format", "json"]));
    let v: Value = serde_json::from_str(&out).unwrap();
    let states = v["states"].as_array().unwrap();
    assert_eq!(states.len(), 5);
    let total: f64 = states.iter().map(|s| s["probability"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn malformed_loci_fail_with_usage_error() {
    let o = run(&["exact", "--loci", "1,0", "--rho", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = run(&["exact", "--loci", "0,1", "--rho", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn approx_error_shrinks_with_rho() {
    let worst = |rho: &str| -> f64 {
        let out = stdout(&run(&["approx", "--loci", "0,1,3", "--rho", rho]));
        assert!(out.starts_with("partition,order,exact,approx,rel_error\n"));
        probabilities(&out).into_iter().fold(0.0, f64::max)
    };
    let (a, b) = (worst("10"), worst("1000"));
    assert!(b < a && b < 1e-2, "{a} {b}");
}

fn sim_interval(dir: &Path, threads: &str) -> Vec<u8> {
    let out = dir.join(format!("t{threads}.csv"));
    let o = run(&[
        "sim-interval", "--R", "150", "--t-burn", "4", "--replicates", "16", "--samples-per-chain", "2",
        "--spacing", "0.5", "--windows", "0:1,0.25:0.75", "--seed", "99", "--threads", threads,
        "--out", out.to_str().unwrap(),
    ]);
    stdout(&o);
    std::fs::read(out).unwrap()
}

#[test]
fn sim_interval_bytes_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let one = sim_interval(dir.path(), "1");
    assert_eq!(one, sim_interval(dir.path(), "3"));
    let csv = String::from_utf8(one).unwrap();
    assert!(csv.starts_with("replicate,R,rho,t_burn,leftmost_raw,leftmost_rescaled,segments_total,theta_a,theta_b,theta_mass"));
    // one row per window per replicate
    assert_eq!(csv.lines().count(), 1 + 16 * 2);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("t1.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 99);
    assert_eq!(manifest["command"], "sim-interval");
    assert!(dir.path().join("t1.summary.json").exists());
}

#[test]
fn seed_comes_from_environment_when_not_given() {
    let dir = tempfile::tempdir().unwrap();
    let go = |name: &str, env: Option<&str>| {
        let out = dir.path().join(name);
        let mut cmd = bin();
        if let Some(s) = env {
            cmd.env("ARG_IBD_SEED", s);
        }
        let o = cmd
            .args(["theta", "--replicates", "50", "--format", "json", "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        stdout(&o);
        std::fs::read(out).unwrap()
    };
    assert_eq!(go("a.json", Some("5")), go("b.json", Some("5")));
    assert_ne!(go("c.json", Some("5")), go("d.json", Some("6")));
}

#[test]
fn theta_moment_table() {
    let out = stdout(&run(&["theta", "--replicates", "2000", "--seed", "3"]));
    let mut lines = out.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("analytic") && header.contains("monte_carlo"), "{header}");
    assert!(lines.count() >= 5);
}

#[test]
fn moran_reaches_fixation_and_writes_mosaic() {
    let dir = tempfile::tempdir().unwrap();
    let mosaic = dir.path().join("mosaic.csv");
    let o = run(&[
        "moran", "--N", "5", "--R", "3", "--rho-n", "0.1", "--seed", "4", "--mosaic-csv", mosaic.to_str().unwrap(),
    ]);
    let out = stdout(&o);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["outcome"]["fixed"], true);
    let rows = std::fs::read_to_string(mosaic).unwrap();
    assert!(rows.starts_with("individual,seg_start,seg_end,color"));
}

#[test]
fn validate_quick_reports_json() {
    let o = run(&["validate", "--level", "quick", "--seed", "1"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 6);
}
