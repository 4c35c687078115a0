use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use roldarp_core::{Instance, Scalar};

fn roldarp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roldarp"))
        .args(args)
        .current_dir(dir)
        .env_remove("ROLDARP_SEARCH_CAP")
        .output()
        .expect("binary runs")
}

fn status(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn scalar(v: &Value) -> Scalar {
    serde_json::from_value(v.clone()).unwrap()
}

fn stderr_code(o: &Output) -> String {
    let line: Value = serde_json::from_slice(&o.stderr).expect("stderr is one JSON line");
    line["error"].as_str().unwrap().to_string()
}

fn workdir() -> (TempDir, PathBuf) {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().to_path_buf();
    (d, p)
}

/// Bipartite, three segments; the sorted-dominance comparison fails on it.
const ODD_SEGMENTS: &str = r#"{"vertices":["d1","o","s1"],"origin":"o",
    "edges":[{"u":"d1","v":"s1","w":"3"},{"u":"o","v":"s1","w":"4"}],
    "T":"12","f":3,"k":"1/2","bipartition":{"V1":["s1"],"V2":["d1","o"]},
    "requests":[{"s":"s1","d":"d1","t":"8","p":"4"},{"s":"s1","d":"d1","t":"7","p":"4"},
                {"s":"s1","d":"d1","t":"12","p":"2"},{"s":"s1","d":"o","t":"4","p":"7"}]}"#;

#[test]
fn two_row_generator_writes_nine_requests() {
    let (_g, dir) = workdir();
    let args = ["gen", "fig1", "--f", "6", "--h", "3", "--B", "1", "--eps", "1/8"];
    let o = roldarp(&dir, &[&args[..], &["-o", "fig.json", "--witness", "w.json"]].concat());
    assert_eq!(status(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&dir, "fig.json")["requests"].as_array().unwrap().len(), 9);

    // Same bytes on stdout, and again on a second run.
    let a = roldarp(&dir, &args);
    let b = roldarp(&dir, &args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, std::fs::read(dir.join("fig.json")).unwrap());

    let v = roldarp(&dir, &["validate", "-i", "fig.json", "-s", "w.json"]);
    assert_eq!(status(&v), 0);
    assert_eq!(serde_json::from_slice::<Value>(&v.stdout).unwrap()["schedule"]["feasible"], true);
}

#[test]
fn generator_rejects_odd_segment_counts() {
    let (_g, dir) = workdir();
    let o = roldarp(&dir, &["gen", "fig1", "--f", "5", "--h", "3", "--B", "1", "--eps", "1/8"]);
    assert_eq!(status(&o), 2);
    assert_eq!(stderr_code(&o), "BAD_PARAMS");
}

#[test]
fn capacity_bound_needs_uniform_bipartite_input() {
    let (_g, dir) = workdir();
    let gen = roldarp(&dir, &["gen", "random", "--vertices", "4", "--requests", "5", "--seed", "3", "-o", "r.json"]);
    assert_eq!(status(&gen), 0);
    let o = roldarp(&dir, &["check", "--bound", "thm7", "-i", "r.json"]);
    assert_eq!(status(&o), 2);
    assert_eq!(stderr_code(&o), "HYPOTHESIS_VIOLATED");
    assert!(o.stdout.is_empty());
}

#[test]
fn optimum_dominates_the_online_run() {
    let (_g, dir) = workdir();
    for seed in 0..5 {
        let name = format!("r{seed}.json");
        let seed = seed.to_string();
        roldarp(&dir, &["gen", "random", "--vertices", "5", "--requests", "6", "--seed", &seed, "--f", "6", "-o", &name]);
        assert_eq!(status(&roldarp(&dir, &["run", "sbp", "-i", &name, "-o", "sbp.json"])), 0);
        assert_eq!(status(&roldarp(&dir, &["opt", "-i", &name, "-o", "opt.json"])), 0);
        let (sbp, opt) = (read(&dir, "sbp.json"), read(&dir, "opt.json"));
        assert!(scalar(&opt["revenue"]) >= scalar(&sbp["revenue"]), "seed {seed}");
        assert!(sbp["schedule"].is_array() && opt["schedule"].is_array());
    }
}

#[test]
fn random_generation_is_reproducible() {
    let (_g, dir) = workdir();
    let args = ["gen", "random", "--vertices", "4", "--requests", "6", "--seed", "9", "--bipartite", "--k", "1/2", "--uniform"];
    let a = roldarp(&dir, &args);
    assert_eq!(status(&a), 0);
    assert_eq!(a.stdout, roldarp(&dir, &args).stdout);
    let inst = Instance::from_json(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert!(inst.bipartition.is_some());
    assert_eq!(inst.uniform_revenue(), Some(Scalar::one()));

    let o = roldarp(&dir, &["gen", "random", "--vertices", "4", "--requests", "6", "--seed", "9", "--k", "1/2"]);
    assert_eq!(status(&o), 2);
    assert_eq!(stderr_code(&o), "USAGE");
}

#[test]
fn violated_bound_exits_one_and_dumps_a_replay() {
    let (_g, dir) = workdir();
    std::fs::write(dir.join("odd.json"), ODD_SEGMENTS).unwrap();
    let o = roldarp(&dir, &["check", "--bound", "lem8", "-i", "odd.json", "--dump", "cx", "--csv", "odd.csv"]);
    assert_eq!(status(&o), 1);
    let rec: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((rec["instance"].as_str(), rec["bound"].as_str(), rec["holds"].as_bool()), (Some("odd"), Some("LEM8"), Some(false)));
    let cx = read(&dir, "cx/odd-LEM8.json");
    assert_eq!(cx["report"]["holds"], false);
    assert!(cx["instance"]["requests"].is_array());
    let csv = std::fs::read_to_string(dir.join("odd.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("bound,instance,lhs,rhs,slack,holds"));
    assert_eq!(csv.lines().nth(1), Some("LEM8,odd,7,0,-7,false"));
}

#[test]
fn report_collects_checks_and_instances() {
    let (_g, dir) = workdir();
    std::fs::create_dir(dir.join("out")).unwrap();
    for seed in ["1", "2"] {
        let out = format!("out/i{seed}.json");
        roldarp(&dir, &["gen", "random", "--vertices", "4", "--requests", "4", "--seed", seed, "--uniform", "-o", &out]);
    }
    let batch = roldarp(&dir, &["check", "--bound", "all", "-i", "out/i1.json", "-i", "out/i2.json", "-o", "checks.json"]);
    assert_eq!(status(&batch), 0);
    let checks = read(&dir, "checks.json");
    // THM4, THM6, LEM3, LEM8, LEM9 apply to uniform general instances.
    assert_eq!(checks.as_array().unwrap().len(), 10);

    let from_instances = roldarp(&dir, &["report", "--glob", "out/*.json", "--csv", "a.csv"]);
    assert_eq!(status(&from_instances), 0);
    let from_checks = roldarp(&dir, &["report", "--glob", "checks.json", "--csv", "b.csv"]);
    assert_eq!(status(&from_checks), 0);
    let a = std::fs::read_to_string(dir.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(dir.join("b.csv")).unwrap());
    assert_eq!(a.lines().count(), 11);
    assert!(a.lines().skip(1).all(|l| l.ends_with(",true")));

    let none = roldarp(&dir, &["report", "--glob", "nothing/*.json"]);
    assert_eq!((status(&none), stderr_code(&none)), (2, "NO_INPUT".to_string()));
}

#[test]
fn search_cap_comes_from_the_environment() {
    let (_g, dir) = workdir();
    roldarp(&dir, &["gen", "random", "--vertices", "4", "--requests", "5", "--seed", "1", "-o", "r.json"]);
    let o = Command::new(env!("CARGO_BIN_EXE_roldarp"))
        .args(["opt", "-i", "r.json"])
        .current_dir(&dir)
        .env("ROLDARP_SEARCH_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(status(&o), 2);
    assert_eq!(stderr_code(&o), "TOO_LARGE");
}

#[test]
fn infeasible_schedule_exits_one() {
    let (_g, dir) = workdir();
    roldarp(&dir, &["gen", "fig1", "--f", "4", "--h", "2", "--B", "1", "--eps", "1/16", "-o", "fig.json"]);
    // Serving at time zero precedes every release.
    std::fs::write(dir.join("bad.json"), r#"[{"type":"serve","request":0,"start":"0"}]"#).unwrap();
    let o = roldarp(&dir, &["validate", "-i", "fig.json", "-s", "bad.json"]);
    assert_eq!(status(&o), 1);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schedule"]["feasible"], false);
}

#[test]
fn reduction_keeps_the_optimum() {
    let (_g, dir) = workdir();
    roldarp(&dir, &["gen", "random", "--vertices", "3", "--requests", "4", "--seed", "11", "-o", "g.json"]);
    assert_eq!(status(&roldarp(&dir, &["reduce", "-i", "g.json", "-o", "b.json"])), 0);
    assert!(read(&dir, "b.json")["bipartition"].is_object());
    roldarp(&dir, &["opt", "-i", "g.json", "-o", "og.json"]);
    roldarp(&dir, &["opt", "-i", "b.json", "-o", "ob.json"]);
    assert_eq!(scalar(&read(&dir, "og.json")["revenue"]), scalar(&read(&dir, "ob.json")["revenue"]));
}

#[test]
fn duel_against_the_last_window_adversary() {
    let (_g, dir) = workdir();
    let o = roldarp(&dir, &["duel", "--adversary", "last-window", "--policy", "sbp", "--k", "100"]);
    assert_eq!(status(&o), 0);
    let t: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(scalar(&t["opt_revenue"]) >= Scalar::from_int(100) * scalar(&t["policy_revenue"]));
    let bad = roldarp(&dir, &["duel", "--adversary", "first-horizon", "--T", "40"]);
    assert_eq!(status(&bad), 2);
}
