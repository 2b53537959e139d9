//! End-to-end runs of the `ocm` binary.

use std::process::{Command, Output};

use ocm::graph_gen::BipartiteMultigraph;

fn ocm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ocm"))
        .args(args)
        .env_remove("OCM_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const SMALL: [&str; 6] = ["--n", "3000", "--trials", "3", "--algs", "greedy,ks,max"];

fn simulate(extra: &[&str]) -> Output {
    let mut args = vec!["simulate", "--dist", "trunc:4"];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(extra);
    if !extra.contains(&"--workers") {
        args.extend(["--workers", "3"]);
    }
    ocm(&args)
}

#[test]
fn predict_main() {
    let out = ocm(&["predict", "--dist", "main"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"cr\": 0.8206259"), "{text}");
}

#[test]
fn predict_truncated() {
    let out = ocm(&["predict", "--dist", "trunc:4"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["ks_lower"].as_f64(), Some(0.75));
    assert_eq!(v["fixed_point"], serde_json::json!([1, 1]));
}

#[test]
fn predict_degree_two_benchmarks() {
    let v = json(&ocm(&["predict", "--dist", "unif:2"]));
    assert_eq!(format!("{:.5}", v["greedy_benchmark"].as_f64().unwrap()), "0.76159");
    assert!(v["max_benchmark"].as_f64().unwrap().to_string().starts_with("0.83809"));
}

#[test]
fn bad_pmf_is_a_usage_error() {
    let out = ocm(&["simulate", "--dist", "explicit:2=0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("probabilities must sum to 1"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
}

#[test]
fn unknown_flags_and_bad_values() {
    for args in [
        &["predict", "--dist", "main", "--nope"][..],
        &["simulate", "--dist", "main", "--n", "-3"],
        &["simulate", "--dist", "main", "--workers", "0"],
        &["curve", "--u", "0.5,2"],
        &["frobnicate"],
    ] {
        let out = ocm(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(String::from_utf8(out.stderr).unwrap().trim_end().lines().count(), 1);
    }
}

#[test]
fn help_lists_every_flag() {
    let cases: [(&str, &[&str]); 4] = [
        ("predict", &["--dist", "--out", "--force"]),
        (
            "simulate",
            &[
                "--dist", "--n", "--ads", "--trials", "--seed", "--algs", "--out", "--force", "--workers",
                "--cap", "--dump-graph", "--timing",
            ],
        ),
        ("curve", &["--u", "--n", "--trials", "--seed", "--workers", "--out", "--force"]),
        ("verify", &["--seed", "--workers"]),
    ];
    for (cmd, flags) in cases {
        let out = ocm(&[cmd, "--help"]);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        for f in flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
}

#[test]
fn simulate_is_reproducible_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let out_a = simulate(&["--out", a.to_str().unwrap()]);
    let out_b = simulate(&["--out", b.to_str().unwrap(), "--workers", "1"]);
    assert!(out_a.status.success() && out_b.status.success());
    assert_eq!(out_a.stdout, out_b.stdout);
    let csv = std::fs::read_to_string(&a).unwrap();
    assert_eq!(csv, std::fs::read_to_string(&b).unwrap());
    assert!(csv.starts_with(
        "trial,n_users,n_ads,edges,greedy,ranking,karp_sipser,ks_upper,max_matching,ms_greedy,ms_ranking,ms_ks,ms_max\n"
    ));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn outputs_are_not_overwritten_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/report.json");
    let p = path.to_str().unwrap();
    assert!(simulate(&["--out", p]).status.success());
    let first = std::fs::read(&path).unwrap();
    let again = simulate(&["--out", p, "--seed", "5"]);
    assert_eq!(again.status.code(), Some(2));
    assert_eq!(std::fs::read(&path).unwrap(), first);
    assert!(simulate(&["--out", p, "--seed", "5", "--force"]).status.success());
    assert_ne!(std::fs::read(&path).unwrap(), first);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["config"]["master_seed"], 5);
}

#[test]
fn seed_flag_beats_environment() {
    let run = |env: Option<&str>, seed: Option<&str>| {
        let mut args = vec!["simulate", "--dist", "main", "--n", "500", "--trials", "2", "--algs", "greedy"];
        if let Some(s) = seed {
            args.extend(["--seed", s]);
        }
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ocm"));
        cmd.args(&args).env_remove("OCM_SEED");
        if let Some(e) = env {
            cmd.env("OCM_SEED", e);
        }
        json(&cmd.output().unwrap())["config"]["master_seed"].as_u64().unwrap()
    };
    assert_eq!(run(None, None), 42);
    assert_eq!(run(Some("7"), None), 7);
    assert_eq!(run(Some("7"), Some("8")), 8);
}

#[test]
fn report_carries_predictions() {
    let v = json(&simulate(&[]));
    let metrics = v["metrics"].as_array().unwrap();
    let ks = metrics.iter().find(|m| m["metric"] == "karp_sipser").unwrap();
    assert!((ks["prediction"]["point"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert!(ks["delta"].is_number());
}

#[test]
fn explicit_law_simulates_without_predictions() {
    let out = ocm(&["simulate", "--dist", "explicit:1=0.5,3=0.5", "--n", "500", "--trials", "1"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no analytic model"));
    assert!(json(&out)["metrics"][0]["prediction"].is_null());
}

#[test]
fn timing_is_opt_in() {
    let out = simulate(&["--timing"]);
    let v = json(&out);
    assert!(v["records"][0]["ms_max"].is_number());
    let v = json(&simulate(&[]));
    assert!(v["records"][0]["ms_max"].is_null());
}

#[test]
fn graph_dump_matches_first_trial() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("g.txt");
    let out = simulate(&["--dump-graph", dump.to_str().unwrap()]);
    assert!(out.status.success());
    let g = BipartiteMultigraph::read_dump(std::io::BufReader::new(std::fs::File::open(&dump).unwrap())).unwrap();
    let v = json(&out);
    assert_eq!(g.n_edges() as u64, v["records"][0]["edges"].as_u64().unwrap());
    assert_eq!(g.n_users(), 3000);
}

#[test]
fn curve_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let out = ocm(&[
        "curve", "--u", "0.5,1.0", "--n", "4000", "--trials", "2", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["min_at_one"], true);
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("u,n_users,n_ads,analytic,empirical,delta"));
    assert!(lines.next().unwrap().starts_with("0.5,2000,4000,0.92423431452000"));
}

#[test]
fn cap_flag_limits_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("g.txt");
    let out = ocm(&[
        "simulate", "--dist", "main", "--n", "2000", "--trials", "1", "--algs", "greedy", "--cap", "3",
        "--dump-graph", dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let g = BipartiteMultigraph::read_dump(std::io::BufReader::new(std::fs::File::open(&dump).unwrap())).unwrap();
    assert!((0..g.n_users()).all(|u| g.user_degree(u) <= 3));
}
