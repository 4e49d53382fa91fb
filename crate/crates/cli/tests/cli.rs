use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_caputo-pme"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn weights_csv() {
    let out = run(&["weights", "--alpha", "1", "--n", "4"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "k,lambda_k\n1,1\n2,0\n3,0\n4,0\n");

    let out = run(&["weights", "--alpha", "0.5", "--n", "1"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "k,lambda_k\n1,1\n");

    let dir = tempfile::tempdir().unwrap();
    let out = run(&["weights", "--alpha", "0.5", "--n", "200", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("weights.csv")).unwrap();
    for line in text.lines().skip(1) {
        let (k, l) = line.split_once(',').unwrap();
        let (k, l): (f64, f64) = (k.parse().unwrap(), l.parse().unwrap());
        assert!(l <= k.powf(-0.5));
    }
}

#[test]
fn bad_input_exits_3() {
    assert_eq!(run(&["weights", "--alpha", "1.5", "--n", "4"]).status.code(), Some(3));
    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(3));
    assert_eq!(run(&["solve"]).status.code(), Some(3));
    assert_eq!(run(&["solve", "--config", "/nonexistent.json"]).status.code(), Some(3));

    let out = run(&["refine", "--config", config("refine_coarse.json").to_str().unwrap(), "--knob", "tau", "--levels", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_weights_and_mutation() {
    let out = run(&["verify", "weights"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["passed"], true);

    let out = run(&["verify", "weights", "--perturb-weight", "10:1e-6"]);
    assert_eq!(out.status.code(), Some(1));
    let summary = stdout_json(&out);
    assert!(summary["first_failure"].as_str().unwrap().contains("identity"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("identity"));
}

#[test]
fn verify_all_is_seeded_and_stable() {
    let a = run(&["verify", "all", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0));
    let b = run(&["verify", "all"]);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["verify", "caputo", "--seed", "9"]);
    assert_eq!(c.status.code(), Some(0));
    assert_eq!(stdout_json(&c)["seed"], 9);
}

#[test]
fn solve_writes_stable_artifacts() {
    let cfg = config("smooth.json");
    let mut listings = Vec::new();
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let report = stdout_json(&out);
        assert!(report["verdicts"].as_array().unwrap().iter().all(|v| v["passed"] == true));

        let mut names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        let contents: Vec<Vec<u8>> = names.iter().map(|n| fs::read(dir.path().join(n)).unwrap()).collect();
        listings.push(names);
        bytes.push(contents);
    }
    assert_eq!(listings[0], listings[1]);
    assert_eq!(bytes[0], bytes[1]);
    // snapshot_every = 8 over 32 steps: steps 0, 8, 16, 24, 32 for u and p
    assert_eq!(listings[0].iter().filter(|n| n.to_string_lossy().ends_with(".fld")).count(), 10);

    let csv = String::from_utf8(bytes[0][listings[0].iter().position(|n| n == "ledger.csv").unwrap()].clone()).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "step,t,H,S,mean_u,mean_p,min_u,min_p,l3_accum,picard_iters");
    assert_eq!(csv.lines().count(), 34);
}

#[test]
fn solve_constants_matches_scalar_recursion() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--config", config("constants.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("ledger.csv")).unwrap();
    let (tau, alpha) = (0.5f64 / 16.0, 0.5f64);
    let gamma = std::f64::consts::PI.sqrt();
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let k = cols[0] as usize;
        let s: f64 = (1..=k).map(|i| ((k - i + 1) as f64).powf(alpha - 1.0)).sum();
        assert!((cols[5] - (1.0 + tau.powf(alpha) / gamma * s)).abs() < 1e-12, "{line}");
        assert!((cols[2] - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(cols[3], 0.0);
    }
}

#[test]
fn solve_rejects_non_positive_data_before_stepping() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.json");
    let mut cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(config("smooth.json")).unwrap()).unwrap();
    cfg["u_init"]["modes"][0]["amplitude"] = 1.5.into();
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&["solve", "--config", cfg_path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("u_in"));
    assert!(!out_dir.join("ledger.csv").exists());
}

#[test]
fn solve_non_convergence_exits_2_with_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("coarse.json");
    let mut cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(config("refine_coarse.json")).unwrap()).unwrap();
    cfg["picard_damping"] = 1.0.into();
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let out = run(&["solve", "--config", cfg_path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step 1"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn refine_tau_reports_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "refine",
        "--config",
        config("refine_coarse.json").to_str().unwrap(),
        "--knob",
        "tau",
        "--levels",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["u_diffs"].as_array().unwrap().len(), 3);
    assert_eq!(report["contract_holds"], true);
    assert!(dir.path().join("refine_tau.json").exists());
}
