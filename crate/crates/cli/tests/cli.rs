use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scars(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scars"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = scars(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn error_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("error line");
    serde_json::from_str::<serde_json::Value>(line).expect("machine-readable error")["error"].clone()
}

fn hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn assert_hashes_match(dir: &Path) {
    let m = manifest(dir);
    let outputs = m["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for entry in outputs {
        let bytes = fs::read(dir.join(entry["path"].as_str().unwrap())).unwrap();
        assert_eq!(entry["sha256"].as_str().unwrap(), hex(&bytes));
        assert_eq!(entry["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
}

fn dir_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn spectrum_n12_has_720_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("spec");
    run_ok(&["spectrum", "--out", out.to_str().unwrap(), "--set", "spectrum.entropy=\"central\""]);
    let csv = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "n,E_n,sx_expectation,entropy");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 720);
    assert!(rows.windows(2).all(|w| w[0][1] <= w[1][1]));
    // central 10%: 72 entropies, the rest nan
    assert_eq!(rows.iter().filter(|r| r[3].is_finite()).count(), 72);
    let sector: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("sector.json")).unwrap()).unwrap();
    assert_eq!(sector["N"], 12);
    assert_eq!(sector["dimension"], 720);
    assert_eq!(sector["generators"].as_array().unwrap().len(), 2);
    assert_hashes_match(&out);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.toml");
    fs::write(
        &config,
        "seed = 3\n[model]\npreset = \"xxz\"\nJxx = -0.4\nJzz = -1.8\nN = 8\n[grid]\nn_theta = 21\nn_phi = 40\n\
         [scar_stats]\nn_random = 60\n",
    )
    .unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for (dir, threads) in [(&a, "1"), (&b, "2")] {
        run_ok(&[
            "scar-stats",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--threads",
            threads,
        ]);
    }
    assert_eq!(dir_snapshot(&a), dir_snapshot(&b));
    assert_hashes_match(&a);
    let stats: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("scar_stats.json")).unwrap()).unwrap();
    for key in ["chi", "n_scarred", "n_eigen", "n_random", "seed", "score_histograms"] {
        assert!(stats.get(key).is_some(), "{key}");
    }
    assert_eq!(stats["n_eigen"], 76);
    assert_eq!(stats["n_random"], 60);
    assert_eq!(stats["seed"], 3);
    let scores = fs::read_to_string(a.join("scar_scores.csv")).unwrap();
    assert_eq!(scores.lines().count(), 1 + 76 + 60);
}

#[test]
fn seed_flag_beats_config() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("c.toml");
    fs::write(&config, "seed = 5\n[model]\nN = 8\nJzz = -1.8\n[scar_stats]\nn_random = 20\n[grid]\nn_theta = 11\nn_phi = 20\n").unwrap();
    let out = tmp.path().join("o");
    run_ok(&[
        "scar-stats",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    let m = manifest(&out);
    assert_eq!(m["seed"], 7);
    assert_eq!(m["config"]["seed"], 7);
    assert_eq!(m["inputs"]["sha256"].as_str().unwrap(), hex(&fs::read(&config).unwrap()));
    let other = tmp.path().join("p");
    run_ok(&["scar-stats", "--config", config.to_str().unwrap(), "--out", other.to_str().unwrap()]);
    assert_eq!(manifest(&other)["seed"], 5);
    assert_ne!(
        fs::read(out.join("scar_stats.json")).unwrap(),
        fs::read(other.join("scar_stats.json")).unwrap()
    );
}

#[test]
fn zero_random_states_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scars(&[
        "scar-stats",
        "--out",
        tmp.path().to_str().unwrap(),
        "--set",
        "scar_stats.n_random=0",
    ]);
    assert!(!out.status.success());
    let err = error_json(&out);
    assert_eq!(err["kind"], "invalid_config");
    assert!(err["message"].as_str().unwrap().contains("n_random"));
    assert!(!tmp.path().join("manifest.json").exists());
}

#[test]
fn oversized_chains_name_the_limit() {
    let tmp = tempfile::tempdir().unwrap();
    let out = scars(&["spectrum", "--out", tmp.path().to_str().unwrap(), "--set", "model.N=24"]);
    assert_eq!(out.status.code(), Some(3));
    let err = error_json(&out);
    assert_eq!(err["kind"], "resource_limit");
    assert!(err["message"].as_str().unwrap().contains("N <= 20"));

    let out = scars(&["spectrum", "--out", tmp.path().to_str().unwrap(), "--set", "model.N=20"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(error_json(&out)["message"].as_str().unwrap().contains("N <= 16"));
}

#[test]
fn invalid_configs_fail_fast() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    for set in ["model.Jab=1.0", "spectrum.cut=99", "model.preset=\"xx\"", "model.N=10", "nope=1"] {
        let out = scars(&["spectrum", "--out", dir, "--set", set]);
        assert_eq!(out.status.code(), Some(2), "{set}");
        assert_eq!(error_json(&out)["kind"], "invalid_config", "{set}");
    }
    let missing = scars(&["spectrum", "--out", dir, "--config", "/nonexistent/c.toml"]);
    assert_eq!(error_json(&missing)["kind"], "io");
    let wrong = tmp.path().join("w.toml");
    fs::write(&wrong, "experiment = \"scar_stats\"\n").unwrap();
    let out = scars(&["spectrum", "--out", dir, "--config", wrong.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lyapunov_scan_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ly");
    run_ok(&[
        "lyapunov",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "model.N=8",
        "--set",
        "lyapunov.points=3",
        "--set",
        "lyapunov.steps_per_period=400",
    ]);
    let csv = fs::read_to_string(out.join("lyapunov_scan.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "J_over_mu,lambda,omega,ratio,method");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    let methods: Vec<&str> = rows.iter().map(|r| r[4]).collect();
    assert_eq!(&methods[..3], &["monodromy_is", "analytical_is", "monodromy_ti"]);
    let ratios: Vec<f64> = rows.iter().step_by(3).map(|r| r[0].parse().unwrap()).collect();
    assert!((ratios[0] - 0.01).abs() < 1e-14 && (ratios[1] - 0.1).abs() < 1e-14 && (ratios[2] - 1.0).abs() < 1e-14);
    for r in &rows {
        let lambda: f64 = r[1].parse().unwrap();
        let omega: f64 = r[2].parse().unwrap();
        let ratio: f64 = r[3].parse().unwrap();
        assert!(lambda >= 0.0 && omega > 0.0);
        assert!((ratio - lambda / omega).abs() <= 1e-12 * ratio.max(1.0));
    }
    // IS omega is |mu|
    let omega: f64 = rows[0][2].parse().unwrap();
    assert!((omega - 5.92f64.sqrt()).abs() < 1e-11);
}

#[test]
fn project_and_time_average_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let pr = tmp.path().join("pr");
    let small = ["--set", "model.N=8", "--set", "grid.n_theta=21", "--set", "grid.n_phi=40"];
    let mut args = vec!["project", "--out", pr.to_str().unwrap()];
    args.extend(small);
    args.extend(["--set", "project.count=2"]);
    run_ok(&args);
    for name in [
        "project_is_n00037.csv",
        "project_ti_n00038.csv",
        "trace_is.csv",
        "trace_ti.csv",
        "upo_family_is.csv",
        "projected_states.csv",
    ] {
        assert!(pr.join(name).exists(), "{name}");
    }
    let map = fs::read_to_string(pr.join("project_is_n00037.csv")).unwrap();
    assert_eq!(map.lines().next().unwrap(), "theta,phi,Q");
    assert_eq!(map.lines().count(), 1 + 21 * 40);
    let trace = fs::read_to_string(pr.join("trace_is.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "k,theta,phi");
    assert_eq!(trace.lines().count(), 401);
    assert_eq!(fs::read_to_string(pr.join("upo_family_is.csv")).unwrap().lines().count(), 1 + 60 * 400);
    assert_hashes_match(&pr);

    let ta = tmp.path().join("ta");
    let mut args = vec!["time-average", "--out", ta.to_str().unwrap()];
    args.extend(small);
    run_ok(&args);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ta.join("time_average.json")).unwrap()).unwrap();
    assert_eq!(summary["method"], "diagonal");
    let q_max = summary["maps"][0]["q_max"].as_f64().unwrap();
    assert!(q_max > 0.0 && q_max <= 1.0);
    assert!(ta.join("time_average_is.csv").exists() && ta.join("initial_trace_is.csv").exists());

    let kr = tmp.path().join("kr");
    let mut args = vec!["time-average", "--out", kr.to_str().unwrap()];
    args.extend(small);
    args.extend(["--set", "time_average.method=\"krylov\"", "--set", "time_average.horizon=20.0"]);
    run_ok(&args);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(kr.join("time_average.json")).unwrap()).unwrap();
    assert_eq!(summary["method"], "krylov");
    assert_eq!(summary["horizon"], 20.0);
}

#[test]
fn classical_fidelity_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cf");
    run_ok(&[
        "classical-fidelity",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "model.N=8",
        "--set",
        "classical_fidelity.samples=4",
        "--set",
        "classical_fidelity.horizon_periods=2.0",
        "--set",
        "classical_fidelity.transient_periods=0.0",
        "--set",
        "classical_fidelity.steps_per_period=200",
        "--set",
        "classical_fidelity.convergence_threshold=-1.0",
        "--set",
        "classical_fidelity.n_theta=9",
        "--set",
        "classical_fidelity.n_phi=12",
    ]);
    let map = fs::read_to_string(out.join("classical_fidelity.csv")).unwrap();
    assert_eq!(map.lines().count(), 1 + 9 * 12);
    let s: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("classical_fidelity.json")).unwrap()).unwrap();
    assert!(s["q_max"].as_f64().unwrap() >= s["q_min"].as_f64().unwrap());
    assert_hashes_match(&out);
}
