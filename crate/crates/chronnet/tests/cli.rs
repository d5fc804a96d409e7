//! End-to-end checks of the command-line pipeline through real files and
//! processes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn chronnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chronnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = chronnet(args);
    assert!(
        out.status.success(),
        "`chronnet {}` failed:\n{}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn generate_list_names_scenarios() {
    let out = ok(&["generate", "--list"]);
    for name in ["uniform", "powerlaw", "four-period", "lorenz"] {
        assert!(out.contains(name), "missing {name} in:\n{out}");
    }
}

#[test]
fn full_pipeline_through_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.csv");
    let net = dir.path().join("net.csv");
    let pruned = dir.path().join("pruned.csv");
    let pernode = dir.path().join("pernode.csv");
    let comms = dir.path().join("communities.csv");
    let labels = dir.path().join("labels.csv");

    ok(&[
        "generate",
        "--scenario",
        "four-period",
        "--seed",
        "2",
        "--param",
        "t=3000",
        "--out",
        &path_str(&events),
    ]);
    assert!(events.exists());

    ok(&[
        "build",
        "--events",
        &path_str(&events),
        "--bbox",
        "0,10,0,10",
        "--nx",
        "10",
        "--ny",
        "10",
        "--h",
        "1",
        "--dmax",
        "inf",
        "--out",
        &path_str(&net),
    ]);
    assert!(net.exists());
    assert!(dir.path().join("net.meta.json").exists());

    ok(&[
        "prune",
        "--input",
        &path_str(&net),
        "--tau",
        "0",
        "--out",
        &path_str(&pruned),
    ]);

    let report = ok(&[
        "measure",
        "--input",
        &path_str(&pruned),
        "--metrics",
        "degree,strength,paths,transitivity,density",
        "--pernode-out",
        &path_str(&pernode),
    ]);
    assert!(report.contains("\"transitivity\""), "{report}");
    assert!(pernode.exists());

    let fit = ok(&[
        "fit",
        "--input",
        &path_str(&pernode),
        "--column",
        "strength",
        "--family",
        "powerlaw",
    ]);
    assert!(fit.contains("\"family\": \"power-law\""), "{fit}");

    let summary = ok(&[
        "communities",
        "--input",
        &path_str(&pruned),
        "--method",
        "fastgreedy",
        "--out",
        &path_str(&comms),
    ]);
    assert!(summary.contains("\"communities\""), "{summary}");

    ok(&[
        "cluster",
        "--events",
        &path_str(&events),
        "--net",
        &path_str(&pruned),
        "--partition",
        &path_str(&comms),
        "--delta",
        "3",
        "--out",
        &path_str(&labels),
    ]);
    let header = fs::read_to_string(&labels).unwrap();
    assert!(header.starts_with("t,x,y,community\n"), "{header}");

    let changes = ok(&["changes", "--labels", &path_str(&labels)]);
    assert!(changes.contains("change_points"), "{changes}");

    let outliers = ok(&[
        "outliers",
        "--input",
        &path_str(&pruned),
        "--metric",
        "degree",
        "--top",
        "0.05",
    ]);
    assert!(outliers.contains("\"nodes\""), "{outliers}");
}

#[test]
fn build_is_thread_count_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.csv");
    ok(&[
        "generate",
        "--scenario",
        "uniform",
        "--seed",
        "5",
        "--param",
        "t=2000",
        "--out",
        &path_str(&events),
    ]);

    let single = dir.path().join("net1.csv");
    let multi = dir.path().join("net8.csv");
    ok(&[
        "build",
        "--events",
        &path_str(&events),
        "--out",
        &path_str(&single),
    ]);
    ok(&[
        "--threads",
        "8",
        "build",
        "--events",
        &path_str(&events),
        "--out",
        &path_str(&multi),
    ]);
    assert_eq!(fs::read(&single).unwrap(), fs::read(&multi).unwrap());
}

#[test]
fn bernoulli_flag_produces_parallel_events() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.csv");
    ok(&[
        "generate",
        "--scenario",
        "uniform",
        "--seed",
        "9",
        "--param",
        "t=300",
        "--bernoulli",
        "2.5",
        "--out",
        &path_str(&events),
    ]);
    let body = fs::read_to_string(&events).unwrap();
    let stamps: Vec<&str> = body
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    let distinct: std::collections::BTreeSet<&str> = stamps.iter().copied().collect();
    assert!(
        distinct.len() < stamps.len(),
        "expected repeated timestamps"
    );

    let bad = chronnet(&[
        "generate",
        "--scenario",
        "lorenz",
        "--bernoulli",
        "2.0",
        "--out",
        &path_str(&events),
    ]);
    assert!(!bad.status.success());
}

#[test]
fn all_cells_flag_materializes_the_whole_grid() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.csv");
    fs::write(&events, "t,x,y\n1,0.5,0.5\n2,3.5,0.5\n").unwrap();
    let net = dir.path().join("net.csv");
    ok(&[
        "build",
        "--events",
        &path_str(&events),
        "--bbox",
        "0,4,0,4",
        "--nx",
        "4",
        "--ny",
        "4",
        "--all-cells",
        "--cells-out",
        &path_str(&dir.path().join("cells.csv")),
        "--out",
        &path_str(&net),
    ]);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("net.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["nodes"].as_array().unwrap().len(), 16);
    // The cell table covers all 16 nodes plus a header.
    let cells = fs::read_to_string(dir.path().join("cells.csv")).unwrap();
    assert_eq!(cells.lines().count(), 17);
}

#[test]
fn snapshots_cover_the_period() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.csv");
    ok(&[
        "generate",
        "--scenario",
        "uniform",
        "--seed",
        "3",
        "--param",
        "t=1000",
        "--out",
        &path_str(&events),
    ]);
    let out_dir = dir.path().join("snaps");
    ok(&[
        "snapshots",
        "--events",
        &path_str(&events),
        "--dt",
        "250",
        "--out-dir",
        &path_str(&out_dir),
    ]);
    let index: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("windows.json")).unwrap()).unwrap();
    assert_eq!(index.as_array().unwrap().len(), 4);
    assert!(out_dir.join("net_003.csv").exists());
}

#[test]
fn run_executes_config_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.json");
    fs::write(
        &config_path,
        serde_json::json!({
            "scenario": { "name": "powerlaw", "seed": 4, "params": { "t": 2000.0 } },
            "tau_sweep": [1, 2, 5, 9],
            "tau": 1,
            "measures": ["density"],
            "fit": { "column": "degree", "family": "powerlaw" }
        })
        .to_string(),
    )
    .unwrap();

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    ok(&[
        "run",
        "--config",
        &path_str(&config_path),
        "--out-dir",
        &path_str(&out_a),
    ]);
    ok(&[
        "run",
        "--config",
        &path_str(&config_path),
        "--out-dir",
        &path_str(&out_b),
    ]);

    for tau in [1, 2, 5, 9] {
        assert!(out_a
            .join(format!("degree_distribution_tau{tau}.csv"))
            .exists());
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_a.join("report.json")).unwrap()).unwrap();
    assert!(
        report["tau_sweep"]["9"]["retained_fraction"].is_number(),
        "{report}"
    );

    assert_eq!(
        fs::read(out_a.join("report.json")).unwrap(),
        fs::read(out_b.join("report.json")).unwrap(),
        "identical configs must give byte-identical reports"
    );
}

#[test]
fn run_with_missing_input_fails_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.json");
    fs::write(
        &config_path,
        serde_json::json!({ "input": { "path": "/no/such/events.csv" } }).to_string(),
    )
    .unwrap();
    let out = chronnet(&[
        "run",
        "--config",
        &path_str(&config_path),
        "--out-dir",
        &path_str(&dir.path().join("out")),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/no/such/events.csv"), "{stderr}");
    // Partial artifacts directory holds a manifest naming the failed stage.
    let manifest = fs::read_to_string(dir.path().join("out/MANIFEST.json")).unwrap();
    assert!(manifest.contains("failed"), "{manifest}");
}

#[test]
fn mcd14ml_ingestion_applies_the_confidence_flag() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("fires.csv");
    fs::write(
        &raw,
        "latitude,longitude,acq_date,acq_time,confidence,type\n\
         -3.5,-60.1,2018-01-02,0130,80,0\n\
         -3.6,-60.2,2018-01-02,0131,60,0\n\
         10.0,20.0,2018-01-03,1455,90,2\n",
    )
    .unwrap();
    let net = dir.path().join("net.csv");
    ok(&[
        "build",
        "--events",
        &path_str(&raw),
        "--format",
        "mcd14ml-csv",
        "--min-confidence",
        "75",
        "--granularity",
        "day",
        "--nx",
        "4",
        "--ny",
        "4",
        "--out",
        &path_str(&net),
    ]);
    // Two events survive the filter -> one consecutive pair -> one link.
    let body = fs::read_to_string(&net).unwrap();
    assert_eq!(body.lines().count(), 2, "{body}");
}

#[test]
fn repro_emits_pass_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&[
        "repro",
        "--figure",
        "fig5",
        "--out-dir",
        &path_str(&dir.path().join("fig5")),
    ]);
    assert!(out.contains("PASS fig5"), "{out}");
    assert!(dir.path().join("fig5/repro_report.json").exists());
    assert!(dir.path().join("fig5/summary.csv").exists());

    let bad = chronnet(&[
        "repro",
        "--figure",
        "fig9",
        "--out-dir",
        &path_str(dir.path()),
    ]);
    assert!(!bad.status.success());
}
