use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use twinterf::experiments::{hom_network, Topology};
use twinterf::splitters::NetworkDescription;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twinterf"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn twinterf")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).expect("stderr is json")
}

#[test]
fn data_networks_match_builtin_topologies() {
    let load = |name: &str| {
        NetworkDescription::from_json(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
    };
    assert_eq!(load("hom.json"), hom_network());
    assert_eq!(load("fig5.json"), Topology::Fig5.network().unwrap());
    assert_eq!(load("fig6.json"), Topology::Fig6.network().unwrap());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (k, args) in [
        vec!["nport", "--n", "16", "--format", "json"],
        vec!["extended-hom", "--topology", "fig6", "--units", "paper"],
        vec!["hbt", "--config", data("hbt_slice.toml").to_str().unwrap()],
    ]
    .into_iter()
    .enumerate()
    {
        let paths: Vec<PathBuf> = (0..2)
            .map(|r| dir.path().join(format!("{k}-{r}.out")))
            .collect();
        for p in &paths {
            let mut full = args.clone();
            full.extend(["--out", p.to_str().unwrap()]);
            assert!(run(&full).status.success(), "{full:?}");
        }
        let a = std::fs::read(&paths[0]).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, std::fs::read(&paths[1]).unwrap(), "{args:?}");
    }
}

#[test]
fn json_round_trip_is_exact() {
    let out = run(&["nport", "--n", "6", "--format", "json", "--out", "-"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["metadata"]["schema_version"], 1);
    let d = twinterf::experiments::run_nport(6, 0).unwrap();
    let row: Vec<f64> = doc["row"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["probability"].as_f64().unwrap())
        .collect();
    assert_eq!(row, d.counts);
}

#[test]
fn odd_port_count_is_a_config_error() {
    let out = run(&["nport", "--n", "7"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err = stderr_json(&out);
    assert_eq!(err["error"]["exit_code"], 1);
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = run(&["hom", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["kind"], "usage");
}

#[test]
fn verify_exit_codes() {
    for args in [
        vec!["hom", "--verify"],
        vec!["extended-hom", "--verify"],
        vec!["extended-hom", "--topology", "fig5", "--verify"],
        vec!["extended-hom", "--topology", "fig6", "--verify"],
        vec!["nport", "--n", "8", "--verify"],
        vec!["nport", "--n", "32", "--verify"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
    }
    let out = run(&[
        "hbt",
        "--config",
        data("hbt_slice.toml").to_str().unwrap(),
        "--verify",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn network_files_run_and_verify() {
    for name in ["hom.json", "fig5.json", "fig6.json"] {
        let path = data(name);
        let out = run(&["network", "--file", path.to_str().unwrap(), "--verify"]);
        assert_eq!(out.status.code(), Some(0), "{name}");
    }
}

#[test]
fn paper_unit_bars() {
    let out = run(&["extended-hom", "--units", "paper", "--out", "-"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let bars: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(bars.len(), 4);
    for (b, want) in bars.iter().zip([1.0, 0.0, 2.0, 0.0]) {
        assert!((b - want).abs() < 1e-12, "{bars:?}");
    }
}

#[test]
fn flags_override_config_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "experiment = \"nport\"\nn = 4\n").unwrap();
    let out = run(&[
        "nport",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "6",
        "--out",
        "-",
    ]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 7);
    assert!(String::from_utf8_lossy(&out.stderr).contains("overrides config value"));
}

#[test]
fn wide_geometry_warns() {
    let out = run(&[
        "hbt",
        "--x0",
        "0.2",
        "--wavelength",
        "8e-7",
        "--L",
        "1.0",
        "--sigma",
        "1e-6",
        "--grid",
        "-5e-6:5e-6:4096",
        "--slice-x1",
        "0",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}
