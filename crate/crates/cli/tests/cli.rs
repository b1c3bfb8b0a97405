//! End-to-end runs of the `sqg` binary on temporary JSON fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sqg_core::games::{embed_classical, NonlocalGame};
use sqg_core::qobjects::werner_state;
use sqg_core::{DimVector, Tolerances};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_sqg")
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn parse_report(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn ppt_flags_werner_state() {
    let dir = tempfile::tempdir().unwrap();
    let rho = werner_state(0.8).unwrap();
    let state = write_json(dir.path(), "werner.json", &rho);
    let report = parse_report(&run(&["ppt", "--state", state.to_str().unwrap()]));
    assert_eq!(report["result"]["flag"], true);
    let eig = report["result"]["min_pt_eigenvalue"].as_f64().unwrap();
    assert!((eig - (-0.35)).abs() < 1e-9);
    assert_eq!(report["provenance"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn value_of_chsh_on_singlet_beats_classical() {
    let dir = tempfile::tempdir().unwrap();
    let game = embed_classical(&NonlocalGame::chsh()).unwrap();
    let game_path = write_json(dir.path(), "chsh.json", &game);
    let rho = werner_state(1.0).unwrap();
    let state_path = write_json(dir.path(), "singlet.json", &rho);
    let report = parse_report(&run(&[
        "value",
        "--game",
        game_path.to_str().unwrap(),
        "--state",
        state_path.to_str().unwrap(),
        "--seed",
        "7",
        "--restarts",
        "6",
    ]));
    let v = report["result"]["value"].as_f64().unwrap();
    assert!(v >= 0.85335, "value {v}");

    let sep = parse_report(&run(&[
        "sep-value",
        "--game",
        game_path.to_str().unwrap(),
        "--seed",
        "7",
        "--restarts",
        "6",
    ]));
    let sv = sep["result"]["value"].as_f64().unwrap();
    assert!((sv - 0.75).abs() < 1e-6, "separable value {sv}");
}

#[test]
fn mu_bar_csv_has_expected_shape_and_normalization() {
    let dir = tempfile::tempdir().unwrap();
    let rho = werner_state(0.0).unwrap();
    let state = write_json(dir.path(), "mixed.json", &rho);
    let out = run(&[
        "mu-bar",
        "--state",
        state.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.trim().lines().collect();
    assert_eq!(lines.len(), 17);
    assert!(lines[0].starts_with("s,t,mu(x=0;y=0)"));
    for row in &lines[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 18);
        let total: f64 = cells[2..].iter().map(|c| c.parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9, "row sums to {total}");
    }
}

#[test]
fn witness_reports_positive_gap_for_werner() {
    let dir = tempfile::tempdir().unwrap();
    let rho = werner_state(0.8).unwrap();
    let state = write_json(dir.path(), "werner.json", &rho);
    let report = parse_report(&run(&[
        "witness",
        "--state",
        state.to_str().unwrap(),
        "--seed",
        "3",
        "--restarts",
        "4",
    ]));
    let gap = report["result"]["report"]["gap"].as_f64().unwrap();
    assert!(gap > 0.01, "gap {gap}");
    let sep = report["result"]["report"]["separable_value"].as_f64().unwrap();
    assert!(sep.abs() < 1e-6);
}

#[test]
fn reconstruct_demo_recovers_state() {
    let dir = tempfile::tempdir().unwrap();
    let rho = werner_state(0.9).unwrap();
    let state = write_json(dir.path(), "werner.json", &rho);
    let report = parse_report(&run(&["reconstruct-demo", "--state", state.to_str().unwrap()]));
    let residual = report["result"]["teleport_residual"].as_f64().unwrap();
    assert!(residual < 1e-10, "residual {residual}");
}

#[test]
fn monotonicity_with_replacement_map_reports_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let t = Tolerances::default();
    let dims = DimVector(vec![2, 2]);
    let target = werner_state(0.0).unwrap();
    let m = sqg_core::losr::discard_and_prepare_map(
        &[(1.0, single_qubit(&target), single_qubit(&target))],
        &dims,
        &t,
    )
    .unwrap();
    let losr = write_json(dir.path(), "replace.json", &m);
    let state = write_json(dir.path(), "singlet.json", &werner_state(1.0).unwrap());
    let report = parse_report(&run(&[
        "monotonicity",
        "--state",
        state.to_str().unwrap(),
        "--losr",
        losr.to_str().unwrap(),
        "--seed",
        "11",
        "--restarts",
        "3",
    ]));
    assert_eq!(report["result"]["violations"], 0);
}

fn single_qubit(rho: &sqg_core::qobjects::DensityMatrix) -> sqg_core::qobjects::DensityMatrix {
    let t = Tolerances::default();
    let reduced = sqg_core::matcore::partial_trace(&rho.mat, &rho.dims, &[0]).unwrap();
    sqg_core::qobjects::DensityMatrix::new(reduced, DimVector(vec![2]), &t).unwrap()
}

#[test]
fn output_is_deterministic_modulo_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let rho = werner_state(0.8).unwrap();
    let state = write_json(dir.path(), "werner.json", &rho);
    let args = ["ppt", "--state", state.to_str().unwrap()];
    let mut a = parse_report(&run(&args));
    let mut b = parse_report(&run(&args));
    a["provenance"]["timestamp"] = 0.into();
    b["provenance"]["timestamp"] = 0.into();
    assert_eq!(a, b);
}

#[test]
fn malformed_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{not json").unwrap();
    let out = run(&["ppt", "--state", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let missing = run(&["ppt"]);
    assert_eq!(missing.status.code(), Some(1));

    let seedless = run(&["value", "--state", path.to_str().unwrap()]);
    assert_eq!(seedless.status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let rho = werner_state(0.8).unwrap();
    let state = write_json(dir.path(), "werner.json", &rho);
    let dest = dir.path().join("report.json");
    let out = run(&[
        "ppt",
        "--state",
        state.to_str().unwrap(),
        "--out",
        dest.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!(report["result"]["flag"], true);
}

#[test]
fn tol_override_is_echoed_in_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let rho = werner_state(0.8).unwrap();
    let state = write_json(dir.path(), "werner.json", &rho);
    let out = Command::new(bin())
        .args(["ppt", "--state", state.to_str().unwrap()])
        .env("SQG_TOL_OVERRIDE", "1e-8")
        .output()
        .unwrap();
    let report = parse_report(&out);
    let echoed = report["provenance"]["tol_override"].as_f64().unwrap();
    assert!((echoed - 1e-8).abs() < 1e-20);
}
