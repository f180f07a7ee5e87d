use std::fs;
use std::path::Path;

use serde_json::Value;
use soliton_lab::cli::{run, EXIT_CONFIG, EXIT_OK, ORBIT_NOTE};
use soliton_lab::lattice::{load_snapshot, save_snapshot};
use soliton_lab::{FieldState, Grid, ModelParams};

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("soliton-lab").chain(args.iter().copied()))
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn relax_writes_state_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(cli(&["relax", "--sector", "D_AC", "--out", out]), EXIT_OK);
    let s = json(&dir.path().join("summary_D_AC.json"));
    assert_eq!(s["QH"], 0.5);
    assert_eq!(s["QV"], 0.5);
    assert_eq!(s["converged"], true);
    assert_eq!(s["config_path"], Value::Null);
    assert_eq!(s["config_hash"].as_str().unwrap().len(), 64);
    let trace = fs::read_to_string(dir.path().join("trace_D_AC.csv")).unwrap();
    assert!(trace.starts_with("sweep,total_energy,accepted,amplitude\n"));
    let state = load_snapshot(&dir.path().join("relaxed_D_AC.csv")).unwrap();
    assert_eq!(state.grid, Grid::default());
}

#[test]
fn relax_is_deterministic_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# quick run\nmax_sweeps = 500\nrng_seed = 3\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        // 500 sweeps is not enough to converge
        assert_eq!(
            cli(&["relax", "--config", cfg_s, "--sector", "H_BC", "--out", out.to_str().unwrap()]),
            3
        );
    }
    let read = |d: &Path| fs::read(d.join("relaxed_H_BC.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    let s = json(&a.join("summary_H_BC.json"));
    assert_eq!(s["config_path"], cfg_s);
    assert_eq!(s["converged"], false);
}

#[test]
fn bad_inputs_exit_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(cli(&["relax", "--sector", "D_XY", "--out", out]), EXIT_CONFIG);
    assert_eq!(cli(&["relax", "--out", out]), EXIT_CONFIG);
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(cli(&["census", "--config", cfg.to_str().unwrap()]), EXIT_CONFIG);
    assert_eq!(cli(&["decay", "--sector", "H_BC", "--out", out]), EXIT_CONFIG);
}

#[test]
fn evolve_rejects_cfl_violation_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("vac.csv");
    let p = ModelParams::default();
    save_snapshot(&input, &FieldState::uniform(Grid::default(), 0.0, 0.0).unwrap(), &p).unwrap();
    let out = dir.path().join("out");
    let code = cli(&[
        "evolve",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--set",
        "dt=0.03",
    ]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(!out.exists());
}

#[test]
fn evolving_the_vacuum_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("vac.csv");
    let p = ModelParams::default();
    save_snapshot(&input, &FieldState::uniform(Grid::default(), 1.0, -2.0).unwrap(), &p).unwrap();
    let out = dir.path().join("out");
    let code = cli(&[
        "evolve",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--set",
        "t_end=3",
    ]);
    assert_eq!(code, EXIT_OK);
    let snaps = out.join("snapshots");
    let index = fs::read_to_string(snaps.join("index.csv")).unwrap();
    let names: Vec<String> = index.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().to_string()).collect();
    assert_eq!(names.len(), 4);
    let first = fs::read(snaps.join(&names[0])).unwrap();
    for n in &names {
        assert_eq!(fs::read(snaps.join(n)).unwrap(), first);
    }
}

#[test]
fn snapshot_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(cli(&["relax", "--sector", "H_DE", "--out", out, "--set", "max_sweeps=50"]), 3);
    let path = dir.path().join("relaxed_H_DE.csv");
    let state = load_snapshot(&path).unwrap();
    let again = dir.path().join("again.csv");
    save_snapshot(&again, &state, &ModelParams::default()).unwrap();
    assert_eq!(load_snapshot(&again).unwrap(), state);
}

#[test]
fn orbit_of_h_sector_drops_residual_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(cli(&["orbit", "--sector", "H_BC", "--out", out]), EXIT_OK);
    let csv = fs::read_to_string(dir.path().join("orbit_H_BC.csv")).unwrap();
    assert!(csv.starts_with("x,phi,psi\n"));
    assert_eq!(json(&dir.path().join("orbit_summary_H_BC.json"))["note"], ORBIT_NOTE);
}

#[test]
fn orbit_of_d_ac_obeys_the_law() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(cli(&["orbit", "--sector", "D_AC", "--out", out]), EXIT_OK);
    let s = json(&dir.path().join("orbit_summary_D_AC.json"));
    assert!(s["max_orbit_residual"].as_f64().unwrap() < 0.05);
}

#[test]
fn symmetric_orbit_has_no_residual() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["orbit", "--sector", "D_AB", "--out", out, "--set", "psi0=1", "--set", "seed=exact"];
    assert_eq!(cli(&args), EXIT_OK);
    let s = json(&dir.path().join("orbit_summary_D_AB.json"));
    assert!(s["max_orbit_residual"].as_f64().unwrap() < 1e-4);
}

#[test]
fn census_creates_missing_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested").join("census");
    assert_eq!(cli(&["census", "--out", out.to_str().unwrap()]), EXIT_OK);
    let csv = fs::read_to_string(out.join("census.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("sector,mass,QH,QV,stability,decay_mode"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let sectors: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(sectors, ["D_AB", "D_AC", "D_DA", "D_EA", "H_BC", "V_EC", "H_DE", "V_DB"]);
    assert_eq!(rows[5][5], "V_EC->D_EA+D_AC");
    assert_eq!(rows[7][5], "V_DB->D_DA+D_AB");
    for r in &rows {
        let expect = if r[0].starts_with('V') { "metastable" } else { "stable" };
        assert_eq!(r[4], expect, "{r:?}");
    }
}

#[test]
fn dual_symmetric_census_is_duality_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["census", "--out", out, "--set", "psi0=1", "--set", "t_end=5"];
    assert_eq!(cli(&args), EXIT_OK);
    let s = json(&dir.path().join("census_summary.json"));
    let mass = |name: &str| {
        s["rows"].as_array().unwrap().iter().find(|r| r["sector"] == name).unwrap()["mass"].as_f64().unwrap()
    };
    // phi <-> psi maps H_BC onto V_CE, whose mass equals V_EC's by parity
    assert!((mass("H_BC") - mass("V_EC")).abs() < 1e-3 * mass("H_BC"));
    assert!((mass("D_AB") - mass("D_AC")).abs() < 1e-6);
}

#[test]
fn decay_writes_report_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(cli(&["decay", "--parent", "V_DB", "--factor", "1.2", "--out", out]), EXIT_OK);
    let r = json(&dir.path().join("decay_report.json"));
    assert_eq!(r["decayed"], true);
    assert_eq!(r["products"][0]["sector"], "D_DA");
    assert_eq!(r["products"][1]["sector"], "D_AB");
    assert!(dir.path().join("snapshots").join("index.csv").exists());
    let scan = json(&dir.path().join("decay_scan.json"));
    assert_eq!(scan["first_decay_factor"], 1.2);
}
