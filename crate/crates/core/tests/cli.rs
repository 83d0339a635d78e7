//! End-to-end runs of the `catsim` binary.

use std::path::Path;
use std::process::{Command, Output};

fn catsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catsim"))
        .args(args)
        .env_remove("CATSIM_WORKERS")
        .output()
        .expect("spawn catsim")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn evolve_conserves_energy() {
    let (header, rows) = csv_rows(&stdout(&catsim(&["evolve", "--beta", "5", "--tau-max", "2", "--steps", "400"])));
    assert_eq!(header, "tau,mean_ns,two_mean_np,sum_energy");
    assert_eq!(rows.len(), 400);
    for r in &rows {
        assert!((r[3] - 50.0).abs() < 1e-6);
        assert!((r[1] + r[2] - r[3]).abs() < 1e-9);
    }
}

#[test]
fn evolve_edge_cases() {
    let (_, rows) = csv_rows(&stdout(&catsim(&["evolve", "--beta", "0", "--steps", "5"])));
    assert!(rows.iter().all(|r| r[1] == 0.0 && r[2] == 0.0 && r[3] == 0.0));
    let (_, rows) = csv_rows(&stdout(&catsim(&["evolve", "--beta", "3", "--steps", "1", "--tau-max", "0"])));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][1], 0.0);
    assert!((rows[0][2] - 18.0).abs() < 1e-9 && (rows[0][3] - 18.0).abs() < 1e-9);
}

#[test]
fn distribution_is_even_and_normalized() {
    let (header, rows) = csv_rows(&stdout(&catsim(&["distribution", "--beta", "5"])));
    assert_eq!(header, "n,probability");
    let total: f64 = rows.iter().map(|r| r[1]).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(rows.iter().filter(|r| r[0] as usize % 2 == 1).all(|r| r[1] == 0.0));
    let (_, rows) = csv_rows(&stdout(&catsim(&["distribution", "--beta", "5", "--tau", "0"])));
    assert_eq!(rows[0][1], 1.0);
}

#[test]
fn pcurve_starts_at_vacuum_weight() {
    let (header, rows) = csv_rows(&stdout(&catsim(&["pcurve", "--beta", "2", "--tau-max", "1", "--steps", "11"])));
    assert_eq!(header, "tau,p0");
    assert_eq!(rows.len(), 11);
    assert!((rows[0][1] - (-4f64).exp()).abs() < 1e-12);
}

#[test]
fn conditional_then_wigner() {
    let dir = tmp();
    let json = dir.path().join("c3.json");
    let out = catsim(&["conditional", "--beta", "3", "--out", path_str(&json)]);
    stdout(&out);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    for key in ["beta", "tau_opt", "p0", "state"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    let csv = stdout(&catsim(&["wigner", "--in", path_str(&json), "--range", "8", "--grid", "81"]));
    let (header, rows) = csv_rows(&csv);
    assert_eq!(header, "x,p,w");
    assert_eq!(rows.len(), 81 * 81);
    // the lobes lie on the x = −p diagonal, well away from x = p
    let on = |sx: f64| {
        rows.iter()
            .filter(|r| (r[0] - sx * r[1]).abs() < 1e-9 && r[0].hypot(r[1]) > 3.0)
            .map(|r| r[2])
            .fold(f64::NEG_INFINITY, f64::max)
    };
    assert!(on(-1.0) > 0.05);
    assert!(on(-1.0) > 20.0 * on(1.0).abs());
    assert!(rows.iter().any(|r| r[2] < 0.0));

    // a bare Fock vector is accepted too
    let bare = dir.path().join("bare.json");
    std::fs::write(&bare, serde_json::to_string(&doc["state"]).unwrap()).unwrap();
    let again = stdout(&catsim(&["wigner", "--in", path_str(&bare), "--range", "8", "--grid", "81"]));
    assert_eq!(again, csv);
}

#[test]
fn outputs_are_deterministic() {
    let args = ["pcurve", "--beta", "4", "--tau-max", "1.5", "--steps", "50"];
    assert_eq!(stdout(&catsim(&args)), stdout(&catsim(&args)));
    let seq = Command::new(env!("CARGO_BIN_EXE_catsim"))
        .args(args)
        .env("CATSIM_WORKERS", "1")
        .output()
        .unwrap();
    assert_eq!(stdout(&seq), stdout(&catsim(&args)));
    let sweep = ["sweep", "--betas", "2,3", "--no-timing"];
    assert_eq!(stdout(&catsim(&sweep)), stdout(&catsim(&sweep)));
}

#[test]
fn sweep_then_fit() {
    let (header, rows) = csv_rows(&stdout(&catsim(&["sweep", "--betas", "3,5"])));
    assert_eq!(header, "beta,tau_opt,p0,xi_star,alpha_star,fidelity,alpha_prep_formula,seconds");
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| 1.0 - r[5] <= 3e-3));

    // A fit needs at least twice as many points as parameters; feed it the
    // published law itself.
    let dir = tmp();
    let csv = dir.path().join("sweep.csv");
    let mut text = String::from("beta,tau_opt,p0,xi_star,alpha_star,fidelity,alpha_prep_formula,seconds\n");
    for b in [2.0f64, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0] {
        let tau = 1.70 / (1.0 + 1.16 * b).powf(0.84);
        let p0 = 2.56 / (1.0 + 1.95 * b).powf(1.02);
        let xi = -0.35 + 0.14 / (1.0 + 0.13 * b).powf(2.40);
        text += &format!("{b},{tau:e},{p0:e},{xi:e},1,1,1,0\n");
    }
    std::fs::write(&csv, text).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&stdout(&catsim(&["fit", "--input", path_str(&csv), "--law", "tau"]))).unwrap();
    assert_eq!(report["law"], "TAU_OPT");
    for (k, v) in [("b_t", 1.70), ("c_t", 1.16), ("d_t", 0.84)] {
        assert!((report["constants"][k].as_f64().unwrap() - v).abs() < 1e-6, "{k}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&stdout(&catsim(&["fit", "--input", path_str(&csv), "--law", "p0"]))).unwrap();
    assert!((report["constants"]["b_p"].as_f64().unwrap() - 2.56).abs() < 1e-6);
}

#[test]
fn feasibility_report() {
    let report: serde_json::Value = serde_json::from_str(&stdout(&catsim(&["feasibility"]))).unwrap();
    for key in ["gamma", "t_star", "t_opt", "feasible", "margin"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    let gamma = report["gamma"].as_f64().unwrap();
    assert!((1e6..=4e6).contains(&gamma));
    let custom: serde_json::Value = serde_json::from_str(&stdout(&catsim(&[
        "feasibility", "--chi2", "1e-11", "--ns", "2", "--np", "2", "--lambda-s", "1.55e-6", "--volume", "4e-15", "--q", "1e8",
        "--beta", "20",
    ])))
    .unwrap();
    assert!(custom["gamma"].as_f64().unwrap() < gamma);
}

#[test]
fn config_overrides_flags() {
    let dir = tmp();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "evolve", "beta": 2.0, "steps": 3, "tau_max": 0.5}"#).unwrap();
    let (_, rows) = csv_rows(&stdout(&catsim(&["evolve", "--beta", "7", "--config", path_str(&cfg)])));
    assert_eq!(rows.len(), 3);
    assert!((rows[0][3] - 8.0).abs() < 1e-9);
    assert_eq!(rows[2][0], 0.5);
    // beta may come from the config alone
    let (_, rows) = csv_rows(&stdout(&catsim(&["evolve", "--config", path_str(&cfg)])));
    assert_eq!(rows.len(), 3);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| catsim(args).status.code().unwrap();
    assert_eq!(code(&["evolve", "--beta", "-1"]), 2);
    assert_eq!(code(&["evolve"]), 2);
    assert_eq!(code(&["evolve", "--beta", "1", "--steps", "0"]), 2);
    assert_eq!(code(&["bogus"]), 2);
    assert_eq!(code(&["wigner", "--in", "/nonexistent/state.json"]), 2);
    assert_eq!(code(&["feasibility", "--q", "0"]), 2);

    let dir = tmp();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"command": "pcurve", "beta": 1.0}"#).unwrap();
    assert_eq!(code(&["evolve", "--config", path_str(&cfg)]), 2);
    std::fs::write(&cfg, r#"{"betta": 1.0}"#).unwrap();
    assert_eq!(code(&["evolve", "--config", path_str(&cfg)]), 2);

    // numerical failure: a grid far too small for the state's Wigner function
    let json = dir.path().join("c.json");
    stdout(&catsim(&["conditional", "--beta", "3", "--out", path_str(&json)]));
    assert_eq!(code(&["wigner", "--in", path_str(&json), "--range", "1", "--grid", "11"]), 3);
    // a state document is not a sweep CSV
    assert_eq!(code(&["fit", "--input", path_str(&json), "--law", "tau"]), 2);
    assert_eq!(code(&["evolve", "--beta", "1", "--help"]), 0);
}
