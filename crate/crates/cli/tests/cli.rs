use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lindblad_relax_cli::config::{RunConfig, Scenario};
use serde_json::{json, Value};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_lindblad-relax");

fn write_config(dir: &Path, value: &Value) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn m(rows: &[&[(f64, f64)]]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| Value::Array(r.iter().map(|&(a, b)| json!([a, b])).collect()))
            .collect(),
    )
}

fn sigma_plus() -> Value {
    m(&[&[(0.0, 0.0), (1.0, 0.0)], &[(0.0, 0.0), (0.0, 0.0)]])
}

fn sigma_minus() -> Value {
    m(&[&[(0.0, 0.0), (0.0, 0.0)], &[(1.0, 0.0), (0.0, 0.0)]])
}

fn pauli(k: char) -> Value {
    match k {
        'x' => m(&[&[(0.0, 0.0), (1.0, 0.0)], &[(1.0, 0.0), (0.0, 0.0)]]),
        'y' => m(&[&[(0.0, 0.0), (0.0, -1.0)], &[(0.0, 1.0), (0.0, 0.0)]]),
        _ => m(&[&[(1.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (-1.0, 0.0)]]),
    }
}

fn short_otto(cycles: usize) -> Value {
    json!({
        "scenario": "otto",
        "grid": { "t_start": 0.0, "t_end": 4.0 * cycles as f64, "samples": 25 * cycles + 1 },
        "ensemble": { "count": 3, "seed": 7 },
        "integrator_tol": 1e-11
    })
}

#[test]
fn commutant_of_ladder_pair_is_trivial() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        &json!({ "scenario": "commutant", "operators": [sigma_plus(), sigma_minus()] }),
    );
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["commutant_dim"], 1);
    assert_eq!(r["self_adjoint"], true);
    assert!(r["witness"].is_null());
}

#[test]
fn commutant_of_sigma_z_has_a_witness() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        &json!({ "scenario": "commutant", "operators": [pauli('z')] }),
    );
    let out = dir.path().join("out");
    assert!(run(&cfg, &out, &[]).status.success());
    let r = report(&out);
    assert_eq!(r["commutant_dim"], 2);
    let w = &r["witness"];
    // traceless and diagonal
    let d0 = w[0][0][0].as_f64().unwrap();
    let d1 = w[1][1][0].as_f64().unwrap();
    assert!((d0 + d1).abs() < 1e-12 && d0.abs() > 0.1);
    assert!(w[0][1][0].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn default_otto_is_certified_and_emits_plot_data() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &short_otto(8));
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["verdict"], "certified-weakly-relaxing");
    assert!(r["gronwall_integral_per_period"].as_f64().unwrap() < 0.0);
    assert_eq!(r["ensemble"]["envelope_holds"], true);

    let (h, rows) = read_csv(&out.join("schedule.csv"));
    assert_eq!(h, ["t", "h", "lambda_h", "lambda_c"]);
    let mid = rows.iter().find(|r| (r[0] - 1.52).abs() < 1e-9).unwrap();
    assert_eq!(mid[2], 1.0);
    assert_eq!(mid[3], 0.0);
    assert_eq!(mid[1], 3.0);

    let (h, rows) = read_csv(&out.join("convergence.csv"));
    assert_eq!(h, ["t", "max_pair_dist", "gronwall_envelope"]);
    for w in rows.windows(2) {
        assert!(w[1][1] <= w[0][1] + 1e-9, "distance grew at t = {}", w[1][0]);
    }

    let (h, rows) = read_csv(&out.join("trajectories.csv"));
    assert_eq!(h.len(), 4 + 15);
    assert_eq!(&h[..5], ["t", "state_index", "trace_err", "min_eig", "c1"]);
    assert_eq!(rows.len(), 3 * 201);
    assert!(rows.iter().all(|r| r[2].abs() <= 1e-9));
}

#[test]
fn unital_single_state_relaxes_to_maximally_mixed() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "scenario": "evolve",
        "generator": {
            "dim": 2,
            "hamiltonian": [{ "matrix": pauli('x'), "schedule": { "kind": "sine", "offset": 0.3, "amplitude": 0.2, "omega": 1.0 } }],
            "jumps": [
                { "operator": pauli('x'), "rate": 0.5 },
                { "operator": pauli('y'), "rate": 0.5 },
                { "operator": pauli('z'), "rate": 0.5 }
            ]
        },
        "grid": { "t_start": 0.0, "t_end": 12.0, "samples": 121 },
        "ensemble": { "count": 1, "seed": 3 }
    });
    let cfg = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out.join("trajectories.csv"));
    let last = rows.last().unwrap();
    // Bloch coordinates of 1/2 vanish
    assert!(last[4..].iter().all(|c| c.abs() < 1e-6), "{last:?}");
    let r = report(&out);
    assert_eq!(r["verdict"], "inconclusive");
}

#[test]
fn static_unital_generator_with_period_is_certified_strongly() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "scenario": "certify",
        "generator": {
            "dim": 2,
            "jumps": [
                { "operator": sigma_plus(), "rate": 0.4 },
                { "operator": sigma_minus(), "rate": 0.4 }
            ],
            "period": 1.0
        },
        "grid": { "t_start": 0.0, "t_end": 1.0, "samples": 11 }
    });
    let cfg = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    assert!(run(&cfg, &out, &[]).status.success());
    assert_eq!(report(&out)["verdict"], "certified-strongly-relaxing-unital");
    assert!(!out.join("trajectories.csv").exists());
}

#[test]
fn negative_early_rates_are_accepted_before_the_markovian_time() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "scenario": "evolve",
        "generator": {
            "dim": 2,
            "jumps": [
                { "operator": sigma_plus(), "rate": 1.0 },
                { "operator": sigma_minus(), "rate": { "kind": "steps", "times": [1.0], "values": [-0.3, 0.5] } }
            ],
            "markovian_from": 1.0,
            "period": 1.0
        },
        "grid": { "t_start": 0.0, "t_end": 30.0, "samples": 301 },
        "ensemble": { "count": 4, "seed": 1 }
    });
    let cfg = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["verdict"], "certified-weakly-relaxing");
    assert!(r["ensemble"]["final_max_pair_dist"].as_f64().unwrap() < 1e-6);
}

#[test]
fn outputs_are_byte_identical_for_a_fixed_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &short_otto(2));
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert!(run(&cfg, &a, &[]).status.success());
    let o = Command::new(BIN)
        .env("LINDBLAD_RELAX_THREADS", "1")
        .args(["--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    for f in ["report.json", "trajectories.csv", "convergence.csv", "schedule.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(run(&cfg, &c, &["--seed", "8"]).status.success());
    assert_ne!(
        fs::read(a.join("trajectories.csv")).unwrap(),
        fs::read(c.join("trajectories.csv")).unwrap()
    );
}

#[test]
fn flags_override_the_configuration() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &short_otto(2));
    let out = dir.path().join("out");
    assert!(run(&cfg, &out, &["--scenario", "certify", "--samples", "21"])
        .status
        .success());
    let r = report(&out);
    assert_eq!(r["scenario"], "certify");
    assert!(r.get("ensemble").is_none());
    assert!(!out.join("trajectories.csv").exists());

    assert!(
        run(&cfg, &out, &["--scenario", "evolve", "--samples", "21", "--seed", "99"])
            .status
            .success()
    );
    let r = report(&out);
    assert_eq!(r["ensemble"]["samples"], 21);
    assert_eq!(r["ensemble"]["seed"], 99);
}

fn expect_violation(value: Value, code: &str) {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &value);
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(code), "{err}");
}

#[test]
fn validation_errors_exit_with_status_two() {
    expect_violation(
        json!({ "scenario": "otto", "otto": { "t2": 2.95 }, "grid": { "t_start": 0.0, "t_end": 4.0, "samples": 11 } }),
        "otto.window_overlap",
    );
    expect_violation(
        json!({ "scenario": "otto", "grid": { "t_start": 5.0, "t_end": 1.0, "samples": 11 } }),
        "grid.monotone",
    );
    expect_violation(
        json!({ "scenario": "otto", "otto": { "t_c": -1.0 } }),
        "otto.temperature_positive",
    );
    expect_violation(json!({ "scenario": "commutant" }), "commutant.operators");
    expect_violation(
        json!({ "scenario": "evolve", "grid": { "t_start": 0.0, "t_end": 1.0, "samples": 3 } }),
        "generator.missing",
    );
    expect_violation(
        json!({
            "scenario": "evolve",
            "generator": { "dim": 2, "hamiltonian": [{ "matrix": sigma_plus() }] },
            "grid": { "t_start": 0.0, "t_end": 1.0, "samples": 3 }
        }),
        "generator.hermitian",
    );
    expect_violation(
        json!({ "scenario": "otto", "tolerances": { "psd": 0.0 } }),
        "tolerances.positive",
    );
}

#[test]
fn unreadable_or_malformed_configs_exit_with_status_two() {
    let dir = TempDir::new().unwrap();
    let o = run(&dir.path().join("missing.json"), &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"scenario\": \"otto\", \"unknown_field\": 1 }").unwrap();
    assert_eq!(run(&bad, &dir.path().join("out"), &[]).status.code(), Some(2));
    let o = Command::new(BIN)
        .env("LINDBLAD_RELAX_THREADS", "zero")
        .args(["--config", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn overflowing_dynamics_exit_with_status_three() {
    let dir = TempDir::new().unwrap();
    let huge = 1e300;
    let cfg = json!({
        "scenario": "evolve",
        "generator": {
            "dim": 2,
            "jumps": [{ "operator": m(&[&[(huge, 0.0), (huge, 0.0)], &[(0.0, 0.0), (0.0, 0.0)]]), "rate": 1.0 }]
        },
        "grid": { "t_start": 0.0, "t_end": 1.0, "samples": 3 },
        "ensemble": { "count": 2, "seed": 0 }
    });
    let cfg = write_config(dir.path(), &cfg);
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn library_validation_lists_every_violation() {
    let cfg = RunConfig::from_json(
        r#"{ "scenario": "otto", "otto": { "t_h": -1, "kappa_c": 0 }, "grid": { "t_start": 1, "t_end": 0, "samples": 1 }, "ensemble": { "count": 0 } }"#,
    )
    .unwrap();
    assert_eq!(cfg.scenario, Scenario::Otto);
    let codes: Vec<String> = cfg.validate().into_iter().map(|v| v.code).collect();
    for code in [
        "otto.temperature_positive",
        "otto.kappa_positive",
        "grid.monotone",
        "grid.samples",
        "ensemble.count",
    ] {
        assert!(codes.iter().any(|c| c == code), "{code} missing from {codes:?}");
    }
    assert!(RunConfig::from_json(r#"{ "scenario": "otto" }"#)
        .unwrap()
        .validate()
        .is_empty());
}
