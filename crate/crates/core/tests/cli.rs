//! End-to-end checks of the `epr` binary.

use std::process::Command;

use serde_json::Value;

fn epr(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_epr"))
        .args(args)
        .output()
        .expect("spawn epr");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, stdout, stderr) = epr(args);
    assert_eq!(code, 0, "{args:?}: {stderr}");
    serde_json::from_str(&stdout).unwrap()
}

fn matrix(v: &Value) -> Vec<Vec<f64>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|row| row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
        .collect()
}

#[test]
fn probs_at_zero_and_sixty() {
    let p = matrix(&json(&["probs", "--theta", "0"])["result"]["P"]);
    assert_eq!(p, vec![vec![0.0, 0.5], vec![0.5, 0.0]]);

    let doc = json(&["probs", "--theta", "60"]);
    let p = matrix(&doc["result"]["P"]);
    for (got, want) in p.concat().iter().zip([0.125, 0.375, 0.375, 0.125]) {
        assert!((got - want).abs() < 1e-12);
    }
    for m in ["marginal_1", "marginal_2"] {
        for x in doc["result"][m].as_array().unwrap() {
            assert!((x.as_f64().unwrap() - 0.5).abs() < 1e-12);
        }
    }
}

#[test]
fn probs_csv_has_header_and_two_rows() {
    let (code, stdout, _) = epr(&["--format", "csv", "probs", "--theta", "90"]);
    assert_eq!(code, 0);
    let lines: Vec<_> = stdout.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].chars().any(|c| c.is_alphabetic()));
    for row in &lines[1..] {
        let vals: Vec<f64> = row.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert_eq!(vals.len(), 2);
        assert!(vals.iter().all(|v| (v - 0.25).abs() < 1e-12));
    }
}

#[test]
fn kmatrix_squared_moduli_match_probs() {
    for theta in ["0", "37.5", "90", "-45"] {
        let k = &json(&["kmatrix", "--theta", theta])["result"]["K"];
        let p = matrix(&json(&["probs", "--theta", theta])["result"]["P"]);
        for i in 0..2 {
            for j in 0..2 {
                let z = &k[i][j];
                let (re, im) = (z["re"].as_f64().unwrap(), z["im"].as_f64().unwrap());
                assert!((re * re + im * im - p[i][j]).abs() < 1e-10, "theta {theta}");
            }
        }
    }
    let k = &json(&["kmatrix", "--theta", "0"])["result"]["K"];
    let r = std::f64::consts::FRAC_1_SQRT_2;
    assert!((k[0][1]["re"].as_f64().unwrap() - r).abs() < 1e-10);
    assert!((k[1][0]["re"].as_f64().unwrap() + r).abs() < 1e-10);
}

#[test]
fn chsh_optimal_and_degenerate() {
    let r = &json(&["chsh", "--optimal"])["result"];
    let s = r["quantum_s"].as_f64().unwrap();
    assert!((s.abs() - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    assert_eq!(r["violated"], Value::Bool(true));

    let r = &json(&["chsh", "--a", "0", "--ap", "0", "--b", "0", "--bp", "0"])["result"];
    assert!((r["quantum_s"].as_f64().unwrap().abs() - 2.0).abs() < 1e-9);
    assert_eq!(r["violated"], Value::Bool(false));
}

#[test]
fn chsh_without_angles_is_a_usage_error() {
    let (code, stdout, stderr) = epr(&["chsh"]);
    assert_eq!(code, 2);
    assert!(stdout.is_empty());
    assert!(!stderr.is_empty());
}

#[test]
fn branches_shrink_and_exact_small_cases() {
    let r = &json(&["branches", "--n", "1000", "--theta", "90", "--epsilon", "0.1", "--pair", "0,0"])["result"];
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let w: Vec<f64> = rows.iter().map(|x| x["deviant_weight"].as_f64().unwrap()).collect();
    assert!(w[0] > w[1] && w[1] > w[2]);
    assert!(w[2] < 0.01);

    let r = &json(&["branches", "--n", "4", "--theta", "0", "--epsilon", "0.25", "--pair", "0,1"])["result"];
    let last = r["rows"].as_array().unwrap().last().unwrap();
    assert_eq!(last["n"].as_u64(), Some(4));
    assert!((last["deviant_weight"].as_f64().unwrap() - 0.125).abs() < 1e-12);

    let r = &json(&["branches", "--n", "1", "--theta", "90", "--epsilon", "0.1", "--pair", "0,0"])["result"];
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0]["deviant_weight"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn nosignal_passes_and_is_deterministic() {
    let a = epr(&["nosignal", "--trials", "100", "--seed", "1", "--dim", "2"]);
    assert_eq!(a.0, 0, "{}", a.2);
    let doc: Value = serde_json::from_str(&a.1).unwrap();
    assert_eq!(doc["result"]["pass"], Value::Bool(true));
    assert!(doc["result"]["max_deviation"].as_f64().unwrap() <= 1e-10);
    let b = epr(&["nosignal", "--trials", "100", "--seed", "1", "--dim", "2"]);
    assert_eq!(a.1, b.1);

    assert_eq!(epr(&["nosignal", "--trials", "1", "--seed", "5", "--dim", "4"]).0, 0);
    assert_eq!(epr(&["nosignal", "--trials", "1", "--seed", "5", "--dim", "9"]).0, 2);
    assert_eq!(epr(&["nosignal", "--trials", "1", "--seed", "5", "--dim", "1"]).0, 2);
}

#[test]
fn sample_frequencies_and_determinism() {
    let args = ["--format", "csv", "sample", "--n", "10000", "--trials", "100", "--seed", "7", "--theta", "90"];
    let (code, stdout, stderr) = epr(&args);
    assert_eq!(code, 0, "{stderr}");
    let rows: Vec<Vec<u64>> = stdout
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 100);
    for k in 0..4 {
        let mean = rows.iter().map(|r| r[k] as f64 / 10_000.0).sum::<f64>() / 100.0;
        assert!((mean - 0.25).abs() < 0.02, "cell {k}: {mean}");
    }
    assert_eq!(epr(&args).1, stdout);

    let (code, stdout, _) = epr(&["--format", "csv", "sample", "--n", "10", "--trials", "1", "--seed", "3", "--theta", "0"]);
    assert_eq!(code, 0);
    let row: Vec<u64> = stdout.lines().nth(1).unwrap().split(',').skip(1).map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 0);
    assert_eq!(row[3], 0);
    assert_eq!(row.iter().sum::<u64>(), 10);
}

#[test]
fn bad_arguments_exit_nonzero() {
    assert_ne!(epr(&["probs", "--theta", "abc"]).0, 0);
    assert_ne!(epr(&["probs"]).0, 0);
    assert_ne!(epr(&["branches", "--n", "10", "--theta", "0", "--epsilon", "0.1", "--pair", "0"]).0, 0);
    assert_ne!(epr(&["frobnicate"]).0, 0);
    assert_eq!(epr(&["--help"]).0, 0);
}
