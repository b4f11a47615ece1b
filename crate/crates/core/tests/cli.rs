//! End-to-end runs of the `purify` binary.

use std::collections::BTreeMap;
use std::process::Command;

fn purify(args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_purify"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8(output.stdout).unwrap(),
        String::from_utf8(output.stderr).unwrap(),
    )
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn output_layout_is_manifest_header_rows() {
    let (code, out, _) = purify(&["sweep", "--grid", "0:0.02:0.01"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    let first_data = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert!(first_data > 0);
    assert!(lines[first_data..].iter().all(|l| !l.starts_with('#')));
    assert_eq!(lines[first_data], "p_gate,f_min,f_infty");
    assert_eq!(lines.len() - first_data - 1, 3);
    for key in ["command", "grid", "version", "timestamp"] {
        assert!(out.contains(&format!("# {key}: ")), "{key}");
    }
}

#[test]
fn sweep_reproduces_operating_points() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let (code, _, _) = purify(&["sweep", "--grid", "0:0.1:0.01", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<&str>> = data_lines(&text)[1..]
        .iter()
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 11);
    let num = |s: &str| s.parse::<f64>().unwrap();

    assert!((num(rows[0][1]) - 0.5).abs() <= 0.005);
    assert!(num(rows[0][2]) >= 0.999);
    assert!((num(rows[5][0]) - 0.05).abs() < 1e-12);
    assert!((num(rows[5][1]) - 0.60).abs() <= 0.02);
    assert!((num(rows[5][2]) - 0.92).abs() <= 0.01);
    for row in &rows[10..] {
        assert_eq!((row[1], row[2]), ("NA", "NA"), "{row:?}");
    }
}

#[test]
fn noiseless_trajectories_above_one_half_purify_within_twenty_rounds() {
    let (code, out, _) = purify(&["trajectories", "--states", "50", "--rounds", "20", "--seed", "9"]);
    assert_eq!(code, 0);
    let mut by_state: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for line in &data_lines(&out)[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        by_state
            .entry(fields[0].parse().unwrap())
            .or_default()
            .push(fields[2].parse().unwrap());
    }
    assert_eq!(by_state.len(), 50);
    for fidelities in by_state.values() {
        assert!(fidelities.len() <= 21);
        if fidelities[0] > 0.51 {
            assert!(*fidelities.last().unwrap() > 0.99, "{fidelities:?}");
        }
    }
}

#[test]
fn trajectory_data_is_reproducible() {
    let args = ["trajectories", "--p-gate", "0.03", "--states", "10", "--seed", "77"];
    let (_, a, _) = purify(&args);
    let (_, b, _) = purify(&args);
    assert_eq!(data_lines(&a), data_lines(&b));
    let (_, c, _) = purify(&["trajectories", "--p-gate", "0.03", "--states", "10", "--seed", "78"]);
    assert_ne!(data_lines(&a), data_lines(&c));
}

#[test]
fn threshold_reports_and_rejects_bad_brackets() {
    let (code, out, _) = purify(&["threshold"]);
    assert_eq!(code, 0);
    let row = data_lines(&out)[1];
    let p_th: f64 = row.split(',').next().unwrap().parse().unwrap();
    assert!((0.085..=0.095).contains(&p_th));

    let (code, _, err) = purify(&["threshold", "--bracket", "0.1:0.2"]);
    assert_eq!(code, 4, "{err}");
    let (code, _, _) = purify(&["threshold", "--bracket", "0.2:0.1"]);
    assert_eq!(code, 2);
}

#[test]
fn exit_codes_for_usage_and_io() {
    assert_eq!(purify(&["sweep", "--grid", "0.1:0.05:0.01"]).0, 2);
    assert_eq!(purify(&["round", "--f0", "1.5"]).0, 2);
    assert_eq!(purify(&["--nope"]).0, 2);
    assert_eq!(
        purify(&["sweep", "--grid", "0:0.01:0.01", "--out", "/no/such/dir/out.csv"]).0,
        3
    );
}

#[test]
fn round_probe() {
    let (code, out, _) = purify(&["round", "--f0", "0.75", "--p-gate", "0"]);
    assert_eq!(code, 0);
    assert_eq!(data_lines(&out)[1], "0.7500000000,0.7884615385,0.7222222222");
}
