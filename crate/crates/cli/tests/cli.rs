use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lwr_cli::{analyze, curves, AnalyzeArgs, CapacityReport, CriterionArg, CurvesArgs, RunReport};
use lwr_core::capacity::CapacityStudy;
use proptest::prelude::*;
use tempfile::TempDir;

const E2: f64 = std::f64::consts::E * std::f64::consts::E;

fn lwr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lwr")).args(args).output().unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SYMMETRIC: &str = r#"{
  "interval": {"lower": "-inf", "upper": "+inf"},
  "scenarios": [
    {"id": 0, "name": "low", "cost": {"kind": "quadratic", "curvature": 2, "center": -1, "offset": 3}},
    {"id": 1, "name": "high", "cost": {"kind": "quadratic", "curvature": 2, "center": 5, "offset": -4}}
  ]
}"#;

fn four_exp() -> String {
    let scenarios: Vec<String> = [1.0, 2.0, 4.0, E2]
        .iter()
        .enumerate()
        .map(|(i, b)| {
            format!(r#"{{"id": {i}, "name": "b{i}", "cost": {{"kind": "exp_linear", "b": {b}, "lambda": 1, "c": 1}}}}"#)
        })
        .collect();
    format!(
        r#"{{"interval": {{"lower": "-inf", "upper": "+inf"}}, "scenarios": [{}]}}"#,
        scenarios.join(",")
    )
}

fn report(out: &Output) -> RunReport {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn symmetric_quadratics_solve_at_the_midpoint() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "sym.json", SYMMETRIC);
    let r = report(&lwr(&["analyze", s(&input), "--criterion", "lwr"]));
    assert!((r.solution - 2.0).abs() < 1e-9);
    assert_eq!(r.determined, Some(true));
    let pair = r.extreme_pair.unwrap();
    assert_eq!((pair.k_name.as_str(), pair.l_name.as_str()), ("low", "high"));
    assert_eq!(r.scenarios[1].offset, -4.0);
    assert_eq!(r.provenance.input_sha256.len(), 64);
}

#[test]
fn common_decay_family_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "four.json", &four_exp());
    let r = report(&lwr(&["analyze", s(&input), "--compatible"]));
    let expected = ((E2 - 1.0) / 2.0).ln();
    assert!((r.solution - expected).abs() < 1e-6);
    let pair = r.extreme_pair.unwrap();
    assert_eq!((pair.k, pair.l), (0, 3));
    let p = r.compatible_probabilities.unwrap();
    // weighted b equals the log-mean of the extremes
    assert!((p[0] + p[3] * E2 - (E2 - 1.0) / 2.0).abs() < 1e-6);
}

#[test]
fn bayes_run() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "four.json", &four_exp());
    let probs = write(&dir, "p.json", r#"{"p": [0.25, 0.25, 0.25, 0.25]}"#);
    let r = report(&lwr(&["analyze", s(&input), "--criterion", "bayes", "--probabilities", s(&probs)]));
    // x = ln(mean b) for unit lambda and c
    let mean_b = (1.0 + 2.0 + 4.0 + E2) / 4.0;
    assert!((r.solution - mean_b.ln()).abs() < 1e-6);
    assert_eq!(r.criterion, CriterionArg::Bayes);
    assert!(r.determined.is_none());
}

#[test]
fn bayes_without_probabilities_exits_2() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "sym.json", SYMMETRIC);
    let out = lwr(&["analyze", s(&input), "--criterion", "bayes"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schema_errors_exit_2_with_location() {
    let dir = TempDir::new().unwrap();
    let typo = write(
        &dir,
        "typo.json",
        "{\"interval\": {\"lower\": 0, \"upper\": 1},\n \"scenarios\": [{\"id\": 0, \"name\": \"a\", \"cost\": {\"kind\": \"quadratic\", \"curvture\": 1}}]}",
    );
    let out = lwr(&["analyze", s(&typo)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":2:") && err.contains("curvture"), "{err}");

    let nonconvex = write(
        &dir,
        "nc.json",
        r#"{"interval": {"lower": 0, "upper": 4}, "scenarios": [
            {"id": 0, "name": "a", "cost": {"kind": "tabulated", "x": [0, 1, 2, 3], "y": [0, 2, 3, 3.5]}}]}"#,
    );
    let out = lwr(&["analyze", s(&nonconvex)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scenarios[0].cost"));

    let dup = write(
        &dir,
        "dup.json",
        r#"{"interval": {"lower": 0, "upper": 4}, "scenarios": [
            {"id": 0, "name": "a", "cost": {"kind": "quadratic", "curvature": 1, "center": 0, "offset": 0}},
            {"id": 0, "name": "b", "cost": {"kind": "quadratic", "curvature": 1, "center": 1, "offset": 0}}]}"#,
    );
    assert_eq!(lwr(&["analyze", s(&dup)]).status.code(), Some(2));
    assert_eq!(lwr(&["analyze", "/nonexistent/file.json"]).status.code(), Some(2));
}

#[test]
fn unbounded_costs_exit_3() {
    let dir = TempDir::new().unwrap();
    // decreasing without bound on the real line
    let input = write(
        &dir,
        "down.json",
        r#"{"interval": {"lower": "-inf", "upper": "+inf"}, "scenarios": [
            {"id": 0, "name": "down", "cost": {"kind": "piecewise_linear", "breakpoints": [0], "slopes": [-2, -1], "anchor": 0}}]}"#,
    );
    assert_eq!(lwr(&["analyze", s(&input)]).status.code(), Some(3));
}

#[test]
fn curves_shape_and_columns() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "sym.json", SYMMETRIC);
    let out = lwr(&["curves", s(&input), "--lo", "-3", "--hi", "7", "--n", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,f_low,f_high,regret_low,regret_high,max_regret");
    assert_eq!(lines.len(), 3);

    let out = lwr(&["curves", s(&input), "--lo", "1", "--hi", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = lwr(&["curves", s(&input), "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn csv_agrees_with_the_run_report() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "four.json", &four_exp());
    let r = analyze(&AnalyzeArgs {
        input: input.clone(),
        criterion: CriterionArg::Lwr,
        probabilities: None,
        tol: 1e-9,
        compatible: false,
    })
    .unwrap();
    let text = curves(&CurvesArgs {
        input,
        lo: None,
        hi: None,
        n: 401,
        tol: 1e-9,
    })
    .unwrap();
    let (header, rows) = parse_csv(&text);
    let n = (header.len() - 2) / 2;
    for row in &rows {
        let regrets = &row[1 + n..1 + 2 * n];
        let m = regrets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((row[1 + 2 * n] - m).abs() <= 1e-8 * (1.0 + m.abs()));
    }
    let step = rows[1][0] - rows[0][0];
    let best = rows.iter().min_by(|a, b| a[1 + 2 * n].total_cmp(&b[1 + 2 * n])).unwrap();
    assert!((best[0] - r.solution).abs() <= step + 1e-9);

    // the extreme regret columns cross between neighbouring grid points
    // around the solution
    let (k, l) = (1 + n, 1 + n + 3);
    let j = rows.iter().position(|row| row[0] > r.solution).unwrap();
    let before = rows[j - 1][k] - rows[j - 1][l];
    let after = rows[j][k] - rows[j][l];
    assert!(before <= 0.0 && after >= 0.0, "{before} {after}");
}

#[test]
fn reports_round_trip_and_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "four.json", &four_exp());
    let a = lwr(&["analyze", s(&input), "--compatible"]);
    let b = lwr(&["analyze", s(&input), "--compatible"]);
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a);
    let again: RunReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(again, r);

    let c1 = lwr(&["curves", s(&input)]);
    let c2 = lwr(&["curves", s(&input)]);
    assert_eq!(c1.stdout, c2.stdout);
    assert_eq!(String::from_utf8(c1.stdout).unwrap().lines().count(), 402);
}

#[test]
fn capacity_pipeline() {
    let dir = TempDir::new().unwrap();
    let a = lwr(&["capacity", "synth", "--seed", "7"]);
    let b = lwr(&["capacity", "synth", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let study: CapacityStudy = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(study.scenarios.len(), 19);
    let again: CapacityStudy = serde_json::from_str(&serde_json::to_string(&study).unwrap()).unwrap();
    assert_eq!(again, study);

    let path = dir.path().join("study.json");
    assert!(lwr(&["capacity", "synth", "--seed", "7", "--out", s(&path)]).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);

    let out = lwr(&["capacity", "analyze", s(&path)]);
    assert!(out.status.success());
    let rep: CapacityReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(rep.max_lole_mismatch < 1e-9);
    assert!(rep.discrete_worst_regret >= rep.continuous_worst_regret);
    assert!((rep.gap_gw - (rep.discrete_choice_gw - rep.continuous_lwr_gw).abs()).abs() < 1e-9);
    assert!(rep.decision_set_gw.contains(&rep.discrete_choice_gw));
    assert!((rep.decision_set_gw[0] - 45.0).abs() < 1e-9);
    assert!((rep.decision_set_gw[18] - 51.0).abs() < 1e-9);

    let text = lwr(&["capacity", "report", s(&path)]);
    assert!(text.status.success());
    assert!(String::from_utf8(text.stdout).unwrap().contains("2.88"));

    let bad = write(&dir, "bad.json", r#"{"voll": -1, "cone": 1, "standard": 3, "scenarios": []}"#);
    assert_eq!(lwr(&["capacity", "analyze", s(&bad)]).status.code(), Some(2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scenario_files_round_trip(b in proptest::collection::vec(0.1..50.0f64, 1..6), lo in -5.0..0.0f64, w in 0.5..10.0f64) {
        let dir = TempDir::new().unwrap();
        let costs: Vec<String> = b
            .iter()
            .enumerate()
            .map(|(i, b)| format!(r#"{{"id": {i}, "name": "s{i}", "cost": {{"kind": "exp_linear", "b": {b}, "lambda": 0.7, "c": 1.3}}}}"#))
            .collect();
        let body = format!(r#"{{"interval": {{"lower": {lo}, "upper": {}}}, "scenarios": [{}]}}"#, lo + w, costs.join(","));
        let path = write(&dir, "in.json", &body);
        let (set, _) = lwr_cli::load_scenario_set(&path).unwrap();
        let back = serde_json::from_str(&serde_json::to_string(&set).unwrap()).unwrap();
        prop_assert_eq!(set, back);
    }
}
