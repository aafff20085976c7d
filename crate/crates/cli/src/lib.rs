//! Command implementations behind the `lwr` binary.
//!
//! Each command returns its output as a string so it can be tested without
//! spawning a process; `main.rs` only parses flags and maps errors to exit
//! codes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lwr_core::bayes::{self, BayesError, ProbabilityVector};
use lwr_core::capacity::{
    self, discrete_decision_set, lole_at_minimizers, optimal_lole, reliability_capacity, CapacityError,
    CapacityStudy, SyntheticConfig,
};
use lwr_core::regret::{self, AnalysisError, Criterion, PairCase};
use lwr_core::scenario::ScenarioSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_GRID_POINTS: usize = 401;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or invalid input; exit code 2.
    #[error("{0}")]
    Input(String),
    /// The analysis itself failed; exit code 3.
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::InvalidArgument(m) => CliError::Input(m),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<BayesError> for CliError {
    fn from(e: BayesError) -> Self {
        match e {
            BayesError::Solve(s) => CliError::Solver(s.to_string()),
            BayesError::NoSolution { .. } => CliError::Solver(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<CapacityError> for CliError {
    fn from(e: CapacityError) -> Self {
        match e {
            CapacityError::Analysis(a) => a.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionArg {
    Minimax,
    Lwr,
    Bayes,
}

impl CriterionArg {
    pub fn as_str(self) -> &'static str {
        match self {
            CriterionArg::Minimax => "minimax",
            CriterionArg::Lwr => "lwr",
            CriterionArg::Bayes => "bayes",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairReport {
    pub k: usize,
    pub l: usize,
    pub k_name: String,
    pub l_name: String,
    pub case: PairCase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioReport {
    pub id: usize,
    pub name: String,
    pub minimizer: f64,
    /// Minimum cost, subtracted to form the regret.
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub input_sha256: String,
    pub tool_version: String,
    pub tol: f64,
    pub certificate_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub criterion: CriterionArg,
    pub solution: f64,
    pub objective: f64,
    pub extreme_pair: Option<PairReport>,
    /// Whether the extreme pair alone reproduces the solution. Absent for
    /// Bayesian runs.
    pub determined: Option<bool>,
    pub scenarios: Vec<ScenarioReport>,
    /// Prior on the extreme pair under which the expected-cost optimum
    /// coincides with the solution.
    pub compatible_probabilities: Option<Vec<f64>>,
    pub provenance: Provenance,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbabilityFile {
    p: ProbabilityVector,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Input(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(CliError::Input(format!("--tol must be positive (got {tol})")))
    }
}

/// Parses and validates a scenario file. Returns the set and the input
/// digest.
pub fn load_scenario_set(path: &Path) -> Result<(ScenarioSet, String), CliError> {
    let text = read(path)?;
    let set: ScenarioSet = parse_json(path, &text)?;
    let report = set.validate();
    if !report.is_empty() {
        return Err(CliError::Input(format!("{}: {report}", path.display())));
    }
    Ok((set, digest(&text)))
}

pub fn load_probabilities(path: &Path, n: usize) -> Result<ProbabilityVector, CliError> {
    let text = read(path)?;
    let file: ProbabilityFile = parse_json(path, &text)?;
    if file.p.len() != n {
        return Err(CliError::Input(format!(
            "{}: p has {} entries, scenario file has {n}",
            path.display(),
            file.p.len()
        )));
    }
    Ok(file.p)
}

#[derive(Debug, Clone)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    pub criterion: CriterionArg,
    pub probabilities: Option<PathBuf>,
    pub tol: f64,
    /// Attach the compatible prior on the extreme pair.
    pub compatible: bool,
}

pub fn analyze(args: &AnalyzeArgs) -> Result<RunReport, CliError> {
    check_tol(args.tol)?;
    let (set, sha) = load_scenario_set(&args.input)?;
    let probs = match (args.criterion, &args.probabilities) {
        (CriterionArg::Bayes, None) => {
            return Err(CliError::Input("--probabilities is required for the bayes criterion".into()))
        }
        (CriterionArg::Bayes, Some(p)) => Some(load_probabilities(p, set.len())?),
        (_, Some(_)) => {
            return Err(CliError::Input("--probabilities only applies to the bayes criterion".into()))
        }
        _ => None,
    };

    let profile = regret::regret_profile(&set, args.tol)?;
    let scenarios = set
        .scenarios
        .iter()
        .zip(profile.minimizers.iter().zip(&profile.minima))
        .map(|(s, (&minimizer, &offset))| ScenarioReport {
            id: s.id,
            name: s.name.clone(),
            minimizer,
            offset,
        })
        .collect();
    let provenance = Provenance {
        input_sha256: sha,
        tool_version: TOOL_VERSION.to_string(),
        tol: args.tol,
        certificate_tol: regret::CERTIFICATE_TOL,
    };

    if let Some(p) = probs {
        let r = bayes::solve_bayes(&set, &p, args.tol)?;
        return Ok(RunReport {
            criterion: CriterionArg::Bayes,
            solution: r.minimizer,
            objective: r.value,
            extreme_pair: None,
            determined: None,
            scenarios,
            compatible_probabilities: None,
            provenance,
        });
    }

    let outcome = match args.criterion {
        CriterionArg::Minimax => regret::solve(&set, Criterion::Minimax, args.tol)?,
        _ => regret::solve_lwr_with_profile(&set, &profile, args.tol)?,
    };
    let extreme_pair = outcome.extreme_pair.as_ref().map(|p| PairReport {
        k: p.k,
        l: p.l,
        k_name: set.scenarios[p.k].name.clone(),
        l_name: set.scenarios[p.l].name.clone(),
        case: p.case,
    });
    let compatible_probabilities = match (&outcome.extreme_pair, args.compatible) {
        (Some(pair), true) => Some(
            bayes::compatible_pair_probability(&set, pair.k, pair.l, outcome.solution)?
                .as_slice()
                .to_vec(),
        ),
        _ => None,
    };
    Ok(RunReport {
        criterion: args.criterion,
        solution: outcome.solution,
        objective: outcome.objective,
        extreme_pair,
        determined: Some(outcome.determined),
        scenarios,
        compatible_probabilities,
        provenance,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// `%.9g`-style formatting: nine significant digits, trailing zeros
/// trimmed, exponent notation outside `[1e-5, 1e9)`.
pub fn format_sig(v: f64) -> String {
    const DIGITS: i32 = 9;
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (DIGITS - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone)]
pub struct CurvesArgs {
    pub input: PathBuf,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub n: usize,
    pub tol: f64,
}

/// Default plotting window: the decision interval where finite, otherwise
/// the hull of the minimizers padded by its width (at least one unit).
fn default_window(set: &ScenarioSet, minimizers: &[f64]) -> (f64, f64) {
    let lo = minimizers.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = minimizers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = (hi - lo).max(1.0);
    let a = if set.interval.lower().is_finite() { set.interval.lower() } else { lo - pad };
    let b = if set.interval.upper().is_finite() { set.interval.upper() } else { hi + pad };
    (a, b)
}

/// CSV with columns `x`, one cost and one regret column per scenario, and
/// the worst regret.
pub fn curves(args: &CurvesArgs) -> Result<String, CliError> {
    check_tol(args.tol)?;
    if args.n < 2 {
        return Err(CliError::Input(format!("--n must be at least 2 (got {})", args.n)));
    }
    let (set, _) = load_scenario_set(&args.input)?;
    let profile = regret::regret_profile(&set, args.tol)?;
    let (dlo, dhi) = default_window(&set, &profile.minimizers);
    let lo = args.lo.unwrap_or(dlo);
    let hi = args.hi.unwrap_or(dhi);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Input(format!("bad grid: need finite lo < hi (got {lo}, {hi})")));
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["x".to_string()];
    header.extend(set.scenarios.iter().map(|s| format!("f_{}", s.name)));
    header.extend(set.scenarios.iter().map(|s| format!("regret_{}", s.name)));
    header.push("max_regret".into());
    w.write_record(&header).map_err(|e| CliError::Input(e.to_string()))?;

    let step = (hi - lo) / (args.n - 1) as f64;
    for j in 0..args.n {
        let x = if j == args.n - 1 { hi } else { lo + j as f64 * step };
        let costs: Vec<f64> = set.scenarios.iter().map(|s| s.cost.evaluate(x)).collect();
        let regrets: Vec<f64> = costs.iter().zip(&profile.minima).map(|(f, m)| f - m).collect();
        let worst = regrets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut row = vec![format_sig(x)];
        row.extend(costs.iter().map(|&v| format_sig(v)));
        row.extend(regrets.iter().map(|&v| format_sig(v)));
        row.push(format_sig(worst));
        w.write_record(&row).map_err(|e| CliError::Input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

pub fn capacity_synth(config: &SyntheticConfig) -> Result<String, CliError> {
    Ok(to_json(&capacity::synthetic_ensemble(config)?))
}

pub fn load_study(path: &Path) -> Result<CapacityStudy, CliError> {
    let text = read(path)?;
    let study: CapacityStudy = parse_json(path, &text)?;
    study
        .validate()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(study)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityScenarioReport {
    pub name: String,
    pub cost_minimizer_gw: f64,
    pub reliability_gw: f64,
    pub already_adequate: bool,
    pub lole_at_cost_minimizer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityReport {
    pub optimal_lole: f64,
    pub standard: f64,
    pub standard_aligned: bool,
    /// Largest relative gap between LOLE at a cost minimizer and `CONE / VOLL`.
    pub max_lole_mismatch: f64,
    pub continuous_lwr_gw: f64,
    pub continuous_worst_regret: f64,
    pub extreme_pair: Option<(String, String)>,
    pub decision_set_gw: Vec<f64>,
    pub discrete_choice_gw: f64,
    pub discrete_worst_regret: f64,
    pub gap_gw: f64,
    pub scenarios: Vec<CapacityScenarioReport>,
    pub provenance: Provenance,
}

const MW_PER_GW: f64 = 1000.0;

pub fn capacity_analyze(path: &Path, tol: f64) -> Result<CapacityReport, CliError> {
    check_tol(tol)?;
    let text = read(path)?;
    let study = load_study(path)?;
    let (_, cont) = capacity::solve_lwr_continuous(&study, tol)?;
    let points = discrete_decision_set(&study);
    let choice = capacity::solve_lwr_discrete(&study, &points, tol)?;
    let r = optimal_lole(&study);
    let loles = lole_at_minimizers(&study);
    let max_lole_mismatch = loles.iter().map(|l| (l / r - 1.0).abs()).fold(0.0, f64::max);
    let scenarios = study
        .scenarios
        .iter()
        .zip(study.cost_minimizers())
        .zip(&loles)
        .map(|((s, xhat), &lole)| {
            let rel = reliability_capacity(&s.curve, study.standard);
            CapacityScenarioReport {
                name: s.name.clone(),
                cost_minimizer_gw: xhat / MW_PER_GW,
                reliability_gw: rel.mw / MW_PER_GW,
                already_adequate: rel.already_adequate,
                lole_at_cost_minimizer: lole,
            }
        })
        .collect();
    Ok(CapacityReport {
        optimal_lole: r,
        standard: study.standard,
        standard_aligned: study.standard_aligned(),
        max_lole_mismatch,
        continuous_lwr_gw: cont.solution / MW_PER_GW,
        continuous_worst_regret: cont.objective,
        extreme_pair: cont.extreme_pair.map(|p| {
            (study.scenarios[p.k].name.clone(), study.scenarios[p.l].name.clone())
        }),
        decision_set_gw: points.iter().map(|x| x / MW_PER_GW).collect(),
        discrete_choice_gw: choice.point / MW_PER_GW,
        discrete_worst_regret: choice.worst_regret,
        gap_gw: choice.gap / MW_PER_GW,
        scenarios,
        provenance: Provenance {
            input_sha256: digest(&text),
            tool_version: TOOL_VERSION.to_string(),
            tol,
            certificate_tol: regret::CERTIFICATE_TOL,
        },
    })
}

/// Plain-text summary of [`capacity_analyze`].
pub fn capacity_report(path: &Path, tol: f64) -> Result<String, CliError> {
    let r = capacity_analyze(path, tol)?;
    let mut out = String::new();
    let _ = writeln!(out, "Capacity study: {} scenarios", r.scenarios.len());
    let _ = writeln!(out, "CONE/VOLL = {:.2} h/yr (reliability standard {} h/yr)", r.optimal_lole, r.standard);
    let _ = writeln!(
        out,
        "Cost-optimal LOLE {} the standard within a factor of two",
        if r.standard_aligned { "matches" } else { "does not match" }
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<12} {:>14} {:>14} {:>10}", "scenario", "cost-opt GW", "3h-LOLE GW", "LOLE");
    for s in &r.scenarios {
        let _ = writeln!(
            out,
            "{:<12} {:>14.3} {:>14.3} {:>10.3}",
            s.name, s.cost_minimizer_gw, s.reliability_gw, s.lole_at_cost_minimizer
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Continuous LWR: {:.3} GW (worst regret {:.0})", r.continuous_lwr_gw, r.continuous_worst_regret);
    if let Some((k, l)) = &r.extreme_pair {
        let _ = writeln!(out, "Extreme scenarios: {k}, {l}");
    }
    let _ = writeln!(
        out,
        "Discrete choice: {:.3} GW (worst regret {:.0}), gap {:.3} GW",
        r.discrete_choice_gw, r.discrete_worst_regret, r.gap_gw
    );
    Ok(out)
}
