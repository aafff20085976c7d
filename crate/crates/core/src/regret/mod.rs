//! Minimax and least-worst-regret (LWR) analysis over a [`ScenarioSet`].
//!
//! LWR is minimax applied to regret functions `f_i(x) - min f_i`, so both
//! criteria share one engine: minimize the pointwise maximum, locate the two
//! extreme scenarios from one-sided slopes at the solution, then certify that
//! the pair alone reproduces the solution with every other scenario at or
//! below the pair maximum.

mod pair;
mod restriction;
mod shift;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{CostFunction, DecisionInterval, ScenarioSet};
use crate::solve::{minimize, minimize_pointwise_max, ConvexObjective, SolveError};

pub use pair::{find_extreme_pair, ExtremePair, PairCase};
pub use restriction::{restriction_effect, RestrictionReport, WITNESS_GRID_POINTS};
pub use shift::{detect_argument_shift, ShiftStructure, SHIFT_GRID_POINTS};

/// Relative slack on the determination certificate.
pub const CERTIFICATE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("scenario {id} ({name}) has no minimizer on the interval: {source}")]
    ScenarioUnbounded {
        id: usize,
        name: String,
        source: SolveError,
    },
    #[error("no qualifying extreme pair at x = {solution}")]
    CertificateFailure { solution: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Minimax,
    Lwr,
}

impl Criterion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::Minimax => "minimax",
            Criterion::Lwr => "lwr",
        }
    }
}

/// Per-scenario minimizers and minimum values; the minima are the offsets
/// subtracted to form regrets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretProfile {
    pub minimizers: Vec<f64>,
    pub minima: Vec<f64>,
}

impl RegretProfile {
    pub fn regret(&self, set: &ScenarioSet, id: usize, x: f64) -> f64 {
        set.scenarios[id].cost.evaluate(x) - self.minima[id]
    }

    /// Regret functions of `set` as solver objectives.
    pub fn regrets<'a>(&self, set: &'a ScenarioSet) -> Vec<Regret<'a>> {
        set.scenarios
            .iter()
            .zip(&self.minima)
            .map(|(s, &offset)| Regret::new(&s.cost, offset))
            .collect()
    }
}

/// A cost function shifted down by its minimum.
#[derive(Debug, Clone, Copy)]
pub struct Regret<'a> {
    cost: &'a CostFunction,
    offset: f64,
}

impl<'a> Regret<'a> {
    pub fn new(cost: &'a CostFunction, offset: f64) -> Self {
        Self { cost, offset }
    }
}

impl ConvexObjective for Regret<'_> {
    fn value(&self, x: f64) -> f64 {
        self.cost.evaluate(x) - self.offset
    }

    fn slopes(&self, x: f64) -> (f64, f64) {
        self.cost.slopes(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOutcome {
    pub criterion: Criterion,
    pub solution: f64,
    pub objective: f64,
    /// Scenario ids attaining the maximum at the solution.
    pub active: Vec<usize>,
    pub extreme_pair: Option<ExtremePair>,
    /// The pair alone reproduces the solution and bounds every scenario.
    pub determined: bool,
}

/// Result of checking the determination inequality for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub holds: bool,
    pub pair_solution: f64,
    pub pair_objective: f64,
    /// Largest `g_i(x_kl) - g_kl(x_kl)` over all scenarios.
    pub max_excess: f64,
}

pub fn max_cost(set: &ScenarioSet, x: f64) -> f64 {
    set.scenarios
        .iter()
        .map(|s| s.cost.evaluate(x))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn regret_profile(set: &ScenarioSet, tol: f64) -> Result<RegretProfile, AnalysisError> {
    let mut minimizers = Vec::with_capacity(set.len());
    let mut minima = Vec::with_capacity(set.len());
    for s in &set.scenarios {
        let r = minimize(&s.cost, &set.interval, tol).map_err(|source| match source {
            SolveError::UnboundedBelow { .. } => AnalysisError::ScenarioUnbounded {
                id: s.id,
                name: s.name.clone(),
                source,
            },
            other => AnalysisError::Solve(other),
        })?;
        minimizers.push(r.minimizer);
        minima.push(r.value);
    }
    Ok(RegretProfile { minimizers, minima })
}

pub fn worst_regret(set: &ScenarioSet, profile: &RegretProfile, x: f64) -> f64 {
    (0..set.len())
        .map(|i| profile.regret(set, i, x))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn solve_minimax(set: &ScenarioSet, tol: f64) -> Result<AnalysisOutcome, AnalysisError> {
    let costs = set.costs();
    analyze(&costs, &set.interval, tol, Criterion::Minimax)
}

pub fn solve_lwr(set: &ScenarioSet, tol: f64) -> Result<AnalysisOutcome, AnalysisError> {
    let profile = regret_profile(set, tol)?;
    solve_lwr_with_profile(set, &profile, tol)
}

pub fn solve_lwr_with_profile(
    set: &ScenarioSet,
    profile: &RegretProfile,
    tol: f64,
) -> Result<AnalysisOutcome, AnalysisError> {
    analyze(&profile.regrets(set), &set.interval, tol, Criterion::Lwr)
}

pub fn solve(set: &ScenarioSet, criterion: Criterion, tol: f64) -> Result<AnalysisOutcome, AnalysisError> {
    match criterion {
        Criterion::Minimax => solve_minimax(set, tol),
        Criterion::Lwr => solve_lwr(set, tol),
    }
}

fn analyze<O: ConvexObjective>(
    fs: &[O],
    interval: &DecisionInterval,
    tol: f64,
    criterion: Criterion,
) -> Result<AnalysisOutcome, AnalysisError> {
    let (result, active) = minimize_pointwise_max(fs, interval, tol)?;
    let primary = find_extreme_pair(fs, interval, result.minimizer, &active, tol).ok();

    // The slope case analysis names the canonical pair; if rounding puts it a
    // hair outside the certificate, fall back to any certified active pair.
    let mut candidates: Vec<(usize, usize)> = primary.iter().map(|p| (p.k, p.l)).collect();
    for (a, &i) in active.iter().enumerate() {
        candidates.push((i, i));
        for &j in &active[a + 1..] {
            candidates.push((i, j));
        }
    }

    let mut certified = None;
    for (k, l) in candidates {
        if pair_certificate(fs, interval, k, l, tol)?.holds {
            certified = Some((k, l));
            break;
        }
    }

    let (extreme_pair, determined) = match (certified, primary) {
        (Some((k, l)), Some(p)) if (p.k, p.l) == (k, l) => (Some(p), true),
        (Some((k, l)), _) => {
            let case = if k == l { PairCase::SingleScenario } else { PairCase::Crossing };
            (Some(ExtremePair { k, l, case }), true)
        }
        (None, p) => (p, false),
    };

    Ok(AnalysisOutcome {
        criterion,
        solution: result.minimizer,
        objective: result.value,
        active,
        extreme_pair,
        determined,
    })
}

/// Solves the pair problem for `(k, l)` and checks every function against
/// the pair maximum at the pair solution.
pub(crate) fn pair_certificate<O: ConvexObjective>(
    fs: &[O],
    interval: &DecisionInterval,
    k: usize,
    l: usize,
    tol: f64,
) -> Result<Certificate, AnalysisError> {
    let pair = [&fs[k], &fs[l]];
    let (r, _) = minimize_pointwise_max(&pair, interval, tol)?;
    let x = r.minimizer;
    let g = r.value;
    let slack = CERTIFICATE_TOL * (1.0 + g.abs());
    let max_excess = fs
        .iter()
        .map(|f| f.value(x) - g)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Certificate {
        holds: max_excess <= slack,
        pair_solution: x,
        pair_objective: g,
        max_excess,
    })
}

/// Checks whether `pair` determines the solution of `set` under `mode`
/// (raw costs for minimax, regrets for LWR).
pub fn check_determination(
    set: &ScenarioSet,
    pair: (usize, usize),
    mode: Criterion,
    tol: f64,
) -> Result<bool, AnalysisError> {
    Ok(certificate(set, pair, mode, tol)?.holds)
}

/// Like [`check_determination`] but returns the full certificate.
pub fn certificate(
    set: &ScenarioSet,
    pair: (usize, usize),
    mode: Criterion,
    tol: f64,
) -> Result<Certificate, AnalysisError> {
    let (k, l) = pair;
    if k >= set.len() || l >= set.len() {
        return Err(AnalysisError::InvalidArgument(format!(
            "pair ({k}, {l}) out of range for {} scenarios",
            set.len()
        )));
    }
    match mode {
        Criterion::Minimax => pair_certificate(&set.costs(), &set.interval, k, l, tol),
        Criterion::Lwr => {
            let profile = regret_profile(set, tol)?;
            pair_certificate(&profile.regrets(set), &set.interval, k, l, tol)
        }
    }
}

/// Whether swapping the cost of the non-extreme scenario `id` for
/// `replacement` leaves the determination certificate intact, so that the
/// outcome cannot move.
pub fn perturbation_envelope(
    set: &ScenarioSet,
    outcome: &AnalysisOutcome,
    id: usize,
    replacement: CostFunction,
    tol: f64,
) -> Result<bool, AnalysisError> {
    let pair = match (&outcome.extreme_pair, outcome.determined) {
        (Some(p), true) => p,
        _ => {
            return Err(AnalysisError::InvalidArgument(
                "outcome is not determined by an extreme pair".into(),
            ))
        }
    };
    if id == pair.k || id == pair.l {
        return Err(AnalysisError::InvalidArgument(format!(
            "scenario {id} belongs to the extreme pair"
        )));
    }
    if id >= set.len() {
        return Err(AnalysisError::InvalidArgument(format!("no scenario with id {id}")));
    }
    let mut modified = set.clone();
    modified.scenarios[id].cost = replacement;
    check_determination(&modified, (pair.k, pair.l), outcome.criterion, tol)
}
