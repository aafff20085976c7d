//! Expected-cost (Bayesian) analysis and the probability vectors under
//! which it agrees with a given decision.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exp_linear::ExpLinearFamily;
use crate::scenario::ScenarioSet;
use crate::solve::{minimize, ConvexObjective, SolveError, SolveResult};

/// Tolerance on the sum of a probability vector.
pub const SIMPLEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BayesError {
    #[error("probability vector has {found} entries, scenario set has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),
    #[error("no two-point prior on ({k}, {l}) puts the optimum at {x}: slopes {slope_k} and {slope_l} share a sign")]
    NoSolution {
        k: usize,
        l: usize,
        x: f64,
        slope_k: f64,
        slope_l: f64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Weights over scenario ids; nonnegative, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self, BayesError> {
        if p.is_empty() {
            return Err(BayesError::InvalidProbabilities("empty".into()));
        }
        if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(BayesError::InvalidProbabilities(format!(
                "p[{i}] = {v} is not a nonnegative number"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(BayesError::InvalidProbabilities(format!("sums to {sum}, not 1")));
        }
        Ok(Self(p))
    }

    /// All mass on scenario `j`.
    pub fn degenerate(n: usize, j: usize) -> Self {
        let mut p = vec![0.0; n];
        p[j] = 1.0;
        Self(p)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<'de> Deserialize<'de> for ProbabilityVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = Vec::<f64>::deserialize(d)?;
        ProbabilityVector::new(p).map_err(serde::de::Error::custom)
    }
}

fn check_dimension(set: &ScenarioSet, p: &ProbabilityVector) -> Result<(), BayesError> {
    if p.len() != set.len() {
        return Err(BayesError::Dimension {
            expected: set.len(),
            found: p.len(),
        });
    }
    Ok(())
}

/// `Σ p_i f_i` as a solver objective.
#[derive(Debug, Clone, Copy)]
pub struct ExpectedCost<'a> {
    set: &'a ScenarioSet,
    p: &'a ProbabilityVector,
}

impl<'a> ExpectedCost<'a> {
    pub fn new(set: &'a ScenarioSet, p: &'a ProbabilityVector) -> Result<Self, BayesError> {
        check_dimension(set, p)?;
        Ok(Self { set, p })
    }

    fn weighted(&self) -> impl Iterator<Item = (f64, &crate::scenario::CostFunction)> + '_ {
        self.p
            .as_slice()
            .iter()
            .zip(&self.set.scenarios)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, s)| (*w, &s.cost))
    }
}

impl ConvexObjective for ExpectedCost<'_> {
    fn value(&self, x: f64) -> f64 {
        self.weighted().map(|(w, f)| w * f.evaluate(x)).sum()
    }

    fn slopes(&self, x: f64) -> (f64, f64) {
        self.weighted().fold((0.0, 0.0), |(l, r), (w, f)| {
            let (fl, fr) = f.slopes(x);
            (l + w * fl, r + w * fr)
        })
    }
}

pub fn expected_cost(set: &ScenarioSet, p: &ProbabilityVector, x: f64) -> Result<f64, BayesError> {
    Ok(ExpectedCost::new(set, p)?.value(x))
}

/// Minimizes the expected cost over the set's interval.
///
/// The search bisects on the sign of the expected-cost derivative, which is
/// strictly increasing for strictly convex scenarios, so the result is the
/// root of `Σ p_i f_i'(x) = 0` when it is interior.
pub fn solve_bayes(set: &ScenarioSet, p: &ProbabilityVector, tol: f64) -> Result<SolveResult, BayesError> {
    let objective = ExpectedCost::new(set, p)?;
    Ok(minimize(&objective, &set.interval, tol)?)
}

/// Expected-cost minimizer for a common-decay exp-linear family on the
/// real line: `ln(lambda * Σ p_i b_i / c) / lambda`.
pub fn closed_form_solution(family: &ExpLinearFamily, p: &ProbabilityVector) -> Result<f64, BayesError> {
    if p.len() != family.len() {
        return Err(BayesError::Dimension {
            expected: family.len(),
            found: p.len(),
        });
    }
    let mean_b: f64 = p.as_slice().iter().zip(family.b()).map(|(w, b)| w * b).sum();
    Ok((family.lambda() * mean_b / family.c()).ln() / family.lambda())
}

/// Central derivative of scenario `i` at `x` (mean of the one-sided slopes).
fn mean_slope(set: &ScenarioSet, i: usize, x: f64) -> f64 {
    let (l, r) = set.scenarios[i].cost.slopes(x);
    0.5 * (l + r)
}

/// The unique prior supported on `{k, l}` whose expected-cost optimum is
/// `x_target`.
///
/// Uses the central derivative at kinks, which lies inside each subgradient
/// interval, so the resulting weighted subgradient contains zero.
pub fn compatible_pair_probability(
    set: &ScenarioSet,
    k: usize,
    l: usize,
    x_target: f64,
) -> Result<ProbabilityVector, BayesError> {
    let n = set.len();
    if k >= n || l >= n {
        return Err(BayesError::InvalidArgument(format!("pair ({k}, {l}) out of range")));
    }
    if !set.interval.is_interior(x_target) {
        return Err(BayesError::InvalidArgument(format!(
            "target {x_target} is not interior to {}",
            set.interval
        )));
    }
    if k == l {
        let s = mean_slope(set, k, x_target);
        let (lo, hi) = set.scenarios[k].cost.slopes(x_target);
        if lo <= 0.0 && hi >= 0.0 {
            return Ok(ProbabilityVector::degenerate(n, k));
        }
        return Err(BayesError::NoSolution {
            k,
            l,
            x: x_target,
            slope_k: s,
            slope_l: s,
        });
    }
    let sk = mean_slope(set, k, x_target);
    let sl = mean_slope(set, l, x_target);
    if sk * sl > 0.0 || sk == sl {
        return Err(BayesError::NoSolution {
            k,
            l,
            x: x_target,
            slope_k: sk,
            slope_l: sl,
        });
    }
    let pk = -sl / (sk - sl);
    let mut p = vec![0.0; n];
    p[k] = pk;
    p[l] = 1.0 - pk;
    Ok(ProbabilityVector(p))
}

/// Same as [`compatible_pair_probability`] for the extreme pair of an
/// exp-linear family.
pub fn compatible_family_probability(
    family: &ExpLinearFamily,
    x_target: f64,
) -> Result<ProbabilityVector, BayesError> {
    let set = family.to_scenario_set();
    compatible_pair_probability(&set, 0, family.len() - 1, x_target)
}

/// Whether zero lies in the `p`-weighted subgradient at `x_target`, i.e. the
/// expected-cost optimum under `p` is `x_target`. `tol` is relative to the
/// weighted slope magnitude.
pub fn is_compatible(
    set: &ScenarioSet,
    p: &ProbabilityVector,
    x_target: f64,
    tol: f64,
) -> Result<bool, BayesError> {
    check_dimension(set, p)?;
    let (mut left, mut right, mut scale) = (0.0, 0.0, 0.0);
    for (w, s) in p.as_slice().iter().zip(&set.scenarios) {
        if *w == 0.0 {
            continue;
        }
        let (l, r) = s.cost.slopes(x_target);
        left += w * l;
        right += w * r;
        scale += w * l.abs().max(r.abs());
    }
    let slack = tol * scale.max(f64::MIN_POSITIVE);
    Ok(left <= slack && right >= -slack)
}

/// Common-decay exp-linear form of the compatibility test: the weighted mean
/// of `b` equals the logarithmic mean of the extremes, within `tol` relative.
pub fn is_compatible_family(
    family: &ExpLinearFamily,
    p: &ProbabilityVector,
    tol: f64,
) -> Result<bool, BayesError> {
    if p.len() != family.len() {
        return Err(BayesError::Dimension {
            expected: family.len(),
            found: p.len(),
        });
    }
    let bbar = family
        .equivalence_parameter()
        .map_err(|e| BayesError::InvalidArgument(e.to_string()))?;
    let mean_b: f64 = p.as_slice().iter().zip(family.b()).map(|(w, b)| w * b).sum();
    Ok((mean_b - bbar).abs() <= tol * bbar)
}
