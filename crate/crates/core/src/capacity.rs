//! Capacity-procurement cost model.
//!
//! Each scenario carries an exponential adequacy curve: expected energy
//! unserved `EEU(x) = A * exp(-rate * x)` (MWh/yr) and loss-of-load
//! expectation `LOLE(x) = rate * A * exp(-rate * x)` (h/yr), so that
//! `d EEU / dx = -LOLE`. Annual cost is `VOLL * EEU(x) + CONE * x`, an
//! exp-linear curve whose minimizer sits exactly where `LOLE = CONE / VOLL`.
//!
//! Units: pounds, MW, MWh, hours per year. GW only appears in reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exp_linear;
use crate::regret::{regret_profile, solve_lwr_with_profile, worst_regret, AnalysisError, AnalysisOutcome, RegretProfile};
use crate::scenario::{CostFunction, DecisionInterval, Scenario, ScenarioSet};

/// Value of lost load used by the 2015 GB capacity report, £/MWh.
pub const GB_VOLL: f64 = 17_000.0;
/// Cost of new entry used by the 2015 GB capacity report, £/MW/yr.
pub const GB_CONE: f64 = 49_000.0;
/// GB reliability standard, hours of LOLE per year.
pub const GB_STANDARD: f64 = 3.0;

/// Points closer than this (MW) are merged in the discrete decision set.
pub const DEDUP_TOL_MW: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapacityError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid study: {0}")]
    Study(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdequacyCurve {
    /// Expected energy unserved at zero capacity, MWh/yr.
    pub eeu_at_zero: f64,
    /// Exponential decay per MW.
    pub rate: f64,
}

impl AdequacyCurve {
    pub fn new(eeu_at_zero: f64, rate: f64) -> Result<Self, CapacityError> {
        let curve = Self { eeu_at_zero, rate };
        curve.check()?;
        Ok(curve)
    }

    fn check(&self) -> Result<(), CapacityError> {
        if !(self.eeu_at_zero.is_finite() && self.eeu_at_zero > 0.0) {
            return Err(CapacityError::Study(format!(
                "eeu_at_zero must be positive (got {})",
                self.eeu_at_zero
            )));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(CapacityError::Study(format!("rate must be positive (got {})", self.rate)));
        }
        Ok(())
    }

    pub fn eeu(&self, x: f64) -> f64 {
        self.eeu_at_zero * (-self.rate * x).exp()
    }

    pub fn lole(&self, x: f64) -> f64 {
        self.rate * self.eeu(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityScenario {
    pub name: String,
    #[serde(flatten)]
    pub curve: AdequacyCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityStudy {
    /// £/MWh.
    pub voll: f64,
    /// £/MW/yr.
    pub cone: f64,
    /// LOLE ceiling, h/yr.
    pub standard: f64,
    pub scenarios: Vec<CapacityScenario>,
}

impl CapacityStudy {
    pub fn validate(&self) -> Result<(), CapacityError> {
        for (name, v) in [("voll", self.voll), ("cone", self.cone), ("standard", self.standard)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CapacityError::Study(format!("{name} must be positive (got {v})")));
            }
        }
        if self.scenarios.is_empty() {
            return Err(CapacityError::Study("no scenarios".into()));
        }
        for s in &self.scenarios {
            s.curve
                .check()
                .map_err(|e| CapacityError::Study(format!("scenario {}: {e}", s.name)))?;
        }
        Ok(())
    }

    /// Whether the economic optimum LOLE is within a factor two of the
    /// reliability standard, so meeting the standard roughly minimizes cost.
    pub fn standard_aligned(&self) -> bool {
        self.cone / self.voll < 2.0 * self.standard
    }

    pub fn cost_function(&self, scenario: usize) -> CostFunction {
        cost_function(self, &self.scenarios[scenario].curve)
    }

    /// Cost curves as a scenario set over the whole real line.
    pub fn scenario_set(&self) -> ScenarioSet {
        ScenarioSet {
            interval: DecisionInterval::real_line(),
            scenarios: self
                .scenarios
                .iter()
                .enumerate()
                .map(|(i, s)| Scenario::new(i, s.name.clone(), cost_function(self, &s.curve)))
                .collect(),
        }
    }

    /// Cost-minimizing capacity of each scenario (closed form).
    pub fn cost_minimizers(&self) -> Vec<f64> {
        self.scenarios
            .iter()
            .map(|s| {
                let c = cost_function(self, &s.curve);
                match c {
                    CostFunction::ExpLinear { b, lambda, c } => {
                        exp_linear::minimizer(b, lambda, c).expect("positive parameters")
                    }
                    _ => unreachable!("capacity costs are exp-linear"),
                }
            })
            .collect()
    }
}

/// `VOLL * EEU(x) + CONE * x` as an exp-linear cost.
pub fn cost_function(study: &CapacityStudy, curve: &AdequacyCurve) -> CostFunction {
    CostFunction::ExpLinear {
        b: study.voll * curve.eeu_at_zero,
        lambda: curve.rate,
        c: study.cone,
    }
}

/// LOLE at which every scenario's cost is minimized: `CONE / VOLL`.
pub fn optimal_lole(study: &CapacityStudy) -> f64 {
    study.cone / study.voll
}

/// Each scenario's LOLE at its own cost minimizer; all equal `CONE / VOLL`
/// up to rounding.
pub fn lole_at_minimizers(study: &CapacityStudy) -> Vec<f64> {
    study
        .scenarios
        .iter()
        .zip(study.cost_minimizers())
        .map(|(s, x)| s.curve.lole(x))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityCapacity {
    pub mw: f64,
    /// LOLE at zero capacity already meets the standard; `mw` is 0.
    pub already_adequate: bool,
}

/// Capacity at which LOLE falls to `standard`.
pub fn reliability_capacity(curve: &AdequacyCurve, standard: f64) -> ReliabilityCapacity {
    if curve.lole(0.0) <= standard {
        return ReliabilityCapacity {
            mw: 0.0,
            already_adequate: true,
        };
    }
    ReliabilityCapacity {
        mw: (curve.rate * curve.eeu_at_zero / standard).ln() / curve.rate,
        already_adequate: false,
    }
}

/// One capacity point per scenario, each just meeting the standard; sorted
/// and deduplicated.
pub fn discrete_decision_set(study: &CapacityStudy) -> Vec<f64> {
    let mut points: Vec<f64> = study
        .scenarios
        .iter()
        .map(|s| reliability_capacity(&s.curve, study.standard).mw)
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup_by(|b, a| (*b - *a).abs() <= DEDUP_TOL_MW);
    points
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteChoice {
    pub point: f64,
    pub worst_regret: f64,
    pub continuous_solution: f64,
    pub continuous_objective: f64,
    /// `|point - continuous_solution|`, MW.
    pub gap: f64,
}

/// Continuous LWR analysis of a study.
pub fn solve_lwr_continuous(
    study: &CapacityStudy,
    tol: f64,
) -> Result<(RegretProfile, AnalysisOutcome), CapacityError> {
    let set = study.scenario_set();
    let profile = regret_profile(&set, tol)?;
    let outcome = solve_lwr_with_profile(&set, &profile, tol)?;
    Ok((profile, outcome))
}

/// LWR restricted to `points`, with regrets measured against the
/// unrestricted (continuous) minima.
pub fn solve_lwr_discrete(
    study: &CapacityStudy,
    points: &[f64],
    tol: f64,
) -> Result<DiscreteChoice, CapacityError> {
    if points.is_empty() {
        return Err(CapacityError::Config("empty decision set".into()));
    }
    let set = study.scenario_set();
    let (profile, outcome) = solve_lwr_continuous(study, tol)?;
    let (point, worst) = points
        .iter()
        .map(|&x| (x, worst_regret(&set, &profile, x)))
        .fold((f64::NAN, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best });
    Ok(DiscreteChoice {
        point,
        worst_regret: worst,
        continuous_solution: outcome.solution,
        continuous_objective: outcome.objective,
        gap: (point - outcome.solution).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub scenarios: usize,
    /// Smallest and largest `eeu_at_zero`, MWh/yr.
    pub eeu_min: f64,
    pub eeu_max: f64,
    pub rate: f64,
    pub voll: f64,
    pub cone: f64,
    pub standard: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    /// A GB-like ensemble of 19 scenarios whose reliability capacities span
    /// `low_mw..high_mw` under a decay of `rate` per MW.
    pub fn gb_like(low_mw: f64, high_mw: f64, rate: f64, seed: u64) -> Self {
        let eeu_for = |x: f64| GB_STANDARD / rate * (rate * x).exp();
        Self {
            scenarios: 19,
            eeu_min: eeu_for(low_mw),
            eeu_max: eeu_for(high_mw),
            rate,
            voll: GB_VOLL,
            cone: GB_CONE,
            standard: GB_STANDARD,
            seed,
        }
    }
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self::gb_like(45_000.0, 51_000.0, 1.0e-3, 2015)
    }
}

/// Seeded ensemble sharing one decay rate.
///
/// The first and last scenarios sit exactly at the ends of the EEU range;
/// the others are drawn log-uniformly between them. Scenarios are sorted by
/// increasing `eeu_at_zero`.
pub fn synthetic_ensemble(config: &SyntheticConfig) -> Result<CapacityStudy, CapacityError> {
    let c = config;
    if c.scenarios < 2 {
        return Err(CapacityError::Config(format!("need at least 2 scenarios (got {})", c.scenarios)));
    }
    let positive = [
        ("eeu_min", c.eeu_min),
        ("eeu_max", c.eeu_max),
        ("rate", c.rate),
        ("voll", c.voll),
        ("cone", c.cone),
        ("standard", c.standard),
    ];
    for (name, v) in positive {
        if !(v.is_finite() && v > 0.0) {
            return Err(CapacityError::Config(format!("{name} must be positive (got {v})")));
        }
    }
    if c.eeu_min >= c.eeu_max {
        return Err(CapacityError::Config(format!(
            "eeu range is empty: {} >= {}",
            c.eeu_min, c.eeu_max
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let (lo, hi) = (c.eeu_min.ln(), c.eeu_max.ln());
    let mut levels = vec![c.eeu_min, c.eeu_max];
    for _ in 2..c.scenarios {
        let u: f64 = rng.gen_range(0.0..1.0);
        // keep interior draws strictly inside the range
        let v = (lo + u * (hi - lo)).exp().clamp(c.eeu_min, c.eeu_max);
        levels.push(if v > c.eeu_min && v < c.eeu_max { v } else { (0.5 * (lo + hi)).exp() });
    }
    levels.sort_by(f64::total_cmp);

    let width = c.scenarios.to_string().len();
    let scenarios = levels
        .into_iter()
        .enumerate()
        .map(|(i, eeu)| CapacityScenario {
            name: format!("S{:0width$}", i + 1),
            curve: AdequacyCurve {
                eeu_at_zero: eeu,
                rate: c.rate,
            },
        })
        .collect();
    Ok(CapacityStudy {
        voll: c.voll,
        cone: c.cone,
        standard: c.standard,
        scenarios,
    })
}
