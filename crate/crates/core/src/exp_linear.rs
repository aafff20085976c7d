//! Closed forms for costs `b * exp(-lambda * x) + c * x`.
//!
//! With a common decay rate the regrets are translates of one another, so
//! the LWR solution depends only on the smallest and largest `b` and has an
//! explicit expression. Natural logarithms throughout.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{CostFunction, DecisionInterval, ScenarioSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpLinearError {
    #[error("parameter `{name}` must be positive and finite (got {value})")]
    Domain { name: &'static str, value: f64 },
    #[error("b values must be strictly increasing (b[{index}] = {value})")]
    Unordered { index: usize, value: f64 },
    #[error("need at least {need} scenarios, have {have}")]
    Degenerate { need: usize, have: usize },
}

fn positive(name: &'static str, value: f64) -> Result<f64, ExpLinearError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ExpLinearError::Domain { name, value })
    }
}

/// Scenarios sharing `lambda` and `c`, ordered by strictly increasing `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpLinearFamily {
    b: Vec<f64>,
    lambda: f64,
    c: f64,
}

impl ExpLinearFamily {
    /// Rejects unordered `b` rather than sorting: positions identify the
    /// extreme scenarios.
    pub fn new(b: Vec<f64>, lambda: f64, c: f64) -> Result<Self, ExpLinearError> {
        positive("lambda", lambda)?;
        positive("c", c)?;
        if b.is_empty() {
            return Err(ExpLinearError::Degenerate { need: 1, have: 0 });
        }
        for (i, &v) in b.iter().enumerate() {
            positive("b", v)?;
            if i > 0 && v <= b[i - 1] {
                return Err(ExpLinearError::Unordered { index: i, value: v });
            }
        }
        Ok(Self { b, lambda, c })
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.b[0]
    }

    pub fn last(&self) -> f64 {
        self.b[self.b.len() - 1]
    }

    pub fn minimizers(&self) -> Vec<f64> {
        self.b
            .iter()
            .map(|&b| (b * self.lambda / self.c).ln() / self.lambda)
            .collect()
    }

    /// LWR solution from the extreme `b` values only.
    pub fn lwr_solution(&self) -> Result<f64, ExpLinearError> {
        if self.b.len() < 2 {
            return Err(ExpLinearError::Degenerate {
                need: 2,
                have: self.b.len(),
            });
        }
        let bbar = log_mean(self.first(), self.last());
        Ok((self.lambda * bbar / self.c).ln() / self.lambda)
    }

    /// Logarithmic mean of the extreme `b` values.
    pub fn equivalence_parameter(&self) -> Result<f64, ExpLinearError> {
        if self.b.len() < 2 {
            return Err(ExpLinearError::Degenerate {
                need: 2,
                have: self.b.len(),
            });
        }
        equivalence_parameter(self.first(), self.last())
    }

    pub fn cost_functions(&self) -> Vec<CostFunction> {
        self.b
            .iter()
            .map(|&b| CostFunction::ExpLinear {
                b,
                lambda: self.lambda,
                c: self.c,
            })
            .collect()
    }

    /// The family as a scenario set on the real line.
    pub fn to_scenario_set(&self) -> ScenarioSet {
        ScenarioSet::from_costs(self.cost_functions(), DecisionInterval::real_line())
            .expect("validated family parameters")
    }
}

/// `(bn - b1) / (ln bn - ln b1)`, evaluated without cancellation when close.
fn log_mean(b1: f64, bn: f64) -> f64 {
    let d = bn - b1;
    d / (d / b1).ln_1p()
}

pub fn minimizer(b: f64, lambda: f64, c: f64) -> Result<f64, ExpLinearError> {
    positive("b", b)?;
    positive("lambda", lambda)?;
    positive("c", c)?;
    Ok((b * lambda / c).ln() / lambda)
}

/// Regret of one scenario: cost minus its minimum over the real line.
pub fn regret_at(b: f64, lambda: f64, c: f64, x: f64) -> Result<f64, ExpLinearError> {
    positive("b", b)?;
    positive("lambda", lambda)?;
    positive("c", c)?;
    Ok(b * (-lambda * x).exp() + c * x - (c / lambda) * (1.0 + (b * lambda / c).ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftApproximations {
    /// Approximate minimizer of the largest-`b` scenario.
    pub last_minimizer: f64,
    /// Approximate LWR solution of the extreme pair.
    pub pair_solution: f64,
}

/// First-order approximations for `bn = b1 * (1 + d)` with small `d`; both
/// have error of order `d^2`. `c` fixes the first minimizer.
pub fn shift_approximations(
    b1: f64,
    d: f64,
    lambda: f64,
    c: f64,
) -> Result<ShiftApproximations, ExpLinearError> {
    positive("d", d)?;
    let x1 = minimizer(b1, lambda, c)?;
    Ok(ShiftApproximations {
        last_minimizer: x1 + d / lambda,
        pair_solution: x1 + d / (2.0 * lambda),
    })
}

/// The `b̄` for which Bayesian weights with `Σ p_i b_i = b̄` reproduce the
/// LWR solution; lies strictly between `b1` and `bn`.
pub fn equivalence_parameter(b1: f64, bn: f64) -> Result<f64, ExpLinearError> {
    positive("b1", b1)?;
    positive("bn", bn)?;
    if b1 >= bn {
        return Err(ExpLinearError::Unordered { index: 1, value: bn });
    }
    Ok(log_mean(b1, bn))
}
