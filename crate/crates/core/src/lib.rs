//! Decision analysis over a finite set of scenarios, each described by a
//! convex cost of one real decision variable.
//!
//! Supports minimax cost, least-worst-regret (LWR) and Bayesian expected
//! cost, with closed forms for exponential-plus-linear families and a
//! capacity-procurement model built on them.

pub mod bayes;
pub mod capacity;
pub mod exp_linear;
pub mod regret;
pub mod scenario;
pub mod solve;

pub use bayes::{solve_bayes, ProbabilityVector};
pub use regret::{solve, AnalysisError, AnalysisOutcome, Criterion};
pub use scenario::{CostFunction, DecisionInterval, ModelError, Scenario, ScenarioSet};
pub use solve::{minimize, ConvexObjective, SolveError, SolveResult, DEFAULT_TOL};
