//! Scenario model: decision intervals, convex cost curves and scenario sets.
//!
//! Every cost curve is convex on the whole real line, so the one-sided
//! derivatives returned by [`CostFunction::slopes`] are always ordered
//! `left <= right` and nondecreasing in `x`.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::solve::ConvexObjective;

/// Relative tolerance on chord-slope monotonicity for piecewise data.
pub const CONVEXITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid interval [{lower}, {upper}]: lower bound must be below upper bound")]
    InvalidInterval { lower: f64, upper: f64 },
    #[error("invalid cost function: {0}")]
    InvalidCost(String),
    #[error("invalid scenario set: {0}")]
    InvalidSet(ValidationReport),
}

/// A closed interval of the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionInterval {
    lower: f64,
    upper: f64,
}

impl DecisionInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self, ModelError> {
        if lower.is_nan()
            || upper.is_nan()
            || lower >= upper
            || lower == f64::INFINITY
            || upper == f64::NEG_INFINITY
        {
            return Err(ModelError::InvalidInterval { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    /// The whole real line.
    pub fn real_line() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn is_finite(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    /// True when `x` lies strictly between the endpoints.
    pub fn is_interior(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lower).min(self.upper)
    }

    /// True when `other` is contained in `self`.
    pub fn contains_interval(&self, other: &DecisionInterval) -> bool {
        other.lower >= self.lower && other.upper <= self.upper
    }
}

impl fmt::Display for DecisionInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

/// Interval endpoint as it appears on the wire: a number, `"-inf"` or `"+inf"`.
struct Bound(f64);

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("+inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct BoundVisitor;

        impl Visitor<'_> for BoundVisitor {
            type Value = Bound;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"-inf\" or \"+inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Bound, E> {
                Ok(Bound(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Bound, E> {
                Ok(Bound(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Bound, E> {
                Ok(Bound(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Bound, E> {
                match v {
                    "-inf" => Ok(Bound(f64::NEG_INFINITY)),
                    "+inf" | "inf" => Ok(Bound(f64::INFINITY)),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        d.deserialize_any(BoundVisitor)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalRepr {
    lower: Bound,
    upper: Bound,
}

impl Serialize for DecisionInterval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        IntervalRepr {
            lower: Bound(self.lower),
            upper: Bound(self.upper),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DecisionInterval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = IntervalRepr::deserialize(d)?;
        DecisionInterval::new(repr.lower.0, repr.upper.0).map_err(de::Error::custom)
    }
}

/// A convex cost curve over the decision variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostFunction {
    /// `b * exp(-lambda * x) + c * x`.
    ExpLinear { b: f64, lambda: f64, c: f64 },
    /// `curvature * (x - center)^2 + offset`.
    Quadratic {
        curvature: f64,
        center: f64,
        offset: f64,
    },
    /// Continuous piecewise-linear curve. `slopes[0]` applies left of the
    /// first breakpoint, `slopes[j + 1]` right of `breakpoints[j]`; `anchor`
    /// is the value at the first breakpoint.
    PiecewiseLinear {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        anchor: f64,
    },
    /// Sampled curve, linearly interpolated and extrapolated with the end
    /// chord slopes.
    #[serde(rename = "tabulated")]
    TabulatedConvex { x: Vec<f64>, y: Vec<f64> },
}

impl CostFunction {
    pub fn exp_linear(b: f64, lambda: f64, c: f64) -> Result<Self, ModelError> {
        Self::checked(CostFunction::ExpLinear { b, lambda, c })
    }

    pub fn quadratic(curvature: f64, center: f64, offset: f64) -> Result<Self, ModelError> {
        Self::checked(CostFunction::Quadratic {
            curvature,
            center,
            offset,
        })
    }

    pub fn piecewise_linear(
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        anchor: f64,
    ) -> Result<Self, ModelError> {
        Self::checked(CostFunction::PiecewiseLinear {
            breakpoints,
            slopes,
            anchor,
        })
    }

    pub fn tabulated(x: Vec<f64>, y: Vec<f64>) -> Result<Self, ModelError> {
        Self::checked(CostFunction::TabulatedConvex { x, y })
    }

    fn checked(f: CostFunction) -> Result<Self, ModelError> {
        match f.problems().into_iter().next() {
            Some(p) => Err(ModelError::InvalidCost(p.to_string())),
            None => Ok(f),
        }
    }

    /// Short name of the variant, matching the `kind` tag on the wire.
    pub fn kind(&self) -> &'static str {
        match self {
            CostFunction::ExpLinear { .. } => "exp_linear",
            CostFunction::Quadratic { .. } => "quadratic",
            CostFunction::PiecewiseLinear { .. } => "piecewise_linear",
            CostFunction::TabulatedConvex { .. } => "tabulated",
        }
    }

    /// Cost at `x`.
    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            CostFunction::ExpLinear { b, lambda, c } => b * (-lambda * x).exp() + c * x,
            CostFunction::Quadratic {
                curvature,
                center,
                offset,
            } => {
                let dx = x - center;
                curvature * dx * dx + offset
            }
            CostFunction::PiecewiseLinear {
                breakpoints,
                slopes,
                anchor,
            } => {
                let first = breakpoints[0];
                if x <= first {
                    return anchor + slopes[0] * (x - first);
                }
                let mut value = *anchor;
                for (j, &t) in breakpoints.iter().enumerate() {
                    let next = breakpoints.get(j + 1).copied().unwrap_or(f64::INFINITY);
                    let s = slopes[j + 1];
                    if x <= next {
                        return value + s * (x - t);
                    }
                    value += s * (next - t);
                }
                value
            }
            CostFunction::TabulatedConvex { x: xs, y: ys } => {
                let n = xs.len();
                // segment index j covers [xs[j], xs[j + 1]]
                let j = xs.partition_point(|&xi| xi <= x).clamp(1, n - 1) - 1;
                let slope = (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
                ys[j] + slope * (x - xs[j])
            }
        }
    }

    /// One-sided derivatives `(left, right)` at `x`.
    pub fn slopes(&self, x: f64) -> (f64, f64) {
        match self {
            CostFunction::ExpLinear { b, lambda, c } => {
                let d = c - b * lambda * (-lambda * x).exp();
                (d, d)
            }
            CostFunction::Quadratic {
                curvature, center, ..
            } => {
                let d = 2.0 * curvature * (x - center);
                (d, d)
            }
            CostFunction::PiecewiseLinear {
                breakpoints,
                slopes,
                ..
            } => {
                let j = breakpoints.partition_point(|&t| t < x);
                if breakpoints.get(j) == Some(&x) {
                    (slopes[j], slopes[j + 1])
                } else {
                    (slopes[j], slopes[j])
                }
            }
            CostFunction::TabulatedConvex { x: xs, y: ys } => {
                let n = xs.len();
                let chord = |j: usize| (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
                let j = xs.partition_point(|&xi| xi < x);
                if j < n && xs[j] == x {
                    let left = chord(j.saturating_sub(1).min(n - 2));
                    let right = chord(j.min(n - 2));
                    (left, right)
                } else {
                    let s = chord(j.clamp(1, n - 1) - 1);
                    (s, s)
                }
            }
        }
    }

    /// Everything wrong with this curve; empty when well-formed.
    pub fn problems(&self) -> Vec<CostProblem> {
        let mut out = Vec::new();
        match self {
            CostFunction::ExpLinear { b, lambda, c } => {
                for (name, v) in [("b", b), ("lambda", lambda), ("c", c)] {
                    if !(v.is_finite() && *v > 0.0) {
                        out.push(CostProblem::NonPositive { field: name, value: *v });
                    }
                }
            }
            CostFunction::Quadratic {
                curvature,
                center,
                offset,
            } => {
                if !(curvature.is_finite() && *curvature > 0.0) {
                    out.push(CostProblem::NonPositive {
                        field: "curvature",
                        value: *curvature,
                    });
                }
                for (name, v) in [("center", center), ("offset", offset)] {
                    if !v.is_finite() {
                        out.push(CostProblem::NonFinite { field: name });
                    }
                }
            }
            CostFunction::PiecewiseLinear {
                breakpoints,
                slopes,
                anchor,
            } => {
                if breakpoints.is_empty() {
                    out.push(CostProblem::TooFewPoints { field: "breakpoints", need: 1 });
                }
                if slopes.len() != breakpoints.len() + 1 {
                    out.push(CostProblem::LengthMismatch {
                        expected: breakpoints.len() + 1,
                        found: slopes.len(),
                    });
                }
                if !anchor.is_finite() {
                    out.push(CostProblem::NonFinite { field: "anchor" });
                }
                if breakpoints.iter().chain(slopes).any(|v| !v.is_finite()) {
                    out.push(CostProblem::NonFinite { field: "breakpoints/slopes" });
                }
                if let Some(j) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
                    out.push(CostProblem::NotIncreasing { index: j + 1 });
                }
                if let Some(j) = slopes.windows(2).position(|w| w[1] < w[0]) {
                    out.push(CostProblem::Nonconvex { index: j });
                }
            }
            CostFunction::TabulatedConvex { x, y } => {
                if x.len() < 2 {
                    out.push(CostProblem::TooFewPoints { field: "x", need: 2 });
                }
                if x.len() != y.len() {
                    out.push(CostProblem::LengthMismatch {
                        expected: x.len(),
                        found: y.len(),
                    });
                }
                if x.iter().chain(y).any(|v| !v.is_finite()) {
                    out.push(CostProblem::NonFinite { field: "x/y" });
                }
                if let Some(j) = x.windows(2).position(|w| w[0] >= w[1]) {
                    out.push(CostProblem::NotIncreasing { index: j + 1 });
                }
                if out.is_empty() {
                    let chords: Vec<f64> = x
                        .windows(2)
                        .zip(y.windows(2))
                        .map(|(xw, yw)| (yw[1] - yw[0]) / (xw[1] - xw[0]))
                        .collect();
                    for (j, w) in chords.windows(2).enumerate() {
                        let slack = CONVEXITY_TOL * w[0].abs().max(w[1].abs());
                        if w[1] < w[0] - slack {
                            // the sample where the chord slope drops
                            out.push(CostProblem::Nonconvex { index: j + 1 });
                        }
                    }
                }
            }
        }
        out
    }
}

impl ConvexObjective for CostFunction {
    fn value(&self, x: f64) -> f64 {
        self.evaluate(x)
    }

    fn slopes(&self, x: f64) -> (f64, f64) {
        CostFunction::slopes(self, x)
    }
}

/// A single defect in a cost curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "problem", rename_all = "snake_case")]
pub enum CostProblem {
    NonPositive { field: &'static str, value: f64 },
    NonFinite { field: &'static str },
    TooFewPoints { field: &'static str, need: usize },
    LengthMismatch { expected: usize, found: usize },
    NotIncreasing { index: usize },
    /// Slopes decrease at this breakpoint or sample index.
    Nonconvex { index: usize },
}

impl fmt::Display for CostProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostProblem::NonPositive { field, value } => {
                write!(f, "`{field}` must be positive and finite (got {value})")
            }
            CostProblem::NonFinite { field } => write!(f, "`{field}` must be finite"),
            CostProblem::TooFewPoints { field, need } => {
                write!(f, "`{field}` needs at least {need} entries")
            }
            CostProblem::LengthMismatch { expected, found } => {
                write!(f, "expected {expected} entries, found {found}")
            }
            CostProblem::NotIncreasing { index } => {
                write!(f, "abscissae not strictly increasing at index {index}")
            }
            CostProblem::Nonconvex { index } => {
                write!(f, "convexity violated at index {index}: slopes decrease")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: usize,
    pub name: String,
    pub cost: CostFunction,
}

impl Scenario {
    pub fn new(id: usize, name: impl Into<String>, cost: CostFunction) -> Self {
        Self {
            id,
            name: name.into(),
            cost,
        }
    }
}

/// Scenarios plus the decision interval they are analysed over.
///
/// Deserialization does not validate; call [`ScenarioSet::validate`] before
/// analysis. [`ScenarioSet::new`] validates eagerly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSet {
    pub interval: DecisionInterval,
    pub scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<Scenario>, interval: DecisionInterval) -> Result<Self, ModelError> {
        let set = Self {
            interval,
            scenarios,
        };
        let report = set.validate();
        if report.is_empty() {
            Ok(set)
        } else {
            Err(ModelError::InvalidSet(report))
        }
    }

    /// Builds a set with ids `0..n` and names `s0, s1, ...`.
    pub fn from_costs(costs: Vec<CostFunction>, interval: DecisionInterval) -> Result<Self, ModelError> {
        let scenarios = costs
            .into_iter()
            .enumerate()
            .map(|(i, c)| Scenario::new(i, format!("s{i}"), c))
            .collect();
        Self::new(scenarios, interval)
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn costs(&self) -> Vec<&CostFunction> {
        self.scenarios.iter().map(|s| &s.cost).collect()
    }

    /// Subset containing the given ids, renumbered from 0 in the given order.
    pub fn subset(&self, ids: &[usize]) -> Self {
        let scenarios = ids
            .iter()
            .enumerate()
            .map(|(new_id, &id)| {
                let s = &self.scenarios[id];
                Scenario::new(new_id, s.name.clone(), s.cost.clone())
            })
            .collect();
        Self {
            interval: self.interval,
            scenarios,
        }
    }

    /// Same scenarios over a different interval.
    pub fn with_interval(&self, interval: DecisionInterval) -> Self {
        Self {
            interval,
            scenarios: self.scenarios.clone(),
        }
    }

    /// Lists every defect; an empty report means all downstream
    /// preconditions hold.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.scenarios.is_empty() {
            violations.push(Violation::EmptySet);
        }
        let mut seen = vec![false; self.scenarios.len()];
        for (pos, s) in self.scenarios.iter().enumerate() {
            match seen.get_mut(s.id) {
                Some(true) => violations.push(Violation::DuplicateId { id: s.id }),
                Some(slot) => *slot = true,
                None => {}
            }
            if s.id != pos && !violations.contains(&Violation::DuplicateId { id: s.id }) {
                violations.push(Violation::IdOutOfOrder {
                    position: pos,
                    id: s.id,
                });
            }
            for problem in s.cost.problems() {
                violations.push(Violation::Cost {
                    scenario: pos,
                    problem,
                });
            }
        }
        ValidationReport { violations }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    EmptySet,
    DuplicateId { id: usize },
    /// Ids must equal positions `0..n`.
    IdOutOfOrder { position: usize, id: usize },
    Cost { scenario: usize, problem: CostProblem },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptySet => write!(f, "scenarios: at least one scenario is required"),
            Violation::DuplicateId { id } => write!(f, "scenarios: duplicate id {id}"),
            Violation::IdOutOfOrder { position, id } => write!(
                f,
                "scenarios[{position}].id: ids must be contiguous from 0 in order (got {id})"
            ),
            Violation::Cost { scenario, problem } => {
                write!(f, "scenarios[{scenario}].cost: {problem}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
