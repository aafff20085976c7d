//! One-dimensional convex minimization over possibly unbounded intervals.
//!
//! The search works on the sign of the right derivative, which for a convex
//! function is `< 0` strictly left of the leftmost minimizer and `>= 0` from
//! it onwards. Bisection on that predicate resolves kinks exactly (the
//! pointwise maximum of a scenario family is kinked precisely at crossings)
//! and reaches the requested argument tolerance even where the objective is
//! too flat for value comparisons to discriminate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::DecisionInterval;

/// Default argument tolerance, in decision units.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Relative tolerance used to decide which functions attain a maximum.
pub const ACTIVITY_TOL: f64 = 1e-7;

/// Largest probe distance tried when expanding toward an infinite endpoint.
const EXPANSION_CAP: f64 = 81129638414606681695789005144064.0; // 2^106
const MAX_BISECTIONS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("objective is unbounded below (still decreasing at x = {probe})")]
    UnboundedBelow { probe: f64 },
    #[error("tolerance must be positive and finite (got {0})")]
    InvalidTolerance(f64),
    #[error("cannot minimize the maximum of an empty family")]
    EmptyFamily,
}

/// A convex function of one variable with one-sided derivatives.
pub trait ConvexObjective {
    fn value(&self, x: f64) -> f64;

    /// `(left, right)` derivatives at `x`; `left <= right`.
    fn slopes(&self, x: f64) -> (f64, f64);
}

impl<T: ConvexObjective + ?Sized> ConvexObjective for &T {
    fn value(&self, x: f64) -> f64 {
        (**self).value(x)
    }

    fn slopes(&self, x: f64) -> (f64, f64) {
        (**self).slopes(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub minimizer: f64,
    pub value: f64,
    pub iterations: usize,
    /// Final bracket; contains `minimizer`.
    pub bracket: (f64, f64),
}

/// Pointwise maximum of a family of convex functions.
#[derive(Debug, Clone, Copy)]
pub struct PointwiseMax<'a, F> {
    fs: &'a [F],
}

impl<'a, F: ConvexObjective> PointwiseMax<'a, F> {
    pub fn new(fs: &'a [F]) -> Result<Self, SolveError> {
        if fs.is_empty() {
            return Err(SolveError::EmptyFamily);
        }
        Ok(Self { fs })
    }

    /// Indices whose value is within the activity tolerance of the maximum.
    pub fn active_set(&self, x: f64) -> Vec<usize> {
        let values: Vec<f64> = self.fs.iter().map(|f| f.value(x)).collect();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = ACTIVITY_TOL * (1.0 + max.abs());
        values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= max - slack)
            .map(|(i, _)| i)
            .collect()
    }
}

impl<F: ConvexObjective> ConvexObjective for PointwiseMax<'_, F> {
    fn value(&self, x: f64) -> f64 {
        self.fs
            .iter()
            .map(|f| f.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn slopes(&self, x: f64) -> (f64, f64) {
        // Subdifferential of a max: extremes of the slopes of the functions
        // attaining it.
        let max = self.value(x);
        let mut left = f64::INFINITY;
        let mut right = f64::NEG_INFINITY;
        for f in self.fs {
            if f.value(x) == max {
                let (l, r) = f.slopes(x);
                left = left.min(l);
                right = right.max(r);
            }
        }
        (left, right)
    }
}

/// Minimizes a convex `f` over `interval`.
///
/// Returns the leftmost minimizer to within `tol`. Infinite endpoints are
/// handled by doubling probes (starting at distance 1) until the right
/// derivative changes sign.
pub fn minimize<F: ConvexObjective + ?Sized>(
    f: &F,
    interval: &DecisionInterval,
    tol: f64,
) -> Result<SolveResult, SolveError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SolveError::InvalidTolerance(tol));
    }
    let rising = |x: f64| f.slopes(x).1 >= 0.0;
    let at = |x: f64, iterations: usize| SolveResult {
        minimizer: x,
        value: f.value(x),
        iterations,
        bracket: (x, x),
    };

    let (lower, upper) = (interval.lower(), interval.upper());
    let mut iterations = 0;

    // Establish !rising(lo) and rising(hi).
    let (lo, hi) = match (lower.is_finite(), upper.is_finite()) {
        (true, true) => {
            if rising(lower) {
                return Ok(at(lower, 0));
            }
            if !rising(upper) {
                return Ok(at(upper, 0));
            }
            (lower, upper)
        }
        (true, false) => {
            if rising(lower) {
                return Ok(at(lower, 0));
            }
            expand_right(&rising, lower, &mut iterations)?
        }
        (false, true) => {
            if !rising(upper) {
                return Ok(at(upper, 0));
            }
            expand_left(&rising, upper, &mut iterations)?
        }
        (false, false) => {
            if rising(0.0) {
                expand_left(&rising, 0.0, &mut iterations)?
            } else {
                expand_right(&rising, 0.0, &mut iterations)?
            }
        }
    };

    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if rising(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(SolveResult {
        minimizer: hi,
        value: f.value(hi),
        iterations,
        bracket: (lo, hi),
    })
}

/// Walks right from `start` (where the function still descends) until it
/// rises. Returns `(last descending probe, first rising probe)`.
fn expand_right(
    rising: &impl Fn(f64) -> bool,
    start: f64,
    iterations: &mut usize,
) -> Result<(f64, f64), SolveError> {
    let mut lo = start;
    let mut step = 1.0;
    loop {
        let probe = start + step;
        *iterations += 1;
        if rising(probe) {
            return Ok((lo, probe));
        }
        lo = probe;
        step *= 2.0;
        if step > EXPANSION_CAP {
            return Err(SolveError::UnboundedBelow { probe });
        }
    }
}

/// Mirror of [`expand_right`]: walks left from a rising `start`.
fn expand_left(
    rising: &impl Fn(f64) -> bool,
    start: f64,
    iterations: &mut usize,
) -> Result<(f64, f64), SolveError> {
    let mut hi = start;
    let mut step = 1.0;
    loop {
        let probe = start - step;
        *iterations += 1;
        if !rising(probe) {
            return Ok((probe, hi));
        }
        hi = probe;
        step *= 2.0;
        if step > EXPANSION_CAP {
            return Err(SolveError::UnboundedBelow { probe });
        }
    }
}

/// Minimizes `x -> max_i fs[i](x)` and reports the active set at the
/// minimizer.
pub fn minimize_pointwise_max<F: ConvexObjective>(
    fs: &[F],
    interval: &DecisionInterval,
    tol: f64,
) -> Result<(SolveResult, Vec<usize>), SolveError> {
    let max = PointwiseMax::new(fs)?;
    let result = minimize(&max, interval, tol)?;
    let active = max.active_set(result.minimizer);
    Ok((result, active))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::CostFunction;
    use std::f64::consts::E;

    fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
        let n = ((hi - lo) / step).round() as usize;
        (0..=n)
            .map(|i| lo + i as f64 * step)
            .map(|x| (x, f(x)))
            .fold((f64::NAN, f64::INFINITY), |best, (x, v)| if v < best.1 { (x, v) } else { best })
    }

    #[test]
    fn vertex_of_quadratic() {
        let f = CostFunction::quadratic(1.0, 2.0, 0.0).unwrap();
        let r = minimize(&f, &DecisionInterval::real_line(), 1e-9).unwrap();
        assert!((r.minimizer - 2.0).abs() <= 1e-9);
        assert!(r.bracket.0 <= r.minimizer && r.minimizer <= r.bracket.1);
        assert!(r.bracket.1 - r.bracket.0 <= 1e-9);
    }

    #[test]
    fn exp_linear_minimizer_on_real_line() {
        let f = CostFunction::exp_linear(E, 1.0, 1.0).unwrap();
        let r = minimize(&f, &DecisionInterval::real_line(), 1e-9).unwrap();
        assert!((r.minimizer - 1.0).abs() <= 1e-9, "{}", r.minimizer);
    }

    #[test]
    fn kink_minimum() {
        let f = CostFunction::piecewise_linear(vec![0.0], vec![-1.0, 1.0], 0.0).unwrap();
        let r = minimize(&f, &DecisionInterval::new(-1.0, 3.0).unwrap(), 1e-9).unwrap();
        assert_eq!(r.minimizer, 0.0);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn unbounded_below() {
        let f = CostFunction::piecewise_linear(vec![0.0], vec![-1.0, -1.0], 0.0).unwrap();
        let err = minimize(&f, &DecisionInterval::new(0.0, f64::INFINITY).unwrap(), 1e-9);
        assert!(matches!(err, Err(SolveError::UnboundedBelow { .. })));
    }

    #[test]
    fn invalid_tolerance() {
        let f = CostFunction::quadratic(1.0, 0.0, 0.0).unwrap();
        let i = DecisionInterval::real_line();
        assert_eq!(minimize(&f, &i, 0.0), Err(SolveError::InvalidTolerance(0.0)));
        assert!(minimize(&f, &i, -1.0).is_err());
        assert!(minimize(&f, &i, f64::NAN).is_err());
    }

    #[test]
    fn boundary_minimizers() {
        let f = CostFunction::quadratic(1.0, 5.0, 0.0).unwrap();
        let r = minimize(&f, &DecisionInterval::new(-1.0, 3.0).unwrap(), 1e-9).unwrap();
        assert_eq!(r.minimizer, 3.0);
        let r = minimize(&f, &DecisionInterval::new(6.0, f64::INFINITY).unwrap(), 1e-9).unwrap();
        assert_eq!(r.minimizer, 6.0);
        let r = minimize(&f, &DecisionInterval::new(f64::NEG_INFINITY, 1.0).unwrap(), 1e-9).unwrap();
        assert_eq!(r.minimizer, 1.0);
        let r = minimize(&f, &DecisionInterval::new(f64::NEG_INFINITY, 10.0).unwrap(), 1e-9).unwrap();
        assert!((r.minimizer - 5.0).abs() <= 1e-9);
    }

    #[test]
    fn flat_minimum_returns_leftmost_point() {
        let f = CostFunction::piecewise_linear(vec![1.0, 4.0], vec![-1.0, 0.0, 2.0], 0.0).unwrap();
        let r = minimize(&f, &DecisionInterval::real_line(), 1e-9).unwrap();
        assert!((r.minimizer - 1.0).abs() <= 1e-9);
        let r = minimize(&f, &DecisionInterval::new(-3.0, 10.0).unwrap(), 1e-9).unwrap();
        assert!((r.minimizer - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn far_minimizer_is_found() {
        let f = CostFunction::quadratic(1e-6, -3.0e7, 1.0).unwrap();
        let r = minimize(&f, &DecisionInterval::real_line(), 1e-6).unwrap();
        assert!((r.minimizer + 3.0e7).abs() <= 1e-6);
    }

    #[test]
    fn pointwise_max_examples() {
        let single = [CostFunction::quadratic(1.0, 2.0, 0.0).unwrap()];
        let (r, active) = minimize_pointwise_max(&single, &DecisionInterval::real_line(), 1e-9).unwrap();
        let direct = minimize(&single[0], &DecisionInterval::real_line(), 1e-9).unwrap();
        assert_eq!(r, direct);
        assert_eq!(active, vec![0]);

        let pair = [
            CostFunction::quadratic(1.0, 0.0, 0.0).unwrap(),
            CostFunction::quadratic(1.0, 2.0, 1.0).unwrap(),
        ];
        let (r, active) = minimize_pointwise_max(&pair, &DecisionInterval::real_line(), 1e-9).unwrap();
        // grid oracle over [-1, 3]
        let (gx, gv) = grid_argmin(
            |x| (x * x).max((x - 2.0).powi(2) + 1.0),
            -1.0,
            3.0,
            1e-5,
        );
        assert!((gx - 1.25).abs() < 1e-5 && (gv - 1.5625).abs() < 1e-4);
        assert!((r.minimizer - 1.25).abs() <= 1e-9);
        assert!((r.value - 1.5625).abs() <= 1e-8);
        assert_eq!(active, vec![0, 1]);

        let dominated = [
            CostFunction::quadratic(1.0, 0.0, 0.0).unwrap(),
            CostFunction::quadratic(1.0, 0.0, 10.0).unwrap(),
        ];
        let (r, active) =
            minimize_pointwise_max(&dominated, &DecisionInterval::real_line(), 1e-9).unwrap();
        assert!(r.minimizer.abs() <= 1e-9);
        assert_eq!(active, vec![1]);
    }

    #[test]
    fn empty_family_is_rejected() {
        let none: [CostFunction; 0] = [];
        assert_eq!(
            minimize_pointwise_max(&none, &DecisionInterval::real_line(), 1e-9).unwrap_err(),
            SolveError::EmptyFamily
        );
    }

    #[test]
    fn deterministic() {
        let fs = [
            CostFunction::exp_linear(3.0, 0.7, 1.3).unwrap(),
            CostFunction::quadratic(0.4, 1.0, -2.0).unwrap(),
        ];
        let a = minimize_pointwise_max(&fs, &DecisionInterval::real_line(), 1e-9).unwrap();
        let b = minimize_pointwise_max(&fs, &DecisionInterval::real_line(), 1e-9).unwrap();
        assert_eq!(a.0.minimizer.to_bits(), b.0.minimizer.to_bits());
        assert_eq!(a, b);
    }
}
