#![allow(dead_code)]

use lwr_core::exp_linear::ExpLinearFamily;
use lwr_core::scenario::{CostFunction, DecisionInterval, ScenarioSet};
use rand::Rng;

/// Log-uniform draw on `[lo, hi]`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

pub fn random_exp_linear<R: Rng>(rng: &mut R) -> CostFunction {
    CostFunction::exp_linear(
        log_uniform(rng, 0.2, 20.0),
        rng.gen_range(0.3..2.0),
        rng.gen_range(0.2..3.0),
    )
    .unwrap()
}

pub fn random_quadratic<R: Rng>(rng: &mut R) -> CostFunction {
    CostFunction::quadratic(
        rng.gen_range(0.2..4.0),
        rng.gen_range(-4.0..4.0),
        rng.gen_range(-10.0..10.0),
    )
    .unwrap()
}

/// Samples of a random quadratic on a jittered grid; chord slopes increase
/// strictly, so the minimizer is unique.
pub fn random_tabulated<R: Rng>(rng: &mut R) -> CostFunction {
    let curvature = rng.gen_range(0.5..3.0);
    let center = rng.gen_range(-3.0..3.0);
    let n = rng.gen_range(12..40);
    let (lo, hi) = (-12.0, 12.0);
    let step = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n)
        .map(|j| {
            let jitter = if j == 0 || j == n - 1 { 0.0 } else { rng.gen_range(-0.3..0.3) * step };
            lo + j as f64 * step + jitter
        })
        .collect();
    let ys = xs.iter().map(|x| curvature * (x - center) * (x - center)).collect();
    CostFunction::tabulated(xs, ys).unwrap()
}

pub fn random_piecewise<R: Rng>(rng: &mut R) -> CostFunction {
    let k = rng.gen_range(1..5);
    let mut bps: Vec<f64> = (0..k).map(|_| rng.gen_range(-5.0..5.0)).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let mut slope = -rng.gen_range(0.5..3.0);
    let mut slopes = vec![slope];
    for j in 0..bps.len() {
        slope += rng.gen_range(0.2..2.0);
        if j == bps.len() - 1 && slope <= 0.0 {
            slope = rng.gen_range(0.2..2.0);
        }
        slopes.push(slope);
    }
    CostFunction::piecewise_linear(bps, slopes, rng.gen_range(-5.0..5.0)).unwrap()
}

/// Strictly convex cost of a random variant.
pub fn random_strict<R: Rng>(rng: &mut R) -> CostFunction {
    match rng.gen_range(0..3) {
        0 => random_exp_linear(rng),
        1 => random_quadratic(rng),
        _ => random_tabulated(rng),
    }
}

pub fn random_interval<R: Rng>(rng: &mut R) -> DecisionInterval {
    match rng.gen_range(0..4) {
        0 => DecisionInterval::real_line(),
        1 => DecisionInterval::new(rng.gen_range(-6.0..0.0), f64::INFINITY).unwrap(),
        2 => DecisionInterval::new(f64::NEG_INFINITY, rng.gen_range(0.0..6.0)).unwrap(),
        _ => {
            let lo = rng.gen_range(-6.0..1.0);
            DecisionInterval::new(lo, lo + rng.gen_range(0.5..8.0)).unwrap()
        }
    }
}

pub fn random_strict_set<R: Rng>(rng: &mut R, min_n: usize, max_n: usize) -> ScenarioSet {
    let n = rng.gen_range(min_n..=max_n);
    let costs = (0..n).map(|_| random_strict(rng)).collect();
    ScenarioSet::from_costs(costs, random_interval(rng)).unwrap()
}

/// Common-decay family with `n` strictly increasing `b`.
pub fn random_family<R: Rng>(rng: &mut R, n: usize) -> ExpLinearFamily {
    loop {
        let mut b: Vec<f64> = (0..n).map(|_| log_uniform(rng, 0.1, 100.0)).collect();
        b.sort_by(f64::total_cmp);
        if b.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-6)) {
            return ExpLinearFamily::new(b, rng.gen_range(0.2..3.0), rng.gen_range(0.1..5.0)).unwrap();
        }
    }
}

pub fn random_simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Dense-grid argmin of `f` on `[lo, hi]` with the given step.
pub fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let n = ((hi - lo) / step).round() as usize;
    let mut best = (lo, f(lo));
    for j in 1..=n {
        let x = lo + j as f64 * step;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}
