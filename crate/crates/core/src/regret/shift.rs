use serde::{Deserialize, Serialize};

use super::RegretProfile;
use crate::scenario::ScenarioSet;

/// Default sample count for shift detection.
pub const SHIFT_GRID_POINTS: usize = 101;

/// Regret functions that are translates `g(x - a_i)` of one shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftStructure {
    /// Scenario whose regret serves as the shape `g` (smallest minimizer).
    pub reference: usize,
    /// Offsets from the reference minimizer at which the shape is sampled.
    pub grid: Vec<f64>,
    pub shape: Vec<f64>,
    /// `a_i = x̂_i - x̂_reference`.
    pub shifts: Vec<f64>,
    pub max_deviation: f64,
}

/// Tests whether every regret is the reference regret translated by the
/// difference of minimizers.
///
/// Samples span the hull of the minimizers padded by one hull width on each
/// side (unit padding when all minimizers coincide). Returns `None` when the
/// worst deviation exceeds `tol * (1 + shape scale)`.
pub fn detect_argument_shift(
    set: &ScenarioSet,
    profile: &RegretProfile,
    grid_size: usize,
    tol: f64,
) -> Option<ShiftStructure> {
    let grid_size = grid_size.max(2);
    let xs = &profile.minimizers;
    let reference = (0..xs.len()).min_by(|&a, &b| xs[a].total_cmp(&xs[b]))?;
    let x_ref = xs[reference];
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo { hi - lo } else { 1.0 };
    let (start, end) = (lo - pad, hi + pad);
    let step = (end - start) / (grid_size - 1) as f64;
    let points: Vec<f64> = (0..grid_size).map(|j| start + j as f64 * step).collect();

    let shifts: Vec<f64> = xs.iter().map(|x| x - x_ref).collect();
    let mut max_deviation: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (i, a) in shifts.iter().enumerate() {
        for &x in &points {
            let shape = profile.regret(set, reference, x - a);
            let actual = profile.regret(set, i, x);
            scale = scale.max(shape.abs());
            max_deviation = max_deviation.max((actual - shape).abs());
        }
    }
    if max_deviation.is_nan() || max_deviation > tol * (1.0 + scale) {
        return None;
    }
    let grid: Vec<f64> = points.iter().map(|x| x - x_ref).collect();
    let shape = grid
        .iter()
        .map(|t| profile.regret(set, reference, x_ref + t))
        .collect();
    Some(ShiftStructure {
        reference,
        grid,
        shape,
        shifts,
        max_deviation,
    })
}
