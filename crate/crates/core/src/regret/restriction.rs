use serde::{Deserialize, Serialize};

use super::{regret_profile, solve_lwr_with_profile, AnalysisError, RegretProfile};
use crate::scenario::{DecisionInterval, ScenarioSet};

/// Grid size used when searching for a preference-reversal witness.
pub const WITNESS_GRID_POINTS: usize = 101;

/// How restricting the decision interval moves an LWR analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictionReport {
    pub full_solution: f64,
    pub restricted_solution: f64,
    /// Scenarios whose regret offset differs between the two intervals.
    pub changed_offsets: Vec<usize>,
    /// Two admissible decisions whose worst-regret ordering flips between
    /// the full-interval and restricted offsets.
    pub reversal: Option<(f64, f64)>,
}

/// Recomputes regret offsets on `sub` and compares the two LWR analyses.
pub fn restriction_effect(
    set: &ScenarioSet,
    sub: &DecisionInterval,
    tol: f64,
) -> Result<RestrictionReport, AnalysisError> {
    if !set.interval.contains_interval(sub) || *sub == set.interval {
        return Err(AnalysisError::InvalidArgument(format!(
            "{sub} is not a strict sub-interval of {}",
            set.interval
        )));
    }
    let full_profile = regret_profile(set, tol)?;
    let full = solve_lwr_with_profile(set, &full_profile, tol)?;
    let restricted_set = set.with_interval(*sub);
    let sub_profile = regret_profile(&restricted_set, tol)?;
    let restricted = solve_lwr_with_profile(&restricted_set, &sub_profile, tol)?;

    let changed_offsets = full_profile
        .minima
        .iter()
        .zip(&sub_profile.minima)
        .enumerate()
        .filter(|(_, (a, b))| (*a - *b).abs() > 1e-9 * (1.0 + a.abs()))
        .map(|(i, _)| i)
        .collect();

    let (lo, hi) = witness_window(sub, &full_profile, &[full.solution, restricted.solution]);
    let reversal = find_reversal(set, &full_profile, &sub_profile, lo, hi);

    Ok(RestrictionReport {
        full_solution: full.solution,
        restricted_solution: restricted.solution,
        changed_offsets,
        reversal,
    })
}

/// Finite search window inside `sub`; infinite ends are cut at the hull of
/// the interesting points padded by its width.
fn witness_window(sub: &DecisionInterval, profile: &RegretProfile, extra: &[f64]) -> (f64, f64) {
    let pts = || profile.minimizers.iter().chain(extra).copied();
    let lo = pts().fold(f64::INFINITY, f64::min);
    let hi = pts().fold(f64::NEG_INFINITY, f64::max);
    let pad = (hi - lo).max(1.0);
    let start = if sub.lower().is_finite() { sub.lower() } else { lo - pad };
    let end = if sub.upper().is_finite() { sub.upper() } else { hi + pad };
    (start, end.max(start))
}

fn find_reversal(
    set: &ScenarioSet,
    full: &RegretProfile,
    restricted: &RegretProfile,
    lo: f64,
    hi: f64,
) -> Option<(f64, f64)> {
    let n = WITNESS_GRID_POINTS;
    let step = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|j| lo + j as f64 * step).collect();
    let worst = |p: &RegretProfile, x: f64| super::worst_regret(set, p, x);
    let wf: Vec<f64> = grid.iter().map(|&x| worst(full, x)).collect();
    let ws: Vec<f64> = grid.iter().map(|&x| worst(restricted, x)).collect();
    let scale = wf.iter().chain(&ws).fold(0.0f64, |m, v| m.max(v.abs()));
    let margin = 1e-9 * (1.0 + scale);
    for a in 0..n {
        for b in a + 1..n {
            let df = wf[a] - wf[b];
            let ds = ws[a] - ws[b];
            if (df > margin && ds < -margin) || (df < -margin && ds > margin) {
                return Some((grid[a], grid[b]));
            }
        }
    }
    None
}
