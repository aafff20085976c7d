use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::scenario::DecisionInterval;
use crate::solve::ConvexObjective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairCase {
    /// One scenario is minimized at the solution and bounds all others.
    SingleScenario,
    /// An ascending and a descending scenario cross at the solution.
    Crossing,
}

/// Two scenarios that determine a minimax/LWR solution; `k == l` in the
/// single-scenario case. For a crossing, `k` rises through the solution and
/// `l` falls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremePair {
    pub k: usize,
    pub l: usize,
    pub case: PairCase,
}

/// Identifies the extreme pair at `solution` from one-sided slopes of the
/// active functions.
///
/// A function whose own minimizer over the interval is the solution gives
/// the single-scenario case. Otherwise each active function is strictly
/// rising or strictly falling through the solution, and a minimizer of the
/// maximum needs one of each. Slopes are read a distance `2 * tol` either
/// side of the solution so that solver error cannot flip a sign. Ties go to
/// the lowest id.
pub fn find_extreme_pair<O: ConvexObjective>(
    fs: &[O],
    interval: &DecisionInterval,
    solution: f64,
    active: &[usize],
    tol: f64,
) -> Result<ExtremePair, AnalysisError> {
    let h = 2.0 * tol;
    let (left_probe, right_probe) = (solution - h, solution + h);
    let at_lower = left_probe <= interval.lower();
    let at_upper = right_probe >= interval.upper();

    let mut active: Vec<usize> = active.to_vec();
    active.sort_unstable();

    let mut rising = None;
    let mut falling = None;
    for &i in &active {
        let left_ok = at_lower || fs[i].slopes(left_probe).0 <= 0.0;
        let right_ok = at_upper || fs[i].slopes(right_probe).1 >= 0.0;
        match (left_ok, right_ok) {
            (true, true) => {
                return Ok(ExtremePair {
                    k: i,
                    l: i,
                    case: PairCase::SingleScenario,
                })
            }
            (false, _) => {
                rising.get_or_insert(i);
            }
            (_, false) => {
                falling.get_or_insert(i);
            }
        }
    }
    match (rising, falling) {
        (Some(k), Some(l)) => Ok(ExtremePair {
            k,
            l,
            case: PairCase::Crossing,
        }),
        _ => Err(AnalysisError::CertificateFailure { solution }),
    }
}
