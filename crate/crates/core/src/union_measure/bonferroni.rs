use std::f64::consts::{FRAC_PI_2, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TubeFamily;
use crate::error::{argument, Result};
use crate::geometry::{line_angle, Profile};
use crate::intersection::{tube_pair_intersection_area_2d, NEAR_PARALLEL};

/// How the pair term `|T_i ∩ T_j|` is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairBound {
    /// From the angle schedule alone, positions ignored.
    Schedule,
    /// Exact clipped planar areas.
    Exact,
    /// Strip-crossing formula from each pair's actual thin axes; pairs with
    /// disjoint bounding boxes contribute 0.
    SlabFormula,
}

/// Upper bound on the overlap of two slab pieces of widths `wi`, `wj` in ℝⁿ
/// whose thin axes cross at the acute angle `theta`.
///
/// The strips meet in a parallelogram of area `wi·wj/sin θ`. In ℝⁿ, n ≥ 3,
/// the overlap is that parallelogram times a hyperplane section of the unit
/// (n−1)-cube, and such sections have volume at most √2. Near-parallel pairs
/// return `None`.
pub fn slab_pair_bound(wi: f64, wj: f64, theta: f64, n: usize) -> Option<f64> {
    if theta < NEAR_PARALLEL {
        return None;
    }
    let section = if n >= 3 { SQRT_2 } else { 1.0 };
    Some(section * wi * wj / theta.sin())
}

/// `Σ|T_i| − Σ_{i<j} |T_i ∩ T_j|` with each pair term replaced by an upper
/// bound (never more than the smaller tube), clamped at 0.
///
/// Scheduled families use [`PairBound::Schedule`]; unscheduled planar
/// families use exact pair areas, higher-dimensional ones the slab formula.
pub fn bonferroni_lower_bound(f: &TubeFamily) -> f64 {
    let mode = if f.schedule().is_some() {
        PairBound::Schedule
    } else if f.dim() == Some(2) {
        PairBound::Exact
    } else {
        PairBound::SlabFormula
    };
    bonferroni_lower_bound_with(f, mode).expect("default pair bound applies to every family")
}

pub fn bonferroni_lower_bound_with(f: &TubeFamily, mode: PairBound) -> Result<f64> {
    let n = match f.dim() {
        None => return Ok(0.0),
        Some(n) => n,
    };
    let tubes = f.tubes();
    let measures: Vec<f64> = tubes.iter().map(|t| t.measure()).collect();
    let first_order: f64 = measures.iter().sum();

    if n > 2 && mode != PairBound::Exact && tubes.iter().any(|t| t.profile() == Profile::Rod) {
        return Err(argument("strip-crossing bounds need slab tubes"));
    }
    let pair_term = |i: usize, j: usize| -> Result<f64> {
        let cap = measures[i].min(measures[j]);
        let bound = match mode {
            PairBound::Schedule => {
                let s = f.schedule().ok_or_else(|| argument("family has no schedule"))?;
                let delta = (f.angles()[i] - f.angles()[j]).abs();
                schedule_pair_bound(s.eps, s.alpha, delta, n)
            }
            PairBound::Exact => {
                let (ai, bi) = tubes[i].aabb();
                let (aj, bj) = tubes[j].aabb();
                if disjoint(&ai, &bi, &aj, &bj) {
                    Some(0.0)
                } else {
                    Some(tube_pair_intersection_area_2d(&tubes[i], &tubes[j])?)
                }
            }
            PairBound::SlabFormula => {
                let (ai, bi) = tubes[i].aabb();
                let (aj, bj) = tubes[j].aabb();
                if disjoint(&ai, &bi, &aj, &bj) {
                    Some(0.0)
                } else {
                    let c = tubes[i].frame()[0].dot(tubes[j].frame()[0].as_vector()).abs();
                    slab_pair_bound(tubes[i].width(), tubes[j].width(), c.clamp(0.0, 1.0).acos(), n)
                }
            }
        };
        Ok(bound.map_or(cap, |b| b.min(cap)))
    };
    let rows: Vec<f64> = (0..tubes.len())
        .into_par_iter()
        .map(|i| ((i + 1)..tubes.len()).map(|j| pair_term(i, j)).sum::<Result<f64>>())
        .collect::<Result<_>>()?;
    let second_order: f64 = rows.iter().sum();
    Ok((first_order - second_order).max(0.0))
}

/// Pair bound from the schedule: tubes `k` steps apart have directional
/// angles differing by `delta = k·ε^α`. Up to π/2 this is the linearized
/// `(π/2) ε²/delta`; beyond, the exact `ε²/sin` of the acute crossing angle.
fn schedule_pair_bound(eps: f64, _alpha: f64, delta: f64, n: usize) -> Option<f64> {
    let theta = line_angle(delta);
    let section = if n >= 3 { SQRT_2 } else { 1.0 };
    if theta < NEAR_PARALLEL {
        None
    } else if delta <= FRAC_PI_2 {
        Some(section * FRAC_PI_2 * eps * eps / delta)
    } else {
        slab_pair_bound(eps, eps, theta, n)
    }
}

fn disjoint(ai: &[f64], bi: &[f64], aj: &[f64], bj: &[f64]) -> bool {
    (0..ai.len()).any(|k| bi[k] < aj[k] || bj[k] < ai[k])
}
