//! Lebesgue measure of tube unions and the Bonferroni certificates built on it.
//!
//! Planar unions are measured exactly ([`exact_union_area_2d`]); in higher
//! dimension a seeded Monte Carlo estimator is used
//! ([`monte_carlo_union_volume`]).

mod bonferroni;
mod certificate;
mod exact2d;
mod index;
mod montecarlo;

pub use bonferroni::{bonferroni_lower_bound, bonferroni_lower_bound_with, slab_pair_bound, PairBound};
pub use certificate::{
    book_bound_certificate, dyadic_grid, l1_certificate, BookBoundConfig, BOUND_TOL, DEFAULT_SLACK, BookBoundReport, CertificateReport,
    L1Config,
};
pub use exact2d::{exact_union_area_2d, exact_union_area_2d_with, raster_bracket, Exact2dEngine};
pub use index::TubeIndex;
pub use montecarlo::{monte_carlo_union_volume, monte_carlo_union_volume_in, PackedTubes};

use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::geometry::Tube;

/// Default cap on the number of tubes the exact planar engine accepts.
pub const DEFAULT_TUBE_CAP: usize = 50_000;

/// The equi-angular schedule `angle_i = i·ε^α`, `i = 0..=⌊c/ε^α⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub alpha: f64,
    pub c: f64,
    pub eps: f64,
}

impl Schedule {
    pub fn new(alpha: f64, c: f64, eps: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(argument(format!("alpha must lie in (0,1), got {alpha}")));
        }
        if !(c > 0.0 && c <= std::f64::consts::TAU) {
            return Err(argument(format!("c must lie in (0, 2π], got {c}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(argument(format!("eps must lie in (0,1), got {eps}")));
        }
        Ok(Schedule { alpha, c, eps })
    }

    /// Angular step `ε^α`.
    pub fn step(&self) -> f64 {
        self.eps.powf(self.alpha)
    }

    /// `⌊c/ε^α⌋`, the largest index.
    pub fn last_index(&self) -> usize {
        (self.c / self.step()).floor() as usize
    }

    pub fn count(&self) -> usize {
        self.last_index() + 1
    }

    pub fn angle(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }
}

/// An ordered family of tubes, optionally carrying the angle schedule it was
/// built from. `angles[i]` is the directional angle of tube `i` (planar axis
/// angle, or page angle of its carrier hyperplane in higher dimension).
#[derive(Debug, Clone, PartialEq)]
pub struct TubeFamily {
    tubes: Vec<Tube>,
    schedule: Option<Schedule>,
    angles: Vec<f64>,
}

impl TubeFamily {
    /// A family with no schedule.
    pub fn from_tubes(tubes: Vec<Tube>) -> Result<Self> {
        if let Some(first) = tubes.first() {
            let n = first.dim();
            if tubes.iter().any(|t| t.dim() != n) {
                return Err(argument("tubes live in different dimensions"));
            }
        }
        Ok(TubeFamily { tubes, schedule: None, angles: Vec::new() })
    }

    pub(crate) fn scheduled(tubes: Vec<Tube>, schedule: Schedule, angles: Vec<f64>) -> Self {
        debug_assert_eq!(tubes.len(), angles.len());
        TubeFamily { tubes, schedule: Some(schedule), angles }
    }

    pub fn tubes(&self) -> &[Tube] {
        &self.tubes
    }

    pub fn schedule(&self) -> Option<&Schedule> {
        self.schedule.as_ref()
    }

    /// Directional angle of each tube; empty when unscheduled.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.tubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tubes.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.tubes.first().map(|t| t.dim())
    }

    /// Sum of the tube measures.
    pub fn total_measure(&self) -> f64 {
        self.tubes.iter().map(|t| t.measure()).sum()
    }

    /// A copy with one more tube appended; drops the schedule.
    pub fn with_tube(&self, t: Tube) -> Result<Self> {
        let mut tubes = self.tubes.clone();
        tubes.push(t);
        Self::from_tubes(tubes)
    }

    /// Every coordinate multiplied by `lambda` (widths and lengths included).
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        let tubes = self
            .tubes
            .iter()
            .map(|t| {
                let core = crate::geometry::Segment::new(
                    t.core().center() * lambda,
                    t.core().direction().clone(),
                    t.core().length() * lambda,
                )?;
                Tube::new(core, t.width() * lambda, t.frame().to_vec(), t.profile())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TubeFamily { tubes, schedule: None, angles: self.angles.clone() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Boundary-integral sweep over the planar arrangement.
    Exact2d,
    /// Certified inner/outer cell counts; `stderr` is the bracket half-width.
    Raster2d,
    Montecarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub stderr: f64,
    pub method: Method,
    pub samples: u64,
}

impl MeasureEstimate {
    pub fn exact(value: f64) -> Self {
        MeasureEstimate { value, stderr: 0.0, method: Method::Exact2d, samples: 0 }
    }
}
