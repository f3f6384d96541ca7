//! Box-counting dimension of point and segment collections.
//!
//! Cells are half-open, `[kδ, (k+1)δ)` on every axis, with the grid anchored
//! at the origin. A segment meets exactly the cells holding one of its
//! points; those are enumerated by walking the grid, never by sampling.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::fit::linear_fit;
use crate::geometry::{Point, Segment, MAX_DIM};

/// Coarsest scales dropped from a fit by default.
pub const DEFAULT_EXCLUDE_COARSEST: usize = 2;
/// Fewest scales a fit accepts.
pub const MIN_FIT_SCALES: usize = 4;
/// Above this many cells in the bounding box, counts use sorted keys
/// instead of a bitset.
const DENSE_CELL_LIMIT: u128 = 1 << 28;
/// Crossing times closer than this (relative) are one event.
const TIE_TOL: f64 = 1e-12;
const CHUNK: usize = 256;

/// Points and closed segments in ℝⁿ.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Collection {
    pub points: Vec<Point>,
    pub segments: Vec<Segment>,
}

impl Collection {
    pub fn from_points(points: Vec<Point>) -> Self {
        Collection { points, segments: Vec::new() }
    }

    pub fn from_segments(segments: Vec<Segment>) -> Self {
        Collection { points: Vec::new(), segments }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.segments.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(|p| p.len()).or_else(|| self.segments.first().map(|s| s.dim()))
    }

    /// Every coordinate shifted by `v`.
    pub fn translated(&self, v: &Point) -> Self {
        Collection {
            points: self.points.iter().map(|p| p + v).collect(),
            segments: self.segments.iter().map(|s| s.translated(v)).collect(),
        }
    }

    fn check(&self) -> Result<usize> {
        let n = self.dim().ok_or_else(|| argument("empty collection"))?;
        if n == 0 || n > MAX_DIM {
            return Err(argument(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        let finite = |p: &Point| p.iter().all(|x| x.is_finite());
        for p in &self.points {
            crate::error::check_dim(n, p.len())?;
            if !finite(p) {
                return Err(argument("unbounded collection"));
            }
        }
        for s in &self.segments {
            crate::error::check_dim(n, s.dim())?;
            let (a, b) = s.endpoints();
            if !finite(&a) || !finite(&b) {
                return Err(argument("unbounded collection"));
            }
        }
        Ok(n)
    }
}

/// Cell range of the collection at scale `delta` and the key layout.
struct Layout {
    n: usize,
    delta: f64,
    lo: [i64; MAX_DIM],
    shape: [u128; MAX_DIM],
    total: u128,
}

impl Layout {
    fn new(c: &Collection, n: usize, delta: f64) -> Result<Self> {
        let mut lo = [i64::MAX; MAX_DIM];
        let mut hi = [i64::MIN; MAX_DIM];
        let mut include = |p: &Point| {
            for k in 0..n {
                let i = (p[k] / delta).floor() as i64;
                lo[k] = lo[k].min(i);
                hi[k] = hi[k].max(i);
            }
        };
        c.points.iter().for_each(&mut include);
        for s in &c.segments {
            let (a, b) = s.endpoints();
            include(&a);
            include(&b);
        }
        let mut shape = [1u128; MAX_DIM];
        let mut total: u128 = 1;
        for k in 0..n {
            shape[k] = (hi[k] - lo[k] + 1) as u128;
            total = total
                .checked_mul(shape[k])
                .filter(|t| t.leading_zeros() > 8)
                .ok_or(Error::Capacity { what: "grid cells", got: usize::MAX, cap: usize::MAX })?;
        }
        Ok(Layout { n, delta, lo, shape, total })
    }

    #[inline]
    fn key(&self, cell: &[i64; MAX_DIM]) -> u128 {
        let mut key = 0u128;
        for k in (0..self.n).rev() {
            // walks may overshoot the endpoint range by rounding; clamp
            let off = (cell[k] - self.lo[k]).clamp(0, self.shape[k] as i64 - 1) as u128;
            key = key * self.shape[k] + off;
        }
        key
    }

    fn cell_of(&self, p: &Point) -> [i64; MAX_DIM] {
        let mut c = [0i64; MAX_DIM];
        for k in 0..self.n {
            c[k] = (p[k] / self.delta).floor() as i64;
        }
        c
    }

    /// Calls `emit` with every cell meeting the closed segment.
    fn walk(&self, s: &Segment, emit: &mut impl FnMut(&[i64; MAX_DIM])) {
        let n = self.n;
        let (a, b) = s.endpoints();
        let mut cur = self.cell_of(&a);
        let end = self.cell_of(&b);
        emit(&cur);
        // per axis: direction, next boundary index, crossings left
        let mut step = [0i64; MAX_DIM];
        let mut next = [0i64; MAX_DIM];
        let mut left = [0i64; MAX_DIM];
        for k in 0..n {
            let d = end[k] - cur[k];
            step[k] = d.signum();
            left[k] = d.abs();
            // positive moves cross (i+1)δ, negative ones cross iδ
            next[k] = if d > 0 { cur[k] + 1 } else { cur[k] };
        }
        let time = |k: usize, idx: i64| (idx as f64 * self.delta - a[k]) / (b[k] - a[k]);
        loop {
            let mut t_min = f64::INFINITY;
            for k in 0..n {
                if left[k] > 0 {
                    t_min = t_min.min(time(k, next[k]));
                }
            }
            if !t_min.is_finite() {
                break;
            }
            let tol = TIE_TOL * t_min.abs().max(1.0);
            let due = |k: usize| left[k] > 0 && time(k, next[k]) <= t_min + tol;
            let mut tied = [false; MAX_DIM];
            for (k, slot) in tied.iter_mut().enumerate().take(n) {
                *slot = due(k);
            }
            // at a shared crossing time the point first enters every cell
            // ahead on positive axes, then leaves on negative ones
            let mut moved = false;
            for k in 0..n {
                if tied[k] && step[k] > 0 {
                    cur[k] += 1;
                    next[k] += 1;
                    left[k] -= 1;
                    moved = true;
                }
            }
            if moved {
                emit(&cur);
            }
            moved = false;
            for k in 0..n {
                if tied[k] && step[k] < 0 {
                    cur[k] -= 1;
                    next[k] -= 1;
                    left[k] -= 1;
                    moved = true;
                }
            }
            if moved {
                emit(&cur);
            }
        }
    }
}

/// Number of grid cells of side `delta` meeting the collection.
pub fn box_count(c: &Collection, delta: f64) -> Result<u64> {
    let n = c.check()?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(argument(format!("delta must be positive, got {delta}")));
    }
    let layout = Layout::new(c, n, delta)?;
    if layout.total <= DENSE_CELL_LIMIT {
        count_dense(c, &layout)
    } else {
        count_sparse(c, &layout)
    }
}

fn count_dense(c: &Collection, layout: &Layout) -> Result<u64> {
    let words: Vec<AtomicU64> = (0..layout.total.div_ceil(64)).map(|_| AtomicU64::new(0)).collect();
    let set = |cell: &[i64; MAX_DIM]| {
        let key = layout.key(cell);
        words[(key / 64) as usize].fetch_or(1 << (key % 64), Ordering::Relaxed);
    };
    c.points.par_chunks(CHUNK).for_each(|ch| ch.iter().for_each(|p| set(&layout.cell_of(p))));
    c.segments.par_chunks(CHUNK).for_each(|ch| {
        let mut emit = |cell: &[i64; MAX_DIM]| set(cell);
        ch.iter().for_each(|s| layout.walk(s, &mut emit));
    });
    Ok(words.iter().map(|w| w.load(Ordering::Relaxed).count_ones() as u64).sum())
}

fn count_sparse(c: &Collection, layout: &Layout) -> Result<u64> {
    let mut keys: Vec<u128> = c.points.par_iter().map(|p| layout.key(&layout.cell_of(p))).collect();
    let seg_keys: Vec<Vec<u128>> = c
        .segments
        .par_chunks(CHUNK)
        .map(|ch| {
            let mut out = Vec::new();
            let mut emit = |cell: &[i64; MAX_DIM]| out.push(layout.key(cell));
            ch.iter().for_each(|s| layout.walk(s, &mut emit));
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    keys.extend(seg_keys.into_iter().flatten());
    keys.par_sort_unstable();
    keys.dedup();
    Ok(keys.len() as u64)
}

/// `N(δ)` over a decreasing list of scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountSeries {
    pub deltas: Vec<f64>,
    pub counts: Vec<u64>,
}

pub fn box_count_series(c: &Collection, deltas: &[f64]) -> Result<BoxCountSeries> {
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(argument("deltas must be strictly decreasing"));
    }
    let counts = deltas.par_iter().map(|&d| box_count(c, d)).collect::<Result<Vec<_>>>()?;
    Ok(BoxCountSeries { deltas: deltas.to_vec(), counts })
}

/// Dyadic scales `2^-from, …, 2^-to`.
pub fn dyadic_deltas(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub scales: usize,
}

/// Least-squares slope of `log N` against `log(1/δ)`, dropping the two
/// coarsest scales.
pub fn dimension_fit(series: &BoxCountSeries) -> Result<DimensionFit> {
    dimension_fit_with(series, DEFAULT_EXCLUDE_COARSEST)
}

pub fn dimension_fit_with(series: &BoxCountSeries, exclude_coarsest: usize) -> Result<DimensionFit> {
    if series.deltas.len() != series.counts.len() {
        return Err(argument("series lengths differ"));
    }
    let used = series.deltas.len().saturating_sub(exclude_coarsest);
    if used < MIN_FIT_SCALES {
        return Err(argument(format!("need at least {MIN_FIT_SCALES} scales in the fit, got {used}")));
    }
    let d = &series.deltas[exclude_coarsest..];
    let xs: Vec<f64> = d.iter().map(|d| -d.ln()).collect();
    let ys: Vec<f64> = series.counts[exclude_coarsest..].iter().map(|&c| (c as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    Ok(DimensionFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        delta_min: d.iter().cloned().fold(f64::INFINITY, f64::min),
        delta_max: d.iter().cloned().fold(0.0, f64::max),
        scales: used,
    })
}

/// Sets of known dimension for calibrating the estimator.
pub mod corpus {
    use super::Collection;
    use crate::geometry::{point, Point, Segment};

    pub fn single_point(n: usize) -> Collection {
        Collection::from_points(vec![Point::from_element(n, 0.3)])
    }

    /// `[0,1] × {0}`.
    pub fn unit_segment() -> Collection {
        Collection::from_segments(vec![Segment::from_endpoints(&point(&[0.0, 0.0]), &point(&[1.0, 0.0])).unwrap()])
    }

    /// `[0,1)²` as horizontal segments `2^-level` apart; every cell of side
    /// at least `2^-level` is met.
    pub fn filled_square(level: i32) -> Collection {
        let rows = 1usize << level;
        let h = 1.0 / rows as f64;
        let right = 1.0 - h / 4.0;
        Collection::from_segments(
            (0..rows)
                .map(|k| {
                    let y = (k as f64 + 0.5) * h;
                    Segment::from_endpoints(&point(&[0.0, y]), &point(&[right, y])).unwrap()
                })
                .collect(),
        )
    }

    /// Level-`level` approximation of the dust keeping subsquares (0,1),
    /// (1,0), (2,3), (3,2) of a 4×4 grid, one point per kept square. Its
    /// dimension is 1 and `N(2^-m) = 2^m` for `m ≤ 2·level`.
    pub fn cantor_dust(level: u32) -> Collection {
        const KEEP: [(u32, u32); 4] = [(0, 1), (1, 0), (2, 3), (3, 2)];
        let mut squares = vec![(0.0f64, 0.0f64)];
        let mut side = 1.0;
        for _ in 0..level {
            side /= 4.0;
            squares = squares
                .iter()
                .flat_map(|&(x, y)| KEEP.iter().map(move |&(i, j)| (x + i as f64 * side, y + j as f64 * side)))
                .collect();
        }
        Collection::from_points(squares.into_iter().map(|(x, y)| point(&[x + side / 2.0, y + side / 2.0])).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;

    fn seg(a: &[f64], b: &[f64]) -> Segment {
        Segment::from_endpoints(&point(a), &point(b)).unwrap()
    }

    #[test]
    fn unit_segment_quarter_cells() {
        assert_eq!(box_count(&corpus::unit_segment(), 0.25).unwrap(), 5);
    }

    #[test]
    fn single_point_one_cell() {
        assert_eq!(box_count(&corpus::single_point(3), 0.01).unwrap(), 1);
    }

    #[test]
    fn empty_collection_errors() {
        assert!(box_count(&Collection::default(), 0.1).is_err());
        assert!(box_count(&corpus::single_point(2), 0.0).is_err());
    }

    #[test]
    fn diagonal_through_corners() {
        // passes exactly through grid corners: only diagonal cells are met
        assert_eq!(box_count(&Collection::from_segments(vec![seg(&[0.01, 0.01], &[0.99, 0.99])]), 0.25).unwrap(), 4);
        // descending diagonal: each corner point lies in a cell of its own,
        // (0,3) (1,3) (1,2) (2,2) (2,1) (3,1) (3,0)
        let down = Collection::from_segments(vec![seg(&[0.1, 0.9], &[0.9, 0.1])]);
        assert_eq!(box_count(&down, 0.25).unwrap(), 7);
    }

    /// Cells whose closed box the segment crosses on a parameter interval of
    /// positive length; equals the walk for segments in general position.
    fn brute(s: &Segment, delta: f64) -> u64 {
        let (a, b) = s.endpoints();
        let n = a.len();
        let lo: Vec<i64> = (0..n).map(|k| (a[k].min(b[k]) / delta).floor() as i64).collect();
        let hi: Vec<i64> = (0..n).map(|k| (a[k].max(b[k]) / delta).floor() as i64).collect();
        let mut cell = lo.clone();
        let mut count = 0;
        loop {
            let (mut t0, mut t1) = (0.0f64, 1.0f64);
            for k in 0..n {
                let (x0, x1) = (cell[k] as f64 * delta, (cell[k] + 1) as f64 * delta);
                let d = b[k] - a[k];
                if d.abs() < 1e-300 {
                    if a[k] < x0 || a[k] >= x1 {
                        t1 = -1.0;
                    }
                } else {
                    let (u, v) = ((x0 - a[k]) / d, (x1 - a[k]) / d);
                    t0 = t0.max(u.min(v));
                    t1 = t1.min(u.max(v));
                }
            }
            if t1 - t0 > 1e-12 {
                count += 1;
            }
            let mut k = 0;
            while k < n && cell[k] == hi[k] {
                cell[k] = lo[k];
                k += 1;
            }
            if k == n {
                return count;
            }
            cell[k] += 1;
        }
    }

    #[test]
    fn walk_matches_dense_sampling() {
        let cases = [
            seg(&[0.03, 0.11], &[0.87, 0.42]),
            seg(&[0.53, -0.31], &[-0.21, 0.64]),
            seg(&[0.11, 0.23, 0.31], &[-0.43, 0.92, 0.04]),
        ];
        for s in cases {
            let c = Collection::from_segments(vec![s.clone()]);
            for d in [0.1, 0.05, 0.013] {
                assert_eq!(box_count(&c, d).unwrap(), brute(&s, d), "{s:?} {d}");
            }
        }
    }

    #[test]
    fn dense_and_sparse_agree() {
        let c = corpus::filled_square(6);
        let layout = Layout::new(&c, 2, 1.0 / 64.0).unwrap();
        assert_eq!(count_dense(&c, &layout).unwrap(), count_sparse(&c, &layout).unwrap());
        assert_eq!(count_dense(&c, &layout).unwrap(), 4096);
    }

    #[test]
    fn exact_power_law_fit() {
        let deltas: Vec<f64> = (1..=6).map(|k| 4f64.powi(-k)).collect();
        let counts = (1..=6).map(|k| 8u64.pow(k)).collect();
        let fit = dimension_fit_with(&BoxCountSeries { deltas, counts }, 0).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12 && (fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_scales() {
        let s = box_count_series(&corpus::unit_segment(), &dyadic_deltas(1, 5)).unwrap();
        assert!(dimension_fit(&s).is_err());
    }

    #[test]
    fn cantor_counts_are_powers_of_two() {
        let s = box_count_series(&corpus::cantor_dust(5), &dyadic_deltas(1, 10)).unwrap();
        for (k, &n) in s.counts.iter().enumerate() {
            assert_eq!(n, 1 << (k + 1));
        }
    }
}
