//! Exact area of a union of planar rectangles.
//!
//! The sweep engine integrates `(x dy − y dx)/2` over the boundary of the
//! union: every rectangle edge contributes the parts of it that are not
//! strictly inside another rectangle. Collinear edges running the same way
//! are attributed to the lower-indexed tube so shared boundary is counted
//! once; opposite-running collinear edges cancel on their own.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MeasureEstimate, Method, TubeFamily, DEFAULT_TUBE_CAP};
use crate::error::{check_dim, Error, Result};
use crate::intersection::{cross, Vec2};

/// Which planar engine to use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "snake_case")]
pub enum Exact2dEngine {
    Sweep,
    /// Inner/outer cell counts on a grid with `cells` cells along the longer
    /// side of the bounding box.
    Raster { cells: usize },
}

impl Default for Exact2dEngine {
    fn default() -> Self {
        Exact2dEngine::Sweep
    }
}

#[derive(Debug, Clone, Copy)]
struct Quad {
    v: [Vec2; 4],
    lo: Vec2,
    hi: Vec2,
}

impl Quad {
    fn new(v: [Vec2; 4]) -> Self {
        let mut lo = v[0];
        let mut hi = v[0];
        for p in &v[1..] {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        Quad { v, lo, hi }
    }
}

/// Rectangles of the family, recentered on their common bounding box.
fn quads(f: &TubeFamily) -> Result<(Vec<Quad>, Vec2, Vec2)> {
    let mut out = Vec::with_capacity(f.len());
    for t in f.tubes() {
        check_dim(2, t.dim())?;
        let vs = t.vertices_2d()?;
        out.push(Quad::new([0, 1, 2, 3].map(|k| Vec2::new(vs[k][0], vs[k][1]))));
    }
    let mut lo = Vec2::repeat(f64::INFINITY);
    let mut hi = Vec2::repeat(f64::NEG_INFINITY);
    for q in &out {
        lo = lo.inf(&q.lo);
        hi = hi.sup(&q.hi);
    }
    let mid = (lo + hi) / 2.0;
    for q in &mut out {
        for p in &mut q.v {
            *p -= mid;
        }
        q.lo -= mid;
        q.hi -= mid;
    }
    Ok((out, lo - mid, hi - mid))
}

/// Exact union area via the boundary sweep.
pub fn exact_union_area_2d(f: &TubeFamily) -> Result<MeasureEstimate> {
    exact_union_area_2d_with(f, Exact2dEngine::Sweep, DEFAULT_TUBE_CAP)
}

pub fn exact_union_area_2d_with(
    f: &TubeFamily,
    engine: Exact2dEngine,
    cap: usize,
) -> Result<MeasureEstimate> {
    if f.len() > cap {
        return Err(Error::Capacity { what: "tubes", got: f.len(), cap });
    }
    if f.is_empty() {
        return Ok(MeasureEstimate::exact(0.0));
    }
    match engine {
        Exact2dEngine::Sweep => Ok(MeasureEstimate::exact(sweep(f)?)),
        Exact2dEngine::Raster { cells } => {
            let (lower, upper) = raster_bracket(f, cells)?;
            Ok(MeasureEstimate {
                value: (lower + upper) / 2.0,
                stderr: (upper - lower) / 2.0,
                method: Method::Raster2d,
                samples: 0,
            })
        }
    }
}

fn sweep(f: &TubeFamily) -> Result<f64> {
    let (qs, lo, hi) = quads(f)?;
    let scale = (hi - lo).amax().max(1e-300);
    let tol = 1e-12 * scale.max(1.0);
    let grid = QuadGrid::new(&qs, lo, hi);
    let n = qs.len();
    let parts: Vec<f64> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![u32::MAX; n], Vec::new(), Vec::new()),
            |(mark, nbrs, spans), i| {
                nbrs.clear();
                grid.neighbours(i, mark, nbrs);
                let q = &qs[i];
                let mut acc = 0.0;
                for k in 0..4 {
                    let a = q.v[k];
                    let b = q.v[(k + 1) % 4];
                    let elo = a.inf(&b);
                    let ehi = a.sup(&b);
                    spans.clear();
                    for &j in nbrs.iter() {
                        let qj = &qs[j as usize];
                        if qj.hi.x < elo.x || qj.lo.x > ehi.x || qj.hi.y < elo.y || qj.lo.y > ehi.y {
                            continue;
                        }
                        if let Some(span) = covered_span(&a, &b, qj, (j as usize) < i, tol) {
                            spans.push(span);
                        }
                    }
                    acc += uncovered_contribution(&a, &b, spans);
                }
                acc
            },
        )
        .collect();
    Ok(parts.iter().sum::<f64>().max(0.0))
}

/// Parameter interval of the edge `a→b` lying strictly inside `q`, or on a
/// same-direction edge of `q` when `q` wins ties.
fn covered_span(a: &Vec2, b: &Vec2, q: &Quad, wins_ties: bool, tol: f64) -> Option<(f64, f64)> {
    let e = b - a;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for k in 0..4 {
        let p0 = q.v[k];
        let ek = q.v[(k + 1) % 4] - p0;
        let len = ek.norm();
        let ga = cross(&ek, &(a - p0)) / len;
        let gb = cross(&ek, &(b - p0)) / len;
        if ga.abs() <= tol && gb.abs() <= tol {
            if wins_ties && e.dot(&ek) > 0.0 {
                continue;
            }
            return None;
        }
        let dg = gb - ga;
        if dg == 0.0 {
            if ga > 0.0 {
                continue;
            }
            return None;
        }
        let s = -ga / dg;
        if dg > 0.0 {
            lo = lo.max(s);
        } else {
            hi = hi.min(s);
        }
        if lo >= hi {
            return None;
        }
    }
    Some((lo, hi))
}

/// Boundary-integral contribution of the parts of `a→b` outside `spans`.
fn uncovered_contribution(a: &Vec2, b: &Vec2, spans: &mut [(f64, f64)]) -> f64 {
    let e = b - a;
    let at = |s: f64| a + e * s;
    spans.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut acc = 0.0;
    let mut cursor = 0.0;
    for &(lo, hi) in spans.iter() {
        if lo > cursor {
            acc += cross(&at(cursor), &at(lo));
        }
        cursor = cursor.max(hi);
        if cursor >= 1.0 {
            break;
        }
    }
    if cursor < 1.0 {
        acc += cross(&at(cursor), &at(1.0));
    }
    acc / 2.0
}

/// Uniform bucket grid; each rectangle is registered in every cell its
/// footprint meets.
struct QuadGrid {
    start: Vec<u32>,
    items: Vec<u32>,
    cells_of: Vec<(u32, u32)>,
    cell_list: Vec<u32>,
}

impl QuadGrid {
    fn new(qs: &[Quad], lo: Vec2, hi: Vec2) -> Self {
        let ext = (hi - lo).amax().max(1e-12);
        let h = ext / 128.0;
        let nx = (((hi.x - lo.x) / h).floor() as usize + 1).max(1);
        let ny = (((hi.y - lo.y) / h).floor() as usize + 1).max(1);
        let mut cell_list = Vec::new();
        let mut cells_of = Vec::with_capacity(qs.len());
        for q in qs {
            let first = cell_list.len() as u32;
            footprint_cells(&q.v, lo, h, nx, ny, |c| cell_list.push(c as u32));
            cells_of.push((first, cell_list.len() as u32));
        }
        let mut counts = vec![0u32; nx * ny + 1];
        for &c in &cell_list {
            counts[c as usize + 1] += 1;
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let start = counts.clone();
        let mut fill = counts;
        let mut items = vec![0u32; cell_list.len()];
        for (i, &(a, b)) in cells_of.iter().enumerate() {
            for &c in &cell_list[a as usize..b as usize] {
                items[fill[c as usize] as usize] = i as u32;
                fill[c as usize] += 1;
            }
        }
        QuadGrid { start, items, cells_of, cell_list }
    }

    fn neighbours(&self, i: usize, mark: &mut [u32], out: &mut Vec<u32>) {
        let (a, b) = self.cells_of[i];
        for &c in &self.cell_list[a as usize..b as usize] {
            let c = c as usize;
            for &j in &self.items[self.start[c] as usize..self.start[c + 1] as usize] {
                if j as usize != i && mark[j as usize] != i as u32 {
                    mark[j as usize] = i as u32;
                    out.push(j);
                }
            }
        }
        // deterministic order regardless of grid layout
        out.sort_unstable();
    }
}

/// `x` range of the convex polygon on the horizontal line `y`.
fn x_range_at(v: &[Vec2], y: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = v.len();
    for k in 0..n {
        let a = v[k];
        let b = v[(k + 1) % n];
        if (a.y - y) * (b.y - y) > 0.0 {
            continue;
        }
        if a.y == b.y {
            if a.y == y {
                lo = lo.min(a.x.min(b.x));
                hi = hi.max(a.x.max(b.x));
            }
            continue;
        }
        let x = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
        lo = lo.min(x);
        hi = hi.max(x);
    }
    (lo <= hi).then_some((lo, hi))
}

/// `x` range of the convex polygon within the strip `y0 ≤ y ≤ y1`.
fn x_range_in_strip(v: &[Vec2], y0: f64, y1: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in v {
        if p.y >= y0 && p.y <= y1 {
            lo = lo.min(p.x);
            hi = hi.max(p.x);
        }
    }
    for y in [y0, y1] {
        if let Some((a, b)) = x_range_at(v, y) {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Calls `emit(cell)` for every grid cell the convex polygon meets.
fn footprint_cells(v: &[Vec2], origin: Vec2, h: f64, nx: usize, ny: usize, mut emit: impl FnMut(usize)) {
    let ymin = v.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let ymax = v.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let clampi = |x: f64, n: usize| (x.floor().max(0.0) as usize).min(n - 1);
    let r0 = clampi((ymin - origin.y) / h, ny);
    let r1 = clampi((ymax - origin.y) / h, ny);
    for r in r0..=r1 {
        let y0 = origin.y + r as f64 * h;
        if let Some((xa, xb)) = x_range_in_strip(v, y0, y0 + h) {
            let c0 = clampi((xa - origin.x) / h, nx);
            let c1 = clampi((xb - origin.x) / h, nx);
            for c in c0..=c1 {
                emit(r * nx + c);
            }
        }
    }
}

/// Certified bracket `(lower, upper)` on the union area: cells lying inside
/// some rectangle, and cells meeting some rectangle, on a grid with `cells`
/// cells along the longer side of the bounding box.
pub fn raster_bracket(f: &TubeFamily, cells: usize) -> Result<(f64, f64)> {
    if cells == 0 {
        return Err(crate::error::argument("raster needs at least one cell"));
    }
    if f.is_empty() {
        return Ok((0.0, 0.0));
    }
    let (qs, lo, hi) = quads(f)?;
    let ext = (hi - lo).amax();
    let h = ext / cells as f64;
    // pad by one cell so the footprint never touches the grid edge
    let origin = lo - Vec2::repeat(h);
    let nx = ((hi.x - origin.x) / h).ceil() as usize + 2;
    let ny = ((hi.y - origin.y) / h).ceil() as usize + 2;
    let total = nx.checked_mul(ny).ok_or(Error::Capacity { what: "raster cells", got: usize::MAX, cap: 1 << 31 })?;
    if total > 1 << 31 {
        return Err(Error::Capacity { what: "raster cells", got: total, cap: 1 << 31 });
    }
    let mut meets = vec![0u64; total.div_ceil(64)];
    let mut inside = vec![0u64; total.div_ceil(64)];
    let set = |bits: &mut [u64], k: usize| bits[k / 64] |= 1 << (k % 64);
    for q in &qs {
        footprint_cells(&q.v, origin, h, nx, ny, |c| set(&mut meets, c));
        let r0 = ((q.lo.y - origin.y) / h).floor() as usize;
        let r1 = ((q.hi.y - origin.y) / h).floor() as usize;
        for r in r0..=r1.min(ny - 1) {
            let y0 = origin.y + r as f64 * h;
            let (Some((a0, b0)), Some((a1, b1))) = (x_range_at(&q.v, y0), x_range_at(&q.v, y0 + h)) else {
                continue;
            };
            let (xa, xb) = (a0.max(a1), b0.min(b1));
            if xb - xa < h {
                continue;
            }
            let c0 = ((xa - origin.x) / h).ceil() as usize;
            let c1 = ((xb - origin.x) / h).floor() as usize;
            for c in c0..c1 {
                set(&mut inside, r * nx + c);
            }
        }
    }
    let area = h * h;
    let count = |bits: &[u64]| bits.iter().map(|w| w.count_ones() as u64).sum::<u64>() as f64;
    Ok((count(&inside) * area, count(&meets) * area))
}
