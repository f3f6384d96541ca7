//! Exact planar convex intersections and the strip-crossing area bounds.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use nalgebra::Vector2;

use crate::error::{argument, check_dim, Error, Result};
use crate::geometry::Tube;

pub type Vec2 = Vector2<f64>;

const CONVEXITY_TOL: f64 = 1e-12;
const SNAP_TOL: f64 = 1e-12;

/// Crossing angles closer than this to 0 or π are treated as parallel.
pub const NEAR_PARALLEL: f64 = 1e-9;

#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// A convex polygon with counterclockwise vertices, or the empty polygon.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        let p = ConvexPolygon { vertices };
        p.validate()?;
        Ok(p)
    }

    pub fn empty() -> Self {
        ConvexPolygon::default()
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        ConvexPolygon {
            vertices: vec![
                Vec2::new(x0, y0),
                Vec2::new(x1, y0),
                Vec2::new(x1, y1),
                Vec2::new(x0, y1),
            ],
        }
    }

    /// Footprint of a planar tube.
    pub fn from_tube(t: &Tube) -> Result<Self> {
        let vs = t.vertices_2d()?;
        Ok(ConvexPolygon { vertices: vs.iter().map(|p| Vec2::new(p[0], p[1])).collect() })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if n == 0 {
            return Ok(());
        }
        if n < 3 {
            return Err(Error::Geometry(format!("polygon with {n} vertices")));
        }
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            if cross(&(b - a), &(c - b)) < -CONVEXITY_TOL {
                return Err(Error::Geometry(format!(
                    "polygon is not convex and counterclockwise at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        Ok(())
    }
}

/// Shoelace area; 0 for the empty polygon.
pub fn polygon_area(p: &ConvexPolygon) -> f64 {
    let vs = p.vertices();
    if vs.len() < 3 {
        return 0.0;
    }
    let o = vs[0];
    let mut twice = 0.0;
    for i in 1..vs.len() - 1 {
        twice += cross(&(vs[i] - o), &(vs[i + 1] - o));
    }
    (twice / 2.0).max(0.0)
}

/// `subject ∩ clip_region` by sequential half-plane clipping.
pub fn clip(subject: &ConvexPolygon, clip_region: &ConvexPolygon) -> Result<ConvexPolygon> {
    subject.validate()?;
    clip_region.validate()?;
    if subject.is_empty() || clip_region.is_empty() {
        return Ok(ConvexPolygon::empty());
    }
    let cv = clip_region.vertices();
    let mut poly = subject.vertices().to_vec();
    let mut next = Vec::with_capacity(poly.len() + 4);
    for i in 0..cv.len() {
        let a = cv[i];
        let e = cv[(i + 1) % cv.len()] - a;
        clip_halfplane(&poly, &a, &e, &mut next);
        std::mem::swap(&mut poly, &mut next);
        if poly.len() < 3 {
            return Ok(ConvexPolygon::empty());
        }
    }
    dedup_snap(&mut poly);
    if poly.len() < 3 {
        return Ok(ConvexPolygon::empty());
    }
    Ok(ConvexPolygon { vertices: poly })
}

/// Keeps the part of `poly` on the left of the directed line through `a`
/// along `e`.
fn clip_halfplane(poly: &[Vec2], a: &Vec2, e: &Vec2, out: &mut Vec<Vec2>) {
    out.clear();
    let scale = e.norm().max(f64::MIN_POSITIVE);
    let side = |p: &Vec2| cross(e, &(p - a)) / scale;
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let sp = side(&p);
        let sq = side(&q);
        let p_in = sp >= -SNAP_TOL;
        let q_in = sq >= -SNAP_TOL;
        if p_in {
            out.push(p);
        }
        if p_in != q_in {
            // one side is strictly outside, so sp - sq is bounded away from 0
            let t = sp / (sp - sq);
            out.push(p + (q - p) * t);
        }
    }
    dedup_snap(out);
}

fn dedup_snap(poly: &mut Vec<Vec2>) {
    poly.dedup_by(|a, b| (*a - *b).norm() <= SNAP_TOL);
    while poly.len() > 1 && (poly[0] - poly[poly.len() - 1]).norm() <= SNAP_TOL {
        poly.pop();
    }
}

/// Area `ε²/sin d` of the parallelogram cut out by two infinite strips of
/// width `ε` whose normals are `d` apart. This is also the cross-section of
/// two crossing slabs in ℝⁿ.
pub fn slab_intersection_area(eps: f64, d: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(argument(format!("eps must be positive, got {eps}")));
    }
    if !(d > NEAR_PARALLEL && d < PI - NEAR_PARALLEL) {
        return Err(Error::NearParallel(d));
    }
    Ok(eps * eps / d.sin())
}

/// Exact area of the intersection of two planar tubes.
pub fn tube_pair_intersection_area_2d(a: &Tube, b: &Tube) -> Result<f64> {
    check_dim(2, a.dim())?;
    check_dim(2, b.dim())?;
    let pa = ConvexPolygon::from_tube(a)?;
    let pb = ConvexPolygon::from_tube(b)?;
    Ok(polygon_area(&clip(&pa, &pb)?))
}

/// The linearized overlap `(2/π) ε^{2−α} / |i−j|` for the tubes at angles
/// `iε^α` and `jε^α`, as written in the fan lemma.
///
/// This is *not* an upper bound on `ε²/sin(|i−j|ε^α)`: on `(0, π/2]` one has
/// `sin x ≥ 2x/π`, hence `1/sin x ≤ π/(2x)`, and the constant must be π/2.
/// Use [`linearized_pair_bound`] wherever domination matters. Past π/2 the
/// exact `ε²/sin` form is returned.
pub fn pairwise_bound(i: usize, j: usize, eps: f64, alpha: f64) -> Result<f64> {
    linearized(i, j, eps, alpha, FRAC_2_PI)
}

/// `(π/2) ε^{2−α} / |i−j|`, which dominates `ε²/sin(|i−j|ε^α)` while the
/// angle is at most π/2; past π/2 the exact `ε²/sin` form.
pub fn linearized_pair_bound(i: usize, j: usize, eps: f64, alpha: f64) -> Result<f64> {
    let b = linearized(i, j, eps, alpha, FRAC_PI_2)?;
    debug_assert!({
        let angle = i.abs_diff(j) as f64 * eps.powf(alpha);
        eps * eps / angle.sin() <= b * (1.0 + 1e-12)
    });
    Ok(b)
}

fn linearized(i: usize, j: usize, eps: f64, alpha: f64, constant: f64) -> Result<f64> {
    if i == j {
        return Err(argument("pairwise bound needs distinct indices"));
    }
    if !(eps > 0.0) || !(alpha > 0.0 && alpha < 1.0) {
        return Err(argument(format!("need eps > 0 and alpha in (0,1), got {eps}, {alpha}")));
    }
    let k = i.abs_diff(j) as f64;
    let angle = k * eps.powf(alpha);
    if angle >= PI - NEAR_PARALLEL {
        return Err(Error::NearParallel(angle));
    }
    if angle <= FRAC_PI_2 {
        Ok(constant * eps.powf(2.0 - alpha) / k)
    } else {
        slab_intersection_area(eps, angle)
    }
}
