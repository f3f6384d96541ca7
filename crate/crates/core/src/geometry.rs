//! Primitives: points, unit directions, segments, tubes, hyperplanes, page
//! families and Grassmannian elements.
//!
//! Everything here is immutable once built. Constructors validate and
//! renormalize; operations are pure.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};

use crate::error::{argument, check_dim, Error, Result};

/// A point of ℝⁿ.
pub type Point = DVector<f64>;

/// Boundary tolerance for closed-set membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Largest ambient dimension supported by default.
pub const MAX_DIM: usize = 6;

const MIN_NORM: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-12;

/// Shorthand for building a point from a slice.
pub fn point(coords: &[f64]) -> Point {
    DVector::from_column_slice(coords)
}

/// A unit vector of ℝⁿ, n ≥ 2.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Direction(DVector<f64>);

impl Direction {
    /// Normalizes `v`. Vectors shorter than 1e-12 are rejected.
    pub fn new(v: DVector<f64>) -> Result<Self> {
        if v.len() < 2 {
            return Err(argument(format!("ambient dimension {} < 2", v.len())));
        }
        let norm = v.norm();
        if !norm.is_finite() || norm < MIN_NORM {
            return Err(Error::Geometry(format!("cannot normalize vector of norm {norm:e}")));
        }
        Ok(Direction(v / norm))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(point(coords))
    }

    /// The `i`-th standard basis vector of ℝⁿ.
    pub fn axis(n: usize, i: usize) -> Self {
        assert!(n >= 2 && i < n, "axis {i} out of range for dimension {n}");
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        Direction(v)
    }

    /// The unit vector at angle `t` in the plane.
    pub fn from_angle(t: f64) -> Self {
        Direction(point(&[t.cos(), t.sin()]))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }

    pub fn dot(&self, v: &DVector<f64>) -> f64 {
        self.0.dot(v)
    }

    pub fn negated(&self) -> Self {
        Direction(-&self.0)
    }
}

impl std::ops::Index<usize> for Direction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Great-circle distance between two directions, in `[0, π]`.
pub fn spherical_distance(a: &Direction, b: &Direction) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(a.dot(b.as_vector()).clamp(-1.0, 1.0).acos())
}

/// Completes `vectors` (assumed orthonormal) to an orthonormal basis of ℝⁿ and
/// returns only the added vectors. The completion is deterministic: at each
/// step the standard axis with the largest residual is orthogonalized.
pub fn orthonormal_complement(vectors: &[DVector<f64>], n: usize) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = vectors.to_vec();
    let mut added = Vec::new();
    while basis.len() < n {
        let mut best: Option<DVector<f64>> = None;
        let mut best_norm = 0.0;
        for i in 0..n {
            let mut r = DVector::zeros(n);
            r[i] = 1.0;
            // two passes of Gram-Schmidt keep the residual orthogonal to 1e-16
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&r);
                    r.axpy(-c, b, 1.0);
                }
            }
            let norm = r.norm();
            if norm > best_norm + 1e-12 {
                best_norm = norm;
                best = Some(r);
            }
        }
        let r = best.expect("a standard axis always has a residual");
        let unit = r / best_norm;
        basis.push(unit.clone());
        added.push(unit);
    }
    added
}

/// A line segment given by its center, direction and length.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Segment {
    center: Point,
    direction: Direction,
    length: f64,
}

impl Segment {
    pub fn new(center: Point, direction: Direction, length: f64) -> Result<Self> {
        check_dim(direction.dim(), center.len())?;
        if !(length > 0.0 && length.is_finite()) {
            return Err(argument(format!("segment length must be positive, got {length}")));
        }
        Ok(Segment { center, direction, length })
    }

    /// A unit-length segment.
    pub fn unit(center: Point, direction: Direction) -> Result<Self> {
        Self::new(center, direction, 1.0)
    }

    /// Segment with the given endpoints.
    pub fn from_endpoints(a: &Point, b: &Point) -> Result<Self> {
        check_dim(a.len(), b.len())?;
        let d = b - a;
        let length = d.norm();
        let direction = Direction::new(d)?;
        Segment::new((a + b) * 0.5, direction, length)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn direction(&self) -> &Direction {
        &self.direction
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn endpoints(&self) -> (Point, Point) {
        let h = self.direction.as_vector() * (self.length / 2.0);
        (&self.center - &h, &self.center + &h)
    }

    /// Point at arc-length offset `s` from the center.
    pub fn point_at(&self, s: f64) -> Point {
        &self.center + self.direction.as_vector() * s
    }

    /// Euclidean distance from `p` to the closed segment.
    pub fn distance_to(&self, p: &Point) -> f64 {
        let d = p - &self.center;
        let s = self.direction.dot(&d).clamp(-self.length / 2.0, self.length / 2.0);
        (d - self.direction.as_vector() * s).norm()
    }

    /// Distance from `p` to the infinite line carrying the segment.
    pub fn line_distance_to(&self, p: &Point) -> f64 {
        let d = p - &self.center;
        let s = self.direction.dot(&d);
        (d - self.direction.as_vector() * s).norm()
    }

    pub fn translated(&self, by: &Point) -> Segment {
        Segment { center: &self.center + by, ..self.clone() }
    }
}

/// Cross-section shape of a tube around its core segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Thin along the first frame axis only, unit extent along the other
    /// n−2 axes: a `1^{n-1} × ε` rectangular slab piece.
    Slab,
    /// Thin along every frame axis: the box `1 × ε^{n-1}` around the core.
    Rod,
}

/// The thickening of a segment by width `ε` along an orthonormal normal frame.
///
/// Membership is `|s| ≤ L/2` along the core, `|t₁| ≤ ε/2` on the first frame
/// axis, and `|tⱼ| ≤ 1/2` (slab) or `ε/2` (rod) on the others. Tubes are closed.
/// In the plane both profiles are the `L × ε` rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Tube {
    core: Segment,
    width: f64,
    frame: Vec<Direction>,
    profile: Profile,
}

impl Tube {
    pub fn new(core: Segment, width: f64, frame: Vec<Direction>, profile: Profile) -> Result<Self> {
        let n = core.dim();
        if !(width > 0.0 && width.is_finite()) {
            return Err(argument(format!("tube width must be positive, got {width}")));
        }
        if frame.len() != n - 1 {
            return Err(Error::Dimension { expected: n - 1, got: frame.len() });
        }
        for (i, f) in frame.iter().enumerate() {
            check_dim(n, f.dim())?;
            if core.direction().dot(f.as_vector()).abs() > ORTHO_TOL {
                return Err(Error::Geometry(format!("frame axis {i} not orthogonal to the core")));
            }
            for g in &frame[..i] {
                if f.dot(g.as_vector()).abs() > ORTHO_TOL {
                    return Err(Error::Geometry("frame axes are not orthogonal".into()));
                }
            }
        }
        Ok(Tube { core, width, frame, profile })
    }

    /// The `L × ε` rectangle around a planar segment.
    pub fn planar(core: Segment, width: f64) -> Result<Self> {
        check_dim(2, core.dim())?;
        let d = core.direction();
        let perp = Direction::from_slice(&[-d[1], d[0]])?;
        Tube::new(core, width, vec![perp], Profile::Slab)
    }

    /// A rod around `core` with a deterministic completed frame.
    pub fn rod(core: Segment, width: f64) -> Result<Self> {
        let n = core.dim();
        let frame = orthonormal_complement(&[core.direction().as_vector().clone()], n)
            .into_iter()
            .map(Direction)
            .collect();
        Tube::new(core, width, frame, Profile::Rod)
    }

    pub fn dim(&self) -> usize {
        self.core.dim()
    }

    pub fn core(&self) -> &Segment {
        &self.core
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn frame(&self) -> &[Direction] {
        &self.frame
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    /// Half-extent along the core followed by the half-extents along each
    /// frame axis.
    pub fn half_extents(&self) -> Vec<f64> {
        let mut h = Vec::with_capacity(self.dim());
        h.push(self.core.length() / 2.0);
        for j in 0..self.frame.len() {
            h.push(match (self.profile, j) {
                (_, 0) | (Profile::Rod, _) => self.width / 2.0,
                (Profile::Slab, _) => 0.5,
            });
        }
        h
    }

    /// All n axes: core direction first, then the frame.
    pub fn axes(&self) -> Vec<&Direction> {
        std::iter::once(self.core.direction()).chain(self.frame.iter()).collect()
    }

    /// Lebesgue measure in ℝⁿ.
    pub fn measure(&self) -> f64 {
        self.half_extents().iter().map(|h| 2.0 * h).product()
    }

    /// Closed-set membership with boundary tolerance 1e-9.
    pub fn contains(&self, p: &Point) -> bool {
        let d = p - self.core.center();
        self.axes()
            .iter()
            .zip(self.half_extents())
            .all(|(a, h)| a.dot(&d).abs() <= h + MEMBERSHIP_TOL)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn aabb(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let c = self.core.center();
        let hs = self.half_extents();
        let axes = self.axes();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for k in 0..n {
            let r: f64 = axes.iter().zip(&hs).map(|(a, h)| a[k].abs() * h).sum();
            lo[k] = c[k] - r;
            hi[k] = c[k] + r;
        }
        (lo, hi)
    }

    /// Corners of the planar rectangle in counterclockwise order.
    pub fn vertices_2d(&self) -> Result<[Point; 4]> {
        check_dim(2, self.dim())?;
        let c = self.core.center();
        let d = self.core.direction().as_vector() * (self.core.length() / 2.0);
        let mut f = self.frame[0].as_vector() * (self.width / 2.0);
        // keep the frame axis on the left of the core so the order is CCW
        if d[0] * f[1] - d[1] * f[0] < 0.0 {
            f = -f;
        }
        Ok([c - &d - &f, c + &d - &f, c + &d + &f, c - &d + &f])
    }

    pub fn translated(&self, by: &Point) -> Tube {
        Tube { core: self.core.translated(by), ..self.clone() }
    }
}

/// The affine hyperplane `{x : ⟨x, normal⟩ = offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Direction,
    offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Direction, offset: f64) -> Self {
        Hyperplane { normal, offset }
    }

    pub fn through_origin(normal: Direction) -> Self {
        Self::new(normal, 0.0)
    }

    /// `{x : x_axis = value}`.
    pub fn coordinate(n: usize, axis: usize, value: f64) -> Self {
        Self::new(Direction::axis(n, axis), value)
    }

    pub fn normal(&self) -> &Direction {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn ambient_dim(&self) -> usize {
        self.normal.dim()
    }

    pub fn signed_distance(&self, p: &Point) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Orthonormal basis of the direction space of the hyperplane. For a
    /// coordinate hyperplane `{x₁ = c}` this is `e₂, …, eₙ` in order.
    pub fn basis(&self) -> Vec<DVector<f64>> {
        orthonormal_complement(&[self.normal.as_vector().clone()], self.ambient_dim())
    }

    /// Coordinates in ℝ^{n−1} of the orthogonal projection of `p` onto the
    /// hyperplane, relative to the foot point `offset·normal`.
    pub fn coordinates(&self, p: &Point) -> DVector<f64> {
        let base = self.normal.as_vector() * self.offset;
        let rel = p - base;
        let b = self.basis();
        DVector::from_iterator(b.len(), b.iter().map(|v| v.dot(&rel)))
    }
}

/// Where the infinite line carrying `s` meets `h`.
pub fn line_hyperplane_intersection(s: &Segment, h: &Hyperplane) -> Result<Point> {
    check_dim(h.ambient_dim(), s.dim())?;
    let denom = h.normal().dot(s.direction().as_vector());
    if denom.abs() < 1e-12 {
        return Err(Error::Parallel(denom));
    }
    let t = -h.signed_distance(s.center()) / denom;
    Ok(s.point_at(t))
}

/// The pages of a 2-plane `span(u, v)`: the hyperplanes through the origin
/// whose normals lie on the circle of that plane, parametrized by angle.
#[derive(Debug, Clone, PartialEq)]
pub struct PageFamily {
    u: Direction,
    v: Direction,
    phase: f64,
}

impl PageFamily {
    pub fn new(u: Direction, v: Direction, phase: f64) -> Result<Self> {
        check_dim(u.dim(), v.dim())?;
        if u.dim() < 3 {
            return Err(argument("pages need ambient dimension at least 3"));
        }
        if u.dot(v.as_vector()).abs() > ORTHO_TOL {
            return Err(Error::Geometry("page plane basis is not orthogonal".into()));
        }
        Ok(PageFamily { u, v, phase: phase.rem_euclid(TAU) })
    }

    /// Pages of `span(e₁, e₂)` in ℝⁿ with phase 0.
    pub fn standard(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(argument("pages need ambient dimension at least 3"));
        }
        Self::new(Direction::axis(n, 0), Direction::axis(n, 1), 0.0)
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn plane_basis(&self) -> (&Direction, &Direction) {
        (&self.u, &self.v)
    }

    /// Unit normal of the page with directional angle `t` (reduced mod 2π).
    pub fn normal_at(&self, t: f64) -> Direction {
        let a = t.rem_euclid(TAU) + self.phase;
        Direction(self.u.as_vector() * a.cos() + self.v.as_vector() * a.sin())
    }

    pub fn page_at(&self, t: f64) -> Hyperplane {
        Hyperplane::through_origin(self.normal_at(t))
    }

    /// Orthonormal basis of the page with angle `t`: the in-plane tangent
    /// first, then a fixed basis of the complement of `span(u, v)`.
    pub fn page_basis(&self, t: f64) -> Vec<DVector<f64>> {
        let a = t.rem_euclid(TAU) + self.phase;
        let tangent = self.u.as_vector() * (-a.sin()) + self.v.as_vector() * a.cos();
        let rest = orthonormal_complement(
            &[self.u.as_vector().clone(), self.v.as_vector().clone()],
            self.dim(),
        );
        std::iter::once(tangent).chain(rest).collect()
    }
}

/// Page angle of a hyperplane normal within the family, in `[0, 2π)`.
pub fn directional_angle(pages: &PageFamily, normal: &Direction) -> Result<f64> {
    check_dim(pages.dim(), normal.dim())?;
    let (u, v) = pages.plane_basis();
    let a = normal.dot(v.as_vector()).atan2(normal.dot(u.as_vector()));
    Ok((a - pages.phase()).rem_euclid(TAU))
}

/// A k-dimensional subspace of ℝᵐ with a fixed orthonormal basis. The
/// projection `π(x)` returns coordinates in that basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannElement {
    basis: DMatrix<f64>,
}

impl GrassmannElement {
    /// Orthonormalizes the span of `vectors`. Rejects near-dependent inputs
    /// whose smallest singular value is below 1e-8.
    pub fn from_spanning(vectors: &[DVector<f64>]) -> Result<Self> {
        let k = vectors.len();
        if k == 0 {
            return Err(argument("empty spanning set"));
        }
        let m = vectors[0].len();
        for v in vectors {
            check_dim(m, v.len())?;
        }
        if k >= m {
            return Err(argument(format!("subspace dimension {k} must be below ambient {m}")));
        }
        let a = DMatrix::from_columns(vectors);
        let sv = a.clone().svd(false, false).singular_values;
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if smin < 1e-8 {
            return Err(Error::Geometry(format!(
                "spanning vectors nearly dependent (smallest singular value {smin:e})"
            )));
        }
        // Gram-Schmidt keeps the basis aligned with the inputs, so an already
        // orthonormal set is returned unchanged.
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(k);
        for v in vectors {
            let mut r = v.clone();
            for _ in 0..2 {
                for c in &cols {
                    let p = c.dot(&r);
                    r.axpy(-p, c, 1.0);
                }
            }
            let norm = r.norm();
            cols.push(r / norm);
        }
        Ok(GrassmannElement { basis: DMatrix::from_columns(&cols) })
    }

    /// Subspace spanned by the listed standard axes of ℝᵐ.
    pub fn coordinate(m: usize, axes: &[usize]) -> Result<Self> {
        let vs: Vec<DVector<f64>> = axes
            .iter()
            .map(|&i| {
                if i >= m {
                    return Err(argument(format!("axis {i} out of range for ℝ^{m}")));
                }
                let mut v = DVector::zeros(m);
                v[i] = 1.0;
                Ok(v)
            })
            .collect::<Result<_>>()?;
        Self::from_spanning(&vs)
    }

    pub(crate) fn from_orthonormal_matrix(basis: DMatrix<f64>) -> Self {
        GrassmannElement { basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn sub_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Columns are the orthonormal basis vectors.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.ambient_dim(), x.len())?;
        Ok(self.basis.tr_mul(x))
    }

    pub fn embed(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.sub_dim(), y.len())?;
        Ok(&self.basis * y)
    }

    /// Principal angles to `other`, ascending, in `[0, π/2]`.
    ///
    /// Cosines come from the singular values of `UᵀV`; angles below π/4 are
    /// recomputed from the sines (singular values of `V − UUᵀV`), which keeps
    /// small angles accurate.
    pub fn principal_angles(&self, other: &GrassmannElement) -> Result<Vec<f64>> {
        check_dim(self.ambient_dim(), other.ambient_dim())?;
        check_dim(self.sub_dim(), other.sub_dim())?;
        let u = &self.basis;
        let v = &other.basis;
        let utv = u.tr_mul(v);
        let mut cosines: Vec<f64> = utv.clone().svd(false, false).singular_values.iter().cloned().collect();
        cosines.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let resid = v - u * &utv;
        let mut sines: Vec<f64> = resid.svd(false, false).singular_values.iter().cloned().collect();
        sines.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(cosines
            .iter()
            .zip(&sines)
            .map(|(&c, &s)| {
                let c = c.clamp(0.0, 1.0);
                if c > std::f64::consts::FRAC_1_SQRT_2 {
                    s.clamp(0.0, 1.0).asin()
                } else {
                    c.acos()
                }
            })
            .collect())
    }

    /// Largest principal angle to `other`.
    pub fn distance(&self, other: &GrassmannElement) -> Result<f64> {
        Ok(self.principal_angles(other)?.into_iter().fold(0.0, f64::max))
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn reduce_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Acute angle in `[0, π/2]` between two unoriented lines whose directions
/// differ by `delta` radians.
pub fn line_angle(delta: f64) -> f64 {
    let r = delta.abs().rem_euclid(PI);
    r.min(PI - r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn shoelace(vs: &[Point]) -> f64 {
        let n = vs.len();
        (0..n)
            .map(|i| {
                let (a, b) = (&vs[i], &vs[(i + 1) % n]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
            / 2.0
    }

    #[test]
    fn spherical_distance_basic_cases() {
        let e1 = Direction::axis(3, 0);
        let e2 = Direction::axis(3, 1);
        assert_eq!(spherical_distance(&e1, &e1).unwrap(), 0.0);
        assert!((spherical_distance(&e1, &e2).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((spherical_distance(&e1, &e1.negated()).unwrap() - PI).abs() < 1e-15);
        let f = Direction::axis(2, 0);
        assert!(matches!(spherical_distance(&e1, &f), Err(Error::Dimension { .. })));
    }

    #[test]
    fn direction_rejects_zero() {
        assert!(Direction::from_slice(&[1e-13, 0.0]).is_err());
        let d = Direction::from_slice(&[3.0, 4.0]).unwrap();
        assert!((d.as_vector().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn page_at_basis_cases() {
        let pages = PageFamily::standard(3).unwrap();
        let h0 = pages.page_at(0.0);
        assert!((h0.normal().as_vector() - point(&[1.0, 0.0, 0.0])).norm() < 1e-15);
        let h1 = pages.page_at(FRAC_PI_2);
        assert!((h1.normal().as_vector() - point(&[0.0, 1.0, 0.0])).norm() < 1e-15);
        // out-of-range angles wrap
        let h2 = pages.page_at(FRAC_PI_2 + TAU);
        assert!((h2.normal().as_vector() - h1.normal().as_vector()).norm() < 1e-12);
    }

    #[test]
    fn page_angle_roundtrip_with_phase() {
        let u = Direction::from_slice(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        let v = Direction::from_slice(&[0.0, 0.0, 1.0, -1.0]).unwrap();
        let pages = PageFamily::new(u, v, 1.3).unwrap();
        for k in 0..20 {
            let t = k as f64 * 0.31;
            let got = directional_angle(&pages, pages.page_at(t).normal()).unwrap();
            assert!((got - t).abs() < 1e-12, "{got} vs {t}");
        }
    }

    #[test]
    fn page_basis_is_orthonormal_and_in_page() {
        let pages = PageFamily::standard(4).unwrap();
        let t = 0.7;
        let b = pages.page_basis(t);
        let nrm = pages.normal_at(t);
        assert_eq!(b.len(), 3);
        for (i, x) in b.iter().enumerate() {
            assert!(nrm.dot(x).abs() < 1e-14);
            for (j, y) in b.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((x.dot(y) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tube_vertices_axis_aligned() {
        let t = Tube::planar(Segment::unit(point(&[0.0, 0.0]), Direction::axis(2, 0)).unwrap(), 0.2)
            .unwrap();
        let vs = t.vertices_2d().unwrap();
        let want = [[-0.5, -0.1], [0.5, -0.1], [0.5, 0.1], [-0.5, 0.1]];
        for (v, w) in vs.iter().zip(want) {
            assert!((v - point(&w)).norm() < 1e-15);
        }
        assert!((shoelace(&vs) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn tube_vertices_rotate_with_the_tube() {
        let a = Tube::planar(Segment::unit(point(&[0.0, 0.0]), Direction::axis(2, 0)).unwrap(), 0.2)
            .unwrap();
        let b = Tube::planar(Segment::unit(point(&[0.0, 0.0]), Direction::axis(2, 1)).unwrap(), 0.2)
            .unwrap();
        let rot = |p: &Point| point(&[-p[1], p[0]]);
        for (va, vb) in a.vertices_2d().unwrap().iter().zip(b.vertices_2d().unwrap().iter()) {
            assert!((rot(va) - vb).norm() < 1e-15);
        }
    }

    #[test]
    fn tube_vertices_reject_3d() {
        let t = Tube::rod(Segment::unit(point(&[0.0, 0.0, 0.0]), Direction::axis(3, 0)).unwrap(), 0.1)
            .unwrap();
        assert!(matches!(t.vertices_2d(), Err(Error::Dimension { .. })));
    }

    #[test]
    fn line_hyperplane_axis_case() {
        let s = Segment::unit(point(&[0.0, 0.0, 0.0]), Direction::axis(3, 0)).unwrap();
        let h = Hyperplane::coordinate(3, 0, 0.3);
        let p = line_hyperplane_intersection(&s, &h).unwrap();
        assert!((p - point(&[0.3, 0.0, 0.0])).norm() < 1e-15);
        let par = Segment::unit(point(&[0.0, 0.0, 0.0]), Direction::axis(3, 1)).unwrap();
        assert!(matches!(line_hyperplane_intersection(&par, &h), Err(Error::Parallel(_))));
    }

    #[test]
    fn tube_measures() {
        let seg = Segment::unit(point(&[0.0, 0.0, 0.0]), Direction::axis(3, 0)).unwrap();
        let rod = Tube::rod(seg.clone(), 0.1).unwrap();
        assert!((rod.measure() - 0.01).abs() < 1e-15);
        let slab = Tube::new(
            seg,
            0.1,
            vec![Direction::axis(3, 1), Direction::axis(3, 2)],
            Profile::Slab,
        )
        .unwrap();
        assert!((slab.measure() - 0.1).abs() < 1e-15);
        assert!(slab.contains(&point(&[0.4, 0.04, 0.45])));
        assert!(!slab.contains(&point(&[0.4, 0.06, 0.45])));
        assert!(!rod.contains(&point(&[0.4, 0.04, 0.45])));
    }

    #[test]
    fn grassmann_rejects_dependent_inputs() {
        let a = point(&[1.0, 0.0, 0.0]);
        let b = point(&[1.0, 1e-10, 0.0]);
        assert!(GrassmannElement::from_spanning(&[a, b]).is_err());
    }

    #[test]
    fn principal_angles_known_values() {
        let g = GrassmannElement::coordinate(3, &[0]).unwrap();
        let t: f64 = 0.3;
        let h = GrassmannElement::from_spanning(&[point(&[t.cos(), t.sin(), 0.0])]).unwrap();
        let ang = g.principal_angles(&h).unwrap();
        assert!((ang[0] - t).abs() < 1e-14);
        let tiny = GrassmannElement::from_spanning(&[point(&[1.0, 1e-9, 0.0])]).unwrap();
        assert!((g.distance(&tiny).unwrap() - 1e-9).abs() < 1e-20);
    }

    #[test]
    fn line_angle_folds() {
        assert!((line_angle(PI - 0.1) - 0.1).abs() < 1e-15);
        assert!((line_angle(0.3) - 0.3).abs() < 1e-15);
        assert!((line_angle(TAU + 0.2) - 0.2).abs() < 1e-14);
    }
}
