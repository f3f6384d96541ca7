//! Lifting segment families into ℝ^{2n−1}, projecting them back through
//! subspaces, and locating open sectors in radial families.
//!
//! Coordinates of ℝ^{2n−1} are `(x, y)` with `x ∈ ℝⁿ` the original point
//! and `y ∈ ℝ^{n−1}` coordinates in the chosen hyperplane `H`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{argument, check_dim, Error, Result};
use crate::geometry::{
    line_hyperplane_intersection, orthonormal_complement, spherical_distance, Direction, GrassmannElement,
    Hyperplane, Point, Segment,
};
use crate::rng;

/// Default margin `|⟨θ, ν⟩|` kept away from `H`-parallel directions.
pub const DEFAULT_MARGIN: f64 = 0.5;
/// Segments shorter than this after projection are degenerate.
pub const DEGENERATE_LENGTH: f64 = 1e-12;
/// Allowed distance of a radial family's lines from the origin.
pub const RADIAL_TOL: f64 = 1e-9;
/// Width of the annuli in the shell decomposition.
pub const SHELL_WIDTH: f64 = 0.5;
/// Relative slack when deciding which shells a radial range reaches.
pub const SHELL_TOL: f64 = 1e-12;

/// The default hyperplane `{x₁ = 0}`.
pub fn default_hyperplane(n: usize) -> Hyperplane {
    Hyperplane::coordinate(n, 0, 0.0)
}

/// An open spherical cap with a chart onto the open unit ball of ℝ^{n−1}.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    center: Direction,
    radius: f64,
    margin: f64,
    tangent: Vec<DVector<f64>>,
}

impl DirectionSet {
    /// Cap of spherical radius `radius ∈ (0, π/2)` around `center`.
    pub fn new(center: Direction, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < std::f64::consts::FRAC_PI_2) {
            return Err(argument(format!("cap radius must lie in (0, π/2), got {radius}")));
        }
        let tangent = orthonormal_complement(std::slice::from_ref(center.as_vector()), center.dim());
        Ok(DirectionSet { center, radius, margin: radius.cos(), tangent })
    }

    pub fn center(&self) -> &Direction {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `min ⟨θ, center⟩` over the cap.
    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, theta: &Direction) -> bool {
        self.center.dot(theta.as_vector()) > self.margin
    }

    /// Tangent-plane coordinates divided by `sin(radius)`: a diffeomorphism
    /// of the open cap onto the open unit ball.
    pub fn chart(&self, theta: &Direction) -> DVector<f64> {
        let s = self.radius.sin();
        DVector::from_iterator(self.tangent.len(), self.tangent.iter().map(|e| theta.dot(e) / s))
    }

    pub fn inverse_chart(&self, y: &DVector<f64>) -> Result<Direction> {
        if y.len() != self.tangent.len() || y.norm() >= 1.0 {
            return Err(argument("chart coordinates must lie in the open unit ball"));
        }
        let v = self.tangent.iter().zip(y.iter()).fold(DVector::zeros(self.dim()), |acc, (e, &c)| {
            acc + e * (c * self.radius.sin())
        });
        let cos = (1.0 - v.norm_squared()).max(0.0).sqrt();
        Direction::new(self.center.as_vector() * cos + v)
    }

    /// `count` quasi-uniform directions strictly inside the cap:
    /// evenly spaced for n = 2, area-uniform Halton points for n = 3, Halton
    /// points of the chart ball otherwise.
    pub fn samples(&self, count: usize) -> Vec<Direction> {
        let n = self.dim();
        let rotate = |phi: f64, dirs: &[f64]| -> Direction {
            let mut v = self.center.as_vector() * phi.cos();
            for (e, &c) in self.tangent.iter().zip(dirs) {
                v += e * (c * phi.sin());
            }
            Direction::new(v).expect("unit combination")
        };
        match n {
            2 => (0..count)
                .map(|i| {
                    let phi = -self.radius + 2.0 * self.radius * (i as f64 + 0.5) / count as f64;
                    rotate(phi.abs(), &[phi.signum()])
                })
                .collect(),
            3 => (1..=count)
                .map(|i| {
                    let (u, w) = (halton(i, 2), halton(i, 3));
                    let phi = (1.0 - u * (1.0 - self.radius.cos())).acos();
                    let az = std::f64::consts::TAU * w;
                    rotate(phi, &[az.cos(), az.sin()])
                })
                .collect(),
            _ => {
                const PRIMES: [u64; 5] = [2, 3, 5, 7, 11];
                let mut out = Vec::with_capacity(count);
                let mut i = 1;
                while out.len() < count {
                    let y = DVector::from_iterator(n - 1, (0..n - 1).map(|k| 2.0 * halton(i, PRIMES[k]) - 1.0));
                    if y.norm() < 1.0 {
                        out.push(self.inverse_chart(&y).expect("inside the chart ball"));
                    }
                    i += 1;
                }
                out
            }
        }
    }
}

/// Radical inverse of `i` in base `b`.
fn halton(mut i: usize, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i as u64 % b) as f64;
        i /= b as usize;
    }
    r
}

/// `count` directions uniform on `S^{n−1}` from stream 0 of `seed`.
pub fn uniform_directions(n: usize, count: usize, seed: u64) -> Vec<Direction> {
    let mut r = rng::stream(seed, 0);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g = DVector::from_fn(n, |_, _| -> f64 { StandardNormal.sample(&mut r) });
        if let Ok(d) = Direction::new(g) {
            out.push(d);
        }
    }
    out
}

/// Keeps the segments whose direction makes `|⟨θ, ν⟩| ≥ margin` with the
/// normal of `h`, each reoriented so that `⟨θ, ν⟩ > 0`. The returned cap is
/// centered on ν with radius `arccos(margin)`.
pub fn restrict_directions(
    family: &[Segment],
    h: &Hyperplane,
    margin: f64,
) -> Result<(DirectionSet, Vec<Segment>)> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(argument(format!("margin must lie in (0,1), got {margin}")));
    }
    let nu = h.normal();
    let mut kept = Vec::new();
    for s in family {
        check_dim(h.ambient_dim(), s.dim())?;
        let c = s.direction().dot(nu.as_vector());
        if c.abs() >= margin {
            let dir = if c < 0.0 { s.direction().negated() } else { s.direction().clone() };
            kept.push(Segment::new(s.center().clone(), dir, s.length())?);
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptySelection(format!("no direction with |<θ, ν>| ≥ {margin}")));
    }
    Ok((DirectionSet::new(nu.clone(), margin.acos())?, kept))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftRecord {
    pub original: Segment,
    /// Coordinates in `H` of the point where the extended line meets `H`.
    pub x_theta: DVector<f64>,
    pub lifted: Segment,
}

pub fn lift_family(family: &[Segment], h: &Hyperplane) -> Result<Vec<LiftRecord>> {
    let n = h.ambient_dim();
    family
        .iter()
        .map(|s| {
            check_dim(n, s.dim())?;
            let x_theta = h.coordinates(&line_hyperplane_intersection(s, h)?);
            let center = DVector::from_iterator(2 * n - 1, s.center().iter().chain(x_theta.iter()).copied());
            let dir = DVector::from_iterator(
                2 * n - 1,
                s.direction().as_vector().iter().copied().chain(std::iter::repeat_n(0.0, n - 1)),
            );
            let lifted = Segment::new(center, Direction::new(dir)?, s.length())?;
            Ok(LiftRecord { original: s.clone(), x_theta, lifted })
        })
        .collect()
}

/// Projection onto the first n coordinates of ℝ^{2n−1}.
pub fn gamma0(n: usize) -> Result<GrassmannElement> {
    if n < 2 {
        return Err(argument("n must be at least 2"));
    }
    GrassmannElement::coordinate(2 * n - 1, &(0..n).collect::<Vec<_>>())
}

/// `g` rotated by `exp(A)` for a seeded random skew `A` of spectral norm
/// `delta`; every principal angle to `g` is at most `delta`.
pub fn perturb_gamma(g: &GrassmannElement, delta: f64, seed: u64) -> Result<GrassmannElement> {
    if !(0.0..0.5).contains(&delta) {
        return Err(argument(format!("delta must lie in [0, 0.5), got {delta}")));
    }
    if delta == 0.0 {
        return Ok(g.clone());
    }
    let m = g.ambient_dim();
    let mut r = rng::stream(seed, 0);
    let raw = DMatrix::from_fn(m, m, |_, _| -> f64 { StandardNormal.sample(&mut r) });
    let skew = (&raw - raw.transpose()) * 0.5;
    let norm = skew.clone().svd(false, false).singular_values.max();
    if norm == 0.0 {
        return Ok(g.clone());
    }
    let rotation = (skew * (delta / norm)).exp();
    Ok(GrassmannElement::from_orthonormal_matrix(rotation * g.basis()))
}

/// The affine subspace `H̃ = {(p, coords_H(p)) : p ∈ H}` and its
/// orthogonal complement.
#[derive(Debug, Clone, PartialEq)]
pub struct HTilde {
    base: DVector<f64>,
    perp: GrassmannElement,
}

impl HTilde {
    pub fn new(h: &Hyperplane) -> Result<Self> {
        let n = h.ambient_dim();
        let m = 2 * n - 1;
        let nu = h.normal().as_vector();
        // H̃'s direction space is cut out by ⟨ν, x⟩ = 0 and y_k = ⟨b_k, x⟩
        let mut rows = vec![DVector::from_iterator(m, nu.iter().copied().chain(std::iter::repeat_n(0.0, n - 1)))];
        for (k, b) in h.basis().iter().enumerate() {
            let mut r = DVector::zeros(m);
            for i in 0..n {
                r[i] = -b[i];
            }
            r[n + k] = 1.0;
            rows.push(r);
        }
        let mut base = DVector::zeros(m);
        for i in 0..n {
            base[i] = h.offset() * nu[i];
        }
        Ok(HTilde { base, perp: GrassmannElement::from_spanning(&rows)? })
    }

    pub fn base(&self) -> &DVector<f64> {
        &self.base
    }

    /// Orthonormal basis of `H̃^⊥` as a subspace of ℝ^{2n−1}.
    pub fn perp(&self) -> &GrassmannElement {
        &self.perp
    }

    /// Distance between the extended lifted line and `H̃`.
    pub fn line_residual(&self, lifted: &Segment) -> Result<f64> {
        let p = self.perp.project(&(lifted.center() - &self.base))?;
        let d = self.perp.project(lifted.direction().as_vector())?;
        let dd = d.norm_squared();
        let t = if dd > 0.0 { -p.dot(&d) / dd } else { 0.0 };
        Ok((p + d * t).norm())
    }

    /// Images under `x ↦ π_{H̃⊥}(x − base)`; their lines pass through 0.
    pub fn project(&self, records: &[LiftRecord]) -> Result<Vec<Segment>> {
        records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let (a, b) = r.lifted.endpoints();
                let pa = self.perp.project(&(a - &self.base))?;
                let pb = self.perp.project(&(b - &self.base))?;
                if (&pb - &pa).norm() < DEGENERATE_LENGTH {
                    return Err(Error::DegenerateImage(i));
                }
                Segment::from_endpoints(&pa, &pb)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangementReport {
    /// Per kept record: largest distance between corresponding points of
    /// the projected and original segments (attained at an endpoint).
    pub displacements: Vec<f64>,
    pub max_displacement: f64,
    pub epsilon_target: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// `(record index, image)` for every non-degenerate image.
    pub images: Vec<(usize, Segment)>,
    pub degenerate: Vec<usize>,
    /// `F(θ)`: direction of each image, aligned with `images`.
    pub direction_map: Vec<Direction>,
    /// Largest `|F(θ) − F(θ')| / |θ − θ'|` over nearest sampled neighbours.
    pub lipschitz_proxy: f64,
    pub report: Option<RearrangementReport>,
}

/// Projects lifted segments through `g`. When `g` maps into ℝⁿ with n the
/// original dimension, the images are compared with the originals against
/// `epsilon_target`.
pub fn project_family(records: &[LiftRecord], g: &GrassmannElement, epsilon_target: f64) -> Result<Projection> {
    let mut images = Vec::new();
    let mut degenerate = Vec::new();
    for (i, r) in records.iter().enumerate() {
        check_dim(g.ambient_dim(), r.lifted.dim())?;
        let (a, b) = r.lifted.endpoints();
        let (pa, pb) = (g.project(&a)?, g.project(&b)?);
        if (&pb - &pa).norm() < DEGENERATE_LENGTH {
            degenerate.push(i);
        } else {
            images.push((i, Segment::from_endpoints(&pa, &pb)?));
        }
    }
    let direction_map: Vec<Direction> = images.iter().map(|(_, s)| s.direction().clone()).collect();
    let thetas: Vec<&Direction> = images.iter().map(|(i, _)| records[*i].original.direction()).collect();
    let mut lipschitz_proxy: f64 = 0.0;
    for i in 0..thetas.len() {
        let nearest = (0..thetas.len())
            .filter(|&j| j != i)
            .map(|j| (j, (thetas[i].as_vector() - thetas[j].as_vector()).norm()))
            .filter(|(_, d)| *d > 0.0)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((j, d)) = nearest {
            let df = (direction_map[i].as_vector() - direction_map[j].as_vector()).norm();
            lipschitz_proxy = lipschitz_proxy.max(df / d);
        }
    }
    let report = match records.first() {
        Some(r) if g.sub_dim() == r.original.dim() => {
            let displacements: Vec<f64> = images
                .iter()
                .map(|(i, s)| {
                    let (a, b) = records[*i].original.endpoints();
                    let (c, d) = s.endpoints();
                    (&c - a).norm().max((&d - b).norm())
                })
                .collect();
            let max_displacement = displacements.iter().cloned().fold(0.0, f64::max);
            Some(RearrangementReport {
                passed: displacements.iter().all(|&d| d < epsilon_target),
                displacements,
                max_displacement,
                epsilon_target,
            })
        }
        _ => None,
    };
    Ok(Projection { images, degenerate, direction_map, lipschitz_proxy, report })
}

/// A family assigning at most one segment to each direction.
pub trait SegmentFamily: Sync {
    fn dim(&self) -> usize;
    fn segment(&self, theta: &Direction) -> Option<Segment>;
}

/// Unit-direction segments of length `length` centered at `offset·θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialFamily {
    pub n: usize,
    pub offset: f64,
    pub length: f64,
}

impl RadialFamily {
    pub fn centered(n: usize) -> Self {
        RadialFamily { n, offset: 0.0, length: 1.0 }
    }
}

impl SegmentFamily for RadialFamily {
    fn dim(&self) -> usize {
        self.n
    }

    fn segment(&self, theta: &Direction) -> Option<Segment> {
        Segment::new(theta.as_vector() * self.offset, theta.clone(), self.length).ok()
    }
}

/// Finitely many segments; a direction is served only by a segment parallel
/// to it within 1e−12.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFamily(pub Vec<Segment>);

impl SegmentFamily for FiniteFamily {
    fn dim(&self) -> usize {
        self.0.first().map_or(0, |s| s.dim())
    }

    fn segment(&self, theta: &Direction) -> Option<Segment> {
        self.0.iter().find(|s| 1.0 - s.direction().dot(theta.as_vector()).abs() < 1e-12).cloned()
    }
}

/// Radii of the part of a segment lying on the ray through `theta`, and the
/// radii of the whole segment.
fn radial_ranges(s: &Segment, theta: &Direction) -> ((f64, f64), (f64, f64)) {
    let c = theta.dot(s.center());
    let half = s.length() / 2.0;
    let (t0, t1) = (c - half, c + half);
    let ray = (t0.max(0.0), t1);
    let all = if t0 <= 0.0 && t1 >= 0.0 { (0.0, t0.abs().max(t1.abs())) } else { (t0.abs().min(t1.abs()), t0.abs().max(t1.abs())) };
    (ray, all)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusDecomposition {
    pub shell_width: f64,
    /// `k ↦` indices of sampled directions whose segment meets shell `k`.
    pub shells: BTreeMap<usize, Vec<usize>>,
    /// Largest occupied shell.
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaghettiWitness {
    pub decomposition: AnnulusDecomposition,
    pub directions: Vec<Direction>,
    pub shell: usize,
    pub subcap: DirectionSet,
    /// Sampled directions inside the sub-cap, all covering the shell.
    pub subcap_members: Vec<usize>,
    /// Sector points on sampled directions.
    pub sector_samples: Vec<Point>,
    /// Largest distance from a sector sample to its family segment.
    pub max_sample_distance: f64,
    /// Largest distance from a continuum sector point to the sampled
    /// family: the ε-thickening fails to cover the sector for any smaller ε.
    pub largest_failing_eps: f64,
}

impl SpaghettiWitness {
    pub fn inner_radius(&self) -> f64 {
        self.shell as f64 * SHELL_WIDTH
    }

    pub fn outer_radius(&self) -> f64 {
        (self.shell + 1) as f64 * SHELL_WIDTH
    }

    /// Radial segments across the witnessed shell on `count` quasi-uniform
    /// directions of the sub-cap; a skeleton of the open sector.
    pub fn sector_skeleton(&self, count: usize) -> Vec<Segment> {
        let (r0, r1) = (self.inner_radius(), self.outer_radius());
        self.subcap
            .samples(count)
            .into_iter()
            .map(|d| Segment::new(d.as_vector() * ((r0 + r1) / 2.0), d, r1 - r0).expect("positive length"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaghettiConfig {
    pub direction_samples: usize,
    pub sector_samples: usize,
    /// Fewest sampled directions a witnessing sub-cap must hold.
    pub min_members: usize,
    pub seed: u64,
}

impl Default for SpaghettiConfig {
    fn default() -> Self {
        SpaghettiConfig { direction_samples: 1000, sector_samples: 1000, min_members: 8, seed: 0 }
    }
}

/// Searches for a shell `k` and a sub-cap of `cap` on which every sampled
/// direction's segment covers the whole radial range of shell `k` on its
/// own ray; the open sector over that sub-cap then lies in the family.
pub fn spaghetti_check(
    family: &dyn SegmentFamily,
    cap: &DirectionSet,
    cfg: &SpaghettiConfig,
) -> Result<SpaghettiWitness> {
    check_dim(cap.dim(), family.dim())?;
    let directions = cap.samples(cfg.direction_samples);
    let mut segments = Vec::with_capacity(directions.len());
    for d in &directions {
        let s = family.segment(d).ok_or_else(|| {
            Error::Inconclusive("family has no segment for a sampled direction of the cap".into())
        })?;
        if s.line_distance_to(&Point::zeros(d.dim())) > RADIAL_TOL {
            return Err(argument("family lines must pass through the origin"));
        }
        segments.push(s);
    }
    let shell_of = |r: f64| (r / SHELL_WIDTH).floor() as usize;
    let mut shells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut covering: BTreeMap<usize, Vec<bool>> = BTreeMap::new();
    for (i, (s, d)) in segments.iter().zip(&directions).enumerate() {
        let (ray, all) = radial_ranges(s, d);
        // shells meet the half-open radial range [k/2, (k+1)/2)
        let last = if all.1 > all.0 {
            shell_of(all.1 - SHELL_TOL * all.1.max(1.0)).max(shell_of(all.0))
        } else {
            shell_of(all.1)
        };
        for k in shell_of(all.0)..=last {
            shells.entry(k).or_default().push(i);
        }
        if ray.1 > ray.0 {
            let first = (ray.0 / SHELL_WIDTH - SHELL_TOL * ray.1.max(1.0)).ceil().max(0.0) as usize;
            let end = (ray.1 / SHELL_WIDTH + SHELL_TOL * ray.1.max(1.0)).floor() as usize;
            for k in first..end {
                covering.entry(k).or_insert_with(|| vec![false; directions.len()])[i] = true;
            }
        }
    }
    let n_max = shells.keys().next_back().copied().unwrap_or(0);
    let decomposition = AnnulusDecomposition { shell_width: SHELL_WIDTH, shells, n_max };

    // widest sub-cap free of non-covering samples, over all shells
    let mut best: Option<(usize, usize, f64)> = None;
    for (&k, cov) in &covering {
        for (i, d) in directions.iter().enumerate().filter(|(i, _)| cov[*i]) {
            let to_edge = cap.radius() - spherical_distance(d, cap.center())?;
            let mut r = to_edge;
            for (j, e) in directions.iter().enumerate() {
                if !cov[j] {
                    r = r.min(spherical_distance(d, e)?);
                }
            }
            if r > 0.0 && best.is_none_or(|(_, _, b)| r > b) {
                best = Some((k, i, r));
            }
        }
    }
    let (shell, centre, radius) =
        best.ok_or_else(|| Error::Inconclusive("no shell is covered on an open set of sampled directions".into()))?;
    let subcap = DirectionSet::new(directions[centre].clone(), radius.min(cap.radius()))?;
    let subcap_members: Vec<usize> = (0..directions.len()).filter(|&j| subcap.contains(&directions[j])).collect();
    if subcap_members.len() < cfg.min_members {
        return Err(Error::Inconclusive(format!(
            "best sub-cap holds {} sampled directions, need {}",
            subcap_members.len(),
            cfg.min_members
        )));
    }

    let (r0, r1) = (shell as f64 * SHELL_WIDTH, (shell + 1) as f64 * SHELL_WIDTH);
    let mut r = rng::stream(cfg.seed, 0);
    let mut sector_samples = Vec::with_capacity(cfg.sector_samples);
    let mut max_sample_distance: f64 = 0.0;
    for _ in 0..cfg.sector_samples {
        let j = subcap_members[r.random_range(0..subcap_members.len())];
        let t = r0 + (r1 - r0) * open_unit(&mut r);
        let p = directions[j].as_vector() * t;
        max_sample_distance = max_sample_distance.max(segments[j].distance_to(&p));
        sector_samples.push(p);
    }
    let probes = subcap.samples(cfg.sector_samples);
    let mut largest_failing_eps: f64 = 0.0;
    for d in probes {
        let p = d.as_vector() * (r0 + (r1 - r0) * open_unit(&mut r));
        let nearest = subcap_members.iter().map(|&j| segments[j].distance_to(&p)).fold(f64::INFINITY, f64::min);
        largest_failing_eps = largest_failing_eps.max(nearest);
    }
    Ok(SpaghettiWitness {
        decomposition,
        directions,
        shell,
        subcap,
        subcap_members,
        sector_samples,
        max_sample_distance,
        largest_failing_eps,
    })
}

fn open_unit(r: &mut rng::Rng) -> f64 {
    loop {
        let u: f64 = r.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Convenience: the standard lift/project pipeline input, `count` quasi-uniform
/// unit segments with directions in the default cap around `e₁`, centered at
/// seeded points of `B(0, 1)`.
pub fn sample_family(n: usize, count: usize, seed: u64) -> Result<(DirectionSet, Vec<Segment>)> {
    let cap = DirectionSet::new(Direction::axis(n, 0), DEFAULT_MARGIN.acos())?;
    let centers = crate::constructions::random_ball(n, count, 1.0, seed);
    let segs = cap
        .samples(count)
        .into_iter()
        .zip(centers)
        .map(|(d, c)| Segment::unit(c, d))
        .collect::<Result<Vec<_>>>()?;
    Ok((cap, segs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point;

    #[test]
    fn restrict_on_circle() {
        let fam: Vec<Segment> = uniform_directions(2, 2000, 1)
            .into_iter()
            .map(|d| Segment::unit(Point::zeros(2), d).unwrap())
            .collect();
        let (cap, kept) = restrict_directions(&fam, &default_hyperplane(2), 0.5).unwrap();
        assert!(kept.iter().all(|s| s.direction()[0] >= 0.5));
        assert!((cap.radius() - 0.5f64.acos()).abs() < 1e-15);
        // arc fraction of |cos| ≥ 1/2 is 2/3
        let frac = kept.len() as f64 / 2000.0;
        assert!((frac - 2.0 / 3.0).abs() < 3.0 * (2.0 / 9.0 / 2000.0f64).sqrt());
    }

    #[test]
    fn restrict_all_parallel_fails() {
        let fam = vec![Segment::unit(Point::zeros(2), Direction::axis(2, 1)).unwrap()];
        assert!(matches!(
            restrict_directions(&fam, &default_hyperplane(2), 0.5),
            Err(Error::EmptySelection(_))
        ));
    }

    #[test]
    fn lift_hand_example() {
        let s = Segment::unit(point(&[0.5, 0.3]), Direction::axis(2, 0)).unwrap();
        let rec = &lift_family(&[s], &default_hyperplane(2)).unwrap()[0];
        assert!((rec.x_theta[0] - 0.3).abs() < 1e-15);
        let c = rec.lifted.center();
        assert!((c - point(&[0.5, 0.3, 0.3])).norm() < 1e-15);
        assert_eq!(rec.lifted.direction()[2], 0.0);
    }

    #[test]
    fn lift_through_origin_is_flat() {
        let s = Segment::unit(point(&[0.2, 0.1, -0.3]) * 0.0, Direction::from_slice(&[0.8, 0.6, 0.0]).unwrap()).unwrap();
        let rec = &lift_family(&[s], &default_hyperplane(3)).unwrap()[0];
        assert!(rec.x_theta.norm() < 1e-15);
    }

    #[test]
    fn chart_round_trip() {
        let cap = DirectionSet::new(Direction::from_slice(&[0.0, 0.6, 0.8]).unwrap(), 0.7).unwrap();
        for d in cap.samples(50) {
            assert!(cap.contains(&d));
            let y = cap.chart(&d);
            assert!(y.norm() < 1.0);
            assert!((cap.inverse_chart(&y).unwrap().as_vector() - d.as_vector()).norm() < 1e-12);
        }
    }

    #[test]
    fn gamma0_recovers_originals() {
        let (_, fam) = sample_family(3, 40, 2).unwrap();
        let recs = lift_family(&fam, &default_hyperplane(3)).unwrap();
        let p = project_family(&recs, &gamma0(3).unwrap(), 1e-9).unwrap();
        let rep = p.report.unwrap();
        assert!(rep.passed && rep.max_displacement < 1e-12);
    }

    #[test]
    fn perturbation_angles_bounded() {
        let g = gamma0(3).unwrap();
        let h = perturb_gamma(&g, 0.01, 5).unwrap();
        assert!(g.principal_angles(&h).unwrap().iter().all(|&a| a <= 0.01 + 1e-12));
        assert!(g.distance(&h).unwrap() > 0.0);
        assert!(g.distance(&perturb_gamma(&g, 0.01, 6).unwrap()).unwrap() > 0.0);
        assert_eq!(perturb_gamma(&g, 0.0, 5).unwrap(), g);
    }

    #[test]
    fn h_tilde_residuals() {
        for n in [2, 3] {
            let (_, fam) = sample_family(n, 100, 3).unwrap();
            let h = default_hyperplane(n);
            let ht = HTilde::new(&h).unwrap();
            let recs = lift_family(&fam, &h).unwrap();
            for r in &recs {
                assert!(ht.line_residual(&r.lifted).unwrap() < 1e-10);
            }
            for s in ht.project(&recs).unwrap() {
                assert!(s.line_distance_to(&Point::zeros(n)) < 1e-9);
            }
        }
    }

    #[test]
    fn spaghetti_centered_and_pushed() {
        let cap = DirectionSet::new(Direction::axis(2, 0), 0.3).unwrap();
        let cfg = SpaghettiConfig { direction_samples: 200, sector_samples: 200, ..Default::default() };
        let w = spaghetti_check(&RadialFamily::centered(2), &cap, &cfg).unwrap();
        assert_eq!(w.shell, 0);
        assert!(w.max_sample_distance <= 1e-9);
        let pushed = RadialFamily { n: 2, offset: 10.0, length: 1.0 };
        let w = spaghetti_check(&pushed, &cap, &cfg).unwrap();
        assert!(w.shell == 19 || w.shell == 20);
        assert_eq!(w.decomposition.n_max, 20);
    }

    #[test]
    fn spaghetti_finite_family_inconclusive() {
        let cap = DirectionSet::new(Direction::axis(2, 0), 0.3).unwrap();
        let fam = FiniteFamily(vec![Segment::unit(Point::zeros(2), Direction::axis(2, 0)).unwrap()]);
        assert!(matches!(spaghetti_check(&fam, &cap, &SpaghettiConfig::default()), Err(Error::Inconclusive(_))));
    }
}
