//! Generators: equi-angular fans, slab families on pages, recursive books
//! and an adversarial placement search.

use nalgebra::DVector;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::geometry::{point, Direction, PageFamily, Point, Profile, Segment, Tube};
use crate::rng;
use crate::union_measure::{exact_union_area_2d, Schedule, TubeFamily};

/// Radius of the region adversarial centers may occupy.
pub const ADVERSARIAL_RADIUS: f64 = 2.0;
/// Initial Gaussian step of the adversarial search.
pub const ADVERSARIAL_STEP: f64 = 0.05;
/// Step multiplier after a rejected proposal.
pub const ADVERSARIAL_DECAY: f64 = 0.9;
/// Default uniform bound of a book.
pub const DEFAULT_BOUND_C: f64 = 2.0;

/// Where the tube centers go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlacementSpec {
    ThroughOrigin,
    RandomBall { radius: f64, seed: u64 },
    Explicit { centers: Vec<Vec<f64>> },
    Adversarial { iterations: usize, seed: u64 },
}

impl PlacementSpec {
    /// Centers for `count` tubes in ℝⁿ. Adversarial placements are planar
    /// and resolved by [`build_fan`].
    fn centers(&self, n: usize, count: usize) -> Result<Vec<Point>> {
        match self {
            PlacementSpec::ThroughOrigin => Ok(vec![Point::zeros(n); count]),
            PlacementSpec::RandomBall { radius, seed } => {
                if !(*radius >= 0.0 && radius.is_finite()) {
                    return Err(argument(format!("radius must be nonnegative, got {radius}")));
                }
                Ok(random_ball(n, count, *radius, *seed))
            }
            PlacementSpec::Explicit { centers } => {
                if centers.len() != count {
                    return Err(argument(format!("{} centers given for {count} tubes", centers.len())));
                }
                centers
                    .iter()
                    .map(|c| {
                        crate::error::check_dim(n, c.len())?;
                        Ok(point(c))
                    })
                    .collect()
            }
            PlacementSpec::Adversarial { .. } => Err(argument("adversarial placement is resolved by build_fan")),
        }
    }
}

/// `count` points uniform in the ball `B(0, radius) ⊂ ℝⁿ`, from stream 0 of `seed`.
pub fn random_ball(n: usize, count: usize, radius: f64, seed: u64) -> Vec<Point> {
    let mut r = rng::stream(seed, 0);
    (0..count)
        .map(|_| {
            let g = DVector::from_fn(n, |_, _| -> f64 { StandardNormal.sample(&mut r) });
            let norm = g.norm();
            let scale = radius * r.random::<f64>().powf(1.0 / n as f64);
            if norm > 0.0 {
                g * (scale / norm)
            } else {
                Point::zeros(n)
            }
        })
        .collect()
}

/// Planar tubes `T_i` of length 1 and width `eps` at angles `i·ε^α`,
/// `i = 0..=⌊c/ε^α⌋`, centered per `placement`.
pub fn build_fan(alpha: f64, c: f64, eps: f64, placement: &PlacementSpec) -> Result<TubeFamily> {
    let schedule = Schedule::new(alpha, c, eps)?;
    let centers = match placement {
        PlacementSpec::Adversarial { iterations, seed } => {
            adversarial_placement(alpha, c, eps, *iterations, *seed)?.centers
        }
        p => p.centers(2, schedule.count())?,
    };
    fan_with_centers(schedule, &centers)
}

fn fan_with_centers(schedule: Schedule, centers: &[Point]) -> Result<TubeFamily> {
    let angles: Vec<f64> = (0..schedule.count()).map(|i| schedule.angle(i)).collect();
    let tubes = angles
        .iter()
        .zip(centers)
        .map(|(&t, c)| Tube::planar(Segment::unit(c.clone(), Direction::from_angle(t))?, schedule.eps))
        .collect::<Result<Vec<_>>>()?;
    Ok(TubeFamily::scheduled(tubes, schedule, angles))
}

/// Slabs in ℝⁿ: for `i = 0..=⌊c/ε^α⌋` the ε-thickening of a unit
/// (n−1)-cube lying in the page of angle `i·ε^α` of `pages`, centered per
/// `placement`.
pub fn build_slab_family(
    pages: &PageFamily,
    alpha: f64,
    c: f64,
    eps: f64,
    placement: &PlacementSpec,
) -> Result<TubeFamily> {
    let n = pages.dim();
    let schedule = Schedule::new(alpha, c, eps)?;
    let centers = placement.centers(n, schedule.count())?;
    let mut angles = Vec::with_capacity(schedule.count());
    let mut tubes = Vec::with_capacity(schedule.count());
    for (i, center) in centers.into_iter().enumerate() {
        let t = schedule.angle(i);
        let mut basis = pages.page_basis(t).into_iter();
        let core_dir = Direction::new(basis.next().expect("page has a tangent"))?;
        let mut frame = vec![pages.normal_at(t)];
        for b in basis {
            frame.push(Direction::new(b)?);
        }
        tubes.push(Tube::new(Segment::unit(center, core_dir)?, eps, frame, Profile::Slab)?);
        angles.push(t);
    }
    Ok(TubeFamily::scheduled(tubes, schedule, angles))
}

/// Page offsets of a book.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Offsets {
    /// Every page passes through the origin; in ℝ³ all pages share one axis.
    Zero,
    /// Offsets uniform in a ball sized to keep the book inside `B(0, C)`.
    Random { seed: u64 },
}

/// Parameters of a discretized Kakeya book.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BookSpec {
    pub n: usize,
    /// Page angle spacing; pages sit at `0, step, …, ⌊2π/step⌋·step`.
    pub angle_step: f64,
    pub alpha: f64,
    /// In-page angular range of the planar leaves.
    pub c: f64,
    pub eps: f64,
    pub offsets: Offsets,
    pub bound_c: f64,
}

impl BookSpec {
    /// The default schedule: leaves on `ε^α` steps over `[0, π]`, pages on
    /// `ε^β` steps with `β = α²`, random offsets, `C = 2`.
    pub fn standard(n: usize, alpha: f64, eps: f64, seed: u64) -> Self {
        BookSpec {
            n,
            angle_step: eps.powf(alpha * alpha),
            alpha,
            c: std::f64::consts::PI,
            eps,
            offsets: Offsets::Random { seed },
            bound_c: DEFAULT_BOUND_C,
        }
    }
}

/// A page of a book: its angle, its offset and the lower-dimensional book
/// it carries, in page coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BookPage {
    pub angle: f64,
    pub offset: Point,
    pub book: KakeyaBook,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BookLeaves {
    Fan(TubeFamily),
    Pages(Vec<BookPage>),
}

/// A finite Kakeya book: a planar fan for n = 2, otherwise sampled pages of
/// the standard page family each carrying an (n−1)-book.
#[derive(Debug, Clone, PartialEq)]
pub struct KakeyaBook {
    dim: usize,
    pages: Option<PageFamily>,
    leaves: BookLeaves,
    bound_c: f64,
    eps: f64,
}

/// Norm bound for any point of a leaf rod in ℝⁿ before offsets: a centered
/// unit segment thickened by ε/2 along n−1 orthogonal axes.
fn leaf_radius(n: usize, eps: f64) -> f64 {
    (0.25 + (n - 1) as f64 * eps * eps / 4.0).sqrt()
}

pub fn build_book(spec: &BookSpec) -> Result<KakeyaBook> {
    if spec.n < 2 {
        return Err(argument(format!("books need n ≥ 2, got {}", spec.n)));
    }
    if !(spec.angle_step > 0.0) {
        return Err(argument("angle_step must be positive"));
    }
    let slack = spec.bound_c - leaf_radius(spec.n, spec.eps);
    if !(slack >= 0.0) {
        return Err(argument(format!("bound_c = {} cannot hold unit leaves", spec.bound_c)));
    }
    // Offsets of the n−2 levels and the leaf add up by the triangle
    // inequality, page normals being orthogonal to everything below them.
    let levels = spec.n.saturating_sub(2).max(1) as f64;
    let offset_radius = (spec.bound_c / 2.0).min(slack / levels);
    build_level(spec, spec.n, offset_radius, 0)
}

fn build_level(spec: &BookSpec, k: usize, offset_radius: f64, path: u64) -> Result<KakeyaBook> {
    if k == 2 {
        let fan = build_fan(spec.alpha, spec.c, spec.eps, &PlacementSpec::ThroughOrigin)?;
        return Ok(KakeyaBook {
            dim: 2,
            pages: None,
            leaves: BookLeaves::Fan(fan),
            bound_c: spec.bound_c,
            eps: spec.eps,
        });
    }
    let pages = PageFamily::standard(k)?;
    let count = (std::f64::consts::TAU / spec.angle_step).floor() as usize + 1;
    let offsets: Vec<Point> = match spec.offsets {
        Offsets::Zero => vec![Point::zeros(k); count],
        Offsets::Random { seed } => random_ball(k, count, offset_radius, rng::derive(seed, path)),
    };
    let mut out = Vec::with_capacity(count);
    for (i, offset) in offsets.into_iter().enumerate() {
        let angle = i as f64 * spec.angle_step;
        let sub = rng::derive(path, i as u64 + 1);
        let book = build_level(spec, k - 1, offset_radius, sub)?;
        out.push(BookPage { angle, offset, book });
    }
    Ok(KakeyaBook { dim: k, pages: Some(pages), leaves: BookLeaves::Pages(out), bound_c: spec.bound_c, eps: spec.eps })
}

/// A leaf tube mapped into ambient coordinates: its core and a frame whose
/// first vector is the leaf's planar thin axis.
struct PlacedLeaf {
    core: Segment,
    frame: Vec<DVector<f64>>,
}

impl KakeyaBook {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pages(&self) -> Option<&PageFamily> {
        self.pages.as_ref()
    }

    pub fn leaves(&self) -> &BookLeaves {
        &self.leaves
    }

    pub fn bound_c(&self) -> f64 {
        self.bound_c
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn placed(&self) -> Result<Vec<PlacedLeaf>> {
        match &self.leaves {
            BookLeaves::Fan(f) => Ok(f
                .tubes()
                .iter()
                .map(|t| PlacedLeaf { core: t.core().clone(), frame: vec![t.frame()[0].as_vector().clone()] })
                .collect()),
            BookLeaves::Pages(list) => {
                let pages = self.pages.as_ref().expect("paged book has a page family");
                let mut out = Vec::new();
                for page in list {
                    let basis = pages.page_basis(page.angle);
                    let normal = pages.normal_at(page.angle).into_vector();
                    let map = |x: &DVector<f64>| -> DVector<f64> {
                        basis.iter().zip(x.iter()).fold(DVector::zeros(self.dim), |acc, (b, &c)| acc + b * c)
                    };
                    for leaf in page.book.placed()? {
                        let center = map(leaf.core.center()) + &page.offset;
                        let dir = Direction::new(map(leaf.core.direction().as_vector()))?;
                        let core = Segment::new(center, dir, leaf.core.length())?;
                        let mut frame: Vec<DVector<f64>> = leaf.frame.iter().map(map).collect();
                        frame.push(normal.clone());
                        out.push(PlacedLeaf { core, frame });
                    }
                }
                Ok(out)
            }
        }
    }

    /// Every leaf segment in ambient coordinates.
    pub fn segments(&self) -> Result<Vec<Segment>> {
        Ok(self.placed()?.into_iter().map(|l| l.core).collect())
    }

    /// The ε-rods around every leaf segment: cross-section ε×…×ε with the
    /// leaf's planar thin axis and the page normals as frame, so that a
    /// single page contributes its planar union times ε^{n−2}.
    pub fn tubes(&self) -> Result<Vec<Tube>> {
        self.placed()?
            .into_iter()
            .map(|l| {
                let frame = l.frame.into_iter().map(Direction::new).collect::<Result<Vec<_>>>()?;
                Tube::new(l.core, self.eps, frame, Profile::Rod)
            })
            .collect()
    }

    /// Largest norm of any point of any tube (exact over tube vertices).
    pub fn max_point_norm(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for t in self.tubes()? {
            let c = t.core().center();
            let half = t.half_extents();
            let axes = t.axes();
            // the farthest vertex maximizes each |⟨x, a_k⟩| term independently
            let mut s = 0.0;
            for (a, h) in axes.iter().zip(&half) {
                let p = a.dot(c);
                s += (p.abs() + h).powi(2);
            }
            worst = worst.max(s.sqrt());
        }
        Ok(worst)
    }
}

/// Result of [`adversarial_placement`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialOutcome {
    pub centers: Vec<Point>,
    /// Union area after each iteration; iteration 0 is the initial placement.
    pub objective: Vec<f64>,
    pub accepted: usize,
}

impl AdversarialOutcome {
    pub fn placement(&self) -> PlacementSpec {
        PlacementSpec::Explicit { centers: self.centers.iter().map(|c| c.iter().copied().collect()).collect() }
    }
}

/// Hill descent on tube centers minimizing the exact union area of the fan.
///
/// Starts from `random_ball(1, seed)`. Each of the `iterations − 1` steps
/// moves one tube by a Gaussian step, rejecting moves that leave
/// `B(0, 2)` or do not strictly decrease the area; each rejection shrinks
/// the step by 0.9.
pub fn adversarial_placement(
    alpha: f64,
    c: f64,
    eps: f64,
    iterations: usize,
    seed: u64,
) -> Result<AdversarialOutcome> {
    if iterations == 0 {
        return Err(argument("iterations must be at least 1"));
    }
    let schedule = Schedule::new(alpha, c, eps)?;
    let count = schedule.count();
    let mut centers = random_ball(2, count, 1.0, seed);
    let mut current = exact_union_area_2d(&fan_with_centers(schedule, &centers)?)?.value;
    let mut objective = vec![current];
    let mut step = ADVERSARIAL_STEP;
    let mut accepted = 0;
    let mut r = rng::stream(seed, 1);
    for _ in 1..iterations {
        let k = r.random_range(0..count);
        let dx: f64 = StandardNormal.sample(&mut r);
        let dy: f64 = StandardNormal.sample(&mut r);
        let proposal = &centers[k] + point(&[dx * step, dy * step]);
        let mut improved = false;
        if proposal.norm() <= ADVERSARIAL_RADIUS {
            let old = std::mem::replace(&mut centers[k], proposal);
            let value = exact_union_area_2d(&fan_with_centers(schedule, &centers)?)?.value;
            if value < current {
                current = value;
                accepted += 1;
                improved = true;
            } else {
                centers[k] = old;
            }
        }
        if !improved {
            step *= ADVERSARIAL_DECAY;
        }
        objective.push(current);
    }
    Ok(AdversarialOutcome { centers, objective, accepted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn fan_count_and_angles() {
        let f = build_fan(0.5, FRAC_PI_2, 1.0 / 16.0, &PlacementSpec::ThroughOrigin).unwrap();
        assert_eq!(f.len(), 7);
        for (k, t) in f.tubes().iter().enumerate() {
            let want = k as f64 / 4.0;
            assert!((f.angles()[k] - want).abs() < 1e-12);
            let d = t.core().direction();
            assert!((d[1].atan2(d[0]) - want).abs() < 1e-12);
            assert!(t.core().center().norm() == 0.0);
        }
    }

    #[test]
    fn fan_degenerate_single_tube() {
        let f = build_fan(0.5, 0.1, 0.25, &PlacementSpec::ThroughOrigin).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.angles()[0], 0.0);
    }

    #[test]
    fn fan_rejects_bad_ranges() {
        assert!(build_fan(1.0, 1.0, 0.1, &PlacementSpec::ThroughOrigin).is_err());
        assert!(build_fan(0.5, 7.0, 0.1, &PlacementSpec::ThroughOrigin).is_err());
        assert!(build_fan(0.5, 1.0, 1.5, &PlacementSpec::ThroughOrigin).is_err());
    }

    #[test]
    fn random_ball_is_seeded_and_bounded() {
        let a = random_ball(3, 50, 1.5, 9);
        assert_eq!(a, random_ball(3, 50, 1.5, 9));
        assert!(a.iter().all(|p| p.norm() <= 1.5));
    }

    #[test]
    fn slab_family_lies_on_pages() {
        let pages = PageFamily::standard(3).unwrap();
        let f = build_slab_family(&pages, 0.5, 1.0, 0.1, &PlacementSpec::ThroughOrigin).unwrap();
        for (t, &a) in f.tubes().iter().zip(f.angles()) {
            let nrm = pages.normal_at(a);
            assert!(nrm.dot(t.core().direction().as_vector()).abs() < 1e-12);
            assert!((t.measure() - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn two_book_is_the_fan() {
        let spec = BookSpec { n: 2, ..BookSpec::standard(2, 0.5, 0.1, 1) };
        let book = build_book(&spec).unwrap();
        let fan = build_fan(0.5, std::f64::consts::PI, 0.1, &PlacementSpec::ThroughOrigin).unwrap();
        assert_eq!(book.leaves(), &BookLeaves::Fan(fan));
    }

    #[test]
    fn open_book_pages_through_origin() {
        let spec = BookSpec { offsets: Offsets::Zero, ..BookSpec::standard(3, 0.8, 0.125, 0) };
        let book = build_book(&spec).unwrap();
        let BookLeaves::Pages(pages) = book.leaves() else { panic!() };
        let fan = build_fan(0.8, std::f64::consts::PI, 0.125, &PlacementSpec::ThroughOrigin).unwrap();
        let segs = book.segments().unwrap();
        assert_eq!(segs.len(), pages.len() * fan.len());
        let family = book.pages().unwrap();
        for (k, s) in segs.iter().enumerate() {
            assert!(s.center().norm() < 1e-15);
            let nrm = family.normal_at(pages[k / fan.len()].angle);
            assert!(nrm.dot(s.direction().as_vector()).abs() < 1e-12);
        }
        assert!(book.max_point_norm().unwrap() <= spec.bound_c);
    }

    #[test]
    fn random_book_is_bounded() {
        for n in 3..=4 {
            let spec = BookSpec::standard(n, 0.8, 0.25, 17);
            let book = build_book(&spec).unwrap();
            assert!(book.max_point_norm().unwrap() <= 2.0);
            for s in book.segments().unwrap() {
                let (a, b) = s.endpoints();
                assert!(a.norm() <= 2.0 && b.norm() <= 2.0);
            }
        }
    }

    #[test]
    fn adversarial_single_iteration_is_initial() {
        let out = adversarial_placement(0.5, FRAC_PI_2, 0.125, 1, 4).unwrap();
        assert_eq!(out.centers, random_ball(2, 5, 1.0, 4));
        assert_eq!(out.objective.len(), 1);
    }

    #[test]
    fn adversarial_objective_non_increasing() {
        let out = adversarial_placement(0.7, FRAC_PI_2, 0.0625, 60, 2).unwrap();
        assert_eq!(out.objective.len(), 60);
        assert!(out.objective.windows(2).all(|w| w[1] <= w[0]));
        assert!(out.centers.iter().all(|c| c.norm() <= ADVERSARIAL_RADIUS));
        assert_eq!(out, adversarial_placement(0.7, FRAC_PI_2, 0.0625, 60, 2).unwrap());
    }
}
