use std::f64::consts::PI;

use kakeya_core::geometry::{point, Direction, Segment, Tube};
use kakeya_core::intersection::tube_pair_intersection_area_2d;
use kakeya_core::union_measure::{
    bonferroni_lower_bound, exact_union_area_2d, monte_carlo_union_volume, raster_bracket, TubeFamily,
};
use proptest::prelude::*;

fn planar(cx: f64, cy: f64, angle: f64, eps: f64) -> Tube {
    Tube::planar(Segment::unit(point(&[cx, cy]), Direction::from_angle(angle)).unwrap(), eps).unwrap()
}

fn family() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-0.6f64..0.6, -0.6f64..0.6, 0.0f64..PI), 1..12)
}

fn build(raw: &[(f64, f64, f64)], eps: f64) -> TubeFamily {
    TubeFamily::from_tubes(raw.iter().map(|&(x, y, a)| planar(x, y, a, eps)).collect()).unwrap()
}

fn area(f: &TubeFamily) -> f64 {
    exact_union_area_2d(f).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adding_a_tube_never_shrinks_the_union(raw in family(), extra in (-0.6f64..0.6, -0.6f64..0.6, 0.0f64..PI)) {
        let f = build(&raw, 0.05);
        let g = f.with_tube(planar(extra.0, extra.1, extra.2, 0.05)).unwrap();
        prop_assert!(area(&g) >= area(&f) - 1e-12);
    }

    #[test]
    fn union_is_subadditive(raw in family()) {
        let f = build(&raw, 0.05);
        prop_assert!(area(&f) <= f.total_measure() + 1e-12);
    }

    #[test]
    fn union_scales_quadratically(raw in family(), lambda in 0.3f64..3.0) {
        let f = build(&raw, 0.05);
        let g = f.scaled(lambda).unwrap();
        let (a, b) = (area(&f), area(&g));
        prop_assert!((b - lambda * lambda * a).abs() <= 1e-9 * b.max(1e-12));
    }

    #[test]
    fn bonferroni_never_exceeds_the_union(raw in family()) {
        let f = build(&raw, 0.05);
        prop_assert!(bonferroni_lower_bound(&f) <= area(&f) + 1e-9);
    }

    #[test]
    fn sweep_lies_inside_the_raster_bracket(raw in family()) {
        let f = build(&raw, 0.08);
        let (lo, hi) = raster_bracket(&f, 512).unwrap();
        let a = area(&f);
        prop_assert!(lo - 1e-12 <= a && a <= hi + 1e-12);
    }
}

/// Vertices of the parallelogram where the two strips cross.
fn crossing_parallelogram(a: &Tube, b: &Tube) -> Vec<[f64; 2]> {
    let (ua, ub) = (a.core().direction(), b.core().direction());
    let (ca, cb) = (a.core().center(), b.core().center());
    let det = ua[0] * (-ub[1]) + ub[0] * ua[1];
    let (rx, ry) = (cb[0] - ca[0], cb[1] - ca[1]);
    let s = (rx * (-ub[1]) + ub[0] * ry) / det;
    let q = [ca[0] + s * ua[0], ca[1] + s * ua[1]];
    let sin = det.abs();
    let h = a.width() / 2.0 / sin;
    let k = b.width() / 2.0 / sin;
    let mut out = vec![];
    for sa in [-1.0, 1.0] {
        for sb in [-1.0, 1.0] {
            out.push([
                q[0] + sa * k * ua[0] + sb * h * ub[0],
                q[1] + sa * k * ua[1] + sb * h * ub[1],
            ]);
        }
    }
    out
}

fn inside(t: &Tube, p: &[f64; 2]) -> bool {
    let u = t.core().direction();
    let c = t.core().center();
    let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
    // parallelogram vertices sit on the strip boundary
    (dx * u[0] + dy * u[1]).abs() <= t.core().length() / 2.0 + 1e-12
        && (-dx * u[1] + dy * u[0]).abs() <= t.width() / 2.0 + 1e-12
}

#[test]
fn pair_area_against_strip_formula() {
    use rand::{Rng, SeedableRng};
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut interior = 0;
    for k in 0..1000 {
        let eps = r.random_range(0.005..0.1);
        let d = r.random_range(0.05..PI - 0.05);
        let theta = r.random_range(0.0..PI);
        let a = planar(0.0, 0.0, theta, eps);
        // odd poses put the core crossing near both centers
        let (cx, cy) = if k % 2 == 0 {
            (r.random_range(-0.4..0.4), r.random_range(-0.4..0.4))
        } else {
            let (s, t) = (r.random_range(-0.3..0.3), r.random_range(-0.3..0.3));
            (s * theta.cos() + t * (theta + d).cos(), s * theta.sin() + t * (theta + d).sin())
        };
        let b = planar(cx, cy, theta + d, eps);
        let got = tube_pair_intersection_area_2d(&a, &b).unwrap();
        let formula = eps * eps / d.sin();
        assert!(got <= formula + 1e-10, "area {got} exceeds {formula}");
        if crossing_parallelogram(&a, &b).iter().all(|p| inside(&a, p) && inside(&b, p)) {
            interior += 1;
            assert!((got - formula).abs() <= 1e-10, "interior crossing: {got} vs {formula}");
        }
    }
    assert!(interior > 300, "{interior} interior poses");
}

#[test]
fn monte_carlo_matches_exact_planar_area() {
    for seed in 0..20u64 {
        let centers = kakeya_core::constructions::random_ball(2, 8, 0.5, seed);
        let f = TubeFamily::from_tubes(
            centers.iter().enumerate().map(|(i, c)| planar(c[0], c[1], i as f64 * 0.4, 0.05)).collect(),
        )
        .unwrap();
        let mc = monte_carlo_union_volume(&f, 200_000, seed).unwrap();
        let exact = area(&f);
        assert!((mc.value - exact).abs() <= 4.0 * mc.stderr, "seed {seed}: {} ± {} vs {exact}", mc.value, mc.stderr);
    }
}

#[test]
fn monte_carlo_is_thread_independent() {
    let f = build(&[(0.0, 0.0, 0.0), (0.1, 0.2, 1.0), (-0.3, 0.1, 2.0)], 0.05);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| monte_carlo_union_volume(&f, 300_000, 9).unwrap());
    let b = four.install(|| monte_carlo_union_volume(&f, 300_000, 9).unwrap());
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}
