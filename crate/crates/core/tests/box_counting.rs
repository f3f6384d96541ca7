use kakeya_core::box_dimension::{
    box_count, box_count_series, corpus, dimension_fit, dyadic_deltas, Collection,
};
use kakeya_core::geometry::point;
use proptest::prelude::*;

fn slope(c: &Collection, from: i32, to: i32) -> (f64, f64) {
    let f = dimension_fit(&box_count_series(c, &dyadic_deltas(from, to)).unwrap()).unwrap();
    (f.slope, f.r_squared)
}

#[test]
fn calibration_corpus() {
    let (s, _) = slope(&corpus::single_point(2), 1, 10);
    assert!(s.abs() <= 0.05);
    let (s, r2) = slope(&corpus::unit_segment(), 1, 12);
    assert!((s - 1.0).abs() <= 0.05 && r2 >= 0.99);
    let (s, r2) = slope(&corpus::filled_square(10), 1, 9);
    assert!((s - 2.0).abs() <= 0.05 && r2 >= 0.99, "{s} {r2}");
    let (s, r2) = slope(&corpus::cantor_dust(6), 1, 12);
    assert!((s - 1.0).abs() <= 0.07 && r2 >= 0.99, "{s} {r2}");
}

#[test]
fn counts_are_monotone_in_delta() {
    let c = corpus::filled_square(6);
    let s = box_count_series(&c, &dyadic_deltas(0, 8)).unwrap();
    assert!(s.counts.windows(2).all(|w| w[0] <= w[1]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// A shift moves each segment into at most 2^n times as many cells.
    #[test]
    fn grid_shift_changes_counts_boundedly(dx in -1.0f64..1.0, dy in -1.0f64..1.0, k in 2i32..8) {
        let c = corpus::filled_square(5);
        let delta = 2f64.powi(-k);
        let a = box_count(&c, delta).unwrap() as f64;
        let b = box_count(&c.translated(&point(&[dx, dy])), delta).unwrap() as f64;
        prop_assert!(b <= 4.0 * a && a <= 4.0 * b);
    }

    #[test]
    fn segment_count_is_near_length_over_delta(x0 in 0.0f64..1.0, y0 in 0.0f64..1.0, ang in 0.0f64..6.28) {
        let a = point(&[x0, y0]);
        let b = point(&[x0 + ang.cos(), y0 + ang.sin()]);
        let s = kakeya_core::geometry::Segment::from_endpoints(&a, &b).unwrap();
        let c = Collection::from_segments(vec![s]);
        let delta = 1.0 / 64.0;
        let n = box_count(&c, delta).unwrap() as f64;
        let l1 = ang.cos().abs() + ang.sin().abs();
        // a walk crosses one new cell per grid line
        prop_assert!(n <= l1 / delta + 3.0 && n >= 1.0 / delta - 1.0);
    }
}
