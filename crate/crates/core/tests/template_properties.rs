//! Property tests for the template calculus.

use divflow::exact::{rat, rat_int};
use divflow::templates::{
    average_contraction, check_admissible, class_decomposition, contraction_rate,
    standard_template, standard_template_seq, trivial_on, validate_template, Template,
};
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

/// Shapes with m + n <= 5.
fn small_shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=4, 1usize..=4).prop_filter("m + n <= 5", |(m, n)| m + n <= 5)
}

/// Admissible pairs generated through the sufficient width bound
/// `Δt >= (m+n)^2 max(ε', ε'')`.
fn wide_pair() -> impl Strategy<Value = ((usize, usize), (f64, f64), (f64, f64))> {
    (small_shape(), 0.0f64..4.0, 0.0f64..4.0, 1.0f64..40.0, 0.0f64..100.0).prop_map(
        |((m, n), e0, e1, slack, t0)| {
            let width = ((m + n) * (m + n)) as f64 * e0.max(e1) + slack;
            ((m, n), (t0, e0), (t0 + width, e1))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn standard_blocks_always_validate(((m, n), p1, p2) in wide_pair()) {
        prop_assert!(check_admissible(p1, p2, m, n).is_admissible());
        let t = standard_template(p1, p2, m, n).unwrap();
        let report = validate_template(&t);
        prop_assert!(report.is_valid(), "({m},{n}) {p1:?} {p2:?}: {report}");
    }

    #[test]
    fn peak_equals_minus_smaller_height(((m, n), p1, p2) in wide_pair()) {
        let t = standard_template(p1, p2, m, n).unwrap();
        let peak = t.breakpoints.iter().map(|&bp| t.value_at(bp, 0))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(peak, -p1.1.min(p2.1));
    }

    #[test]
    fn segment_rates_are_integers_in_range(((m, n), p1, p2) in wide_pair()) {
        let t = standard_template(p1, p2, m, n).unwrap();
        let profile = contraction_rate(&t).unwrap();
        for seg in &profile.segments {
            prop_assert!(seg.delta >= 0 && seg.delta <= (m * n) as i64);
        }
        for s in 0..t.segments() {
            let d = class_decomposition(&t, s).unwrap();
            let k1: i64 = d.classes.iter().map(|c| c.k1).sum();
            let k2: i64 = d.classes.iter().map(|c| c.k2).sum();
            prop_assert_eq!((k1, k2), (m as i64, n as i64));
        }
    }

    #[test]
    fn symmetric_block_rate_calibration(
        (m, n) in small_shape(),
        eps in 0.0f64..2.0,
        scale in 100.0f64..5000.0,
    ) {
        // Δt/ε >= 100: the average sits within 10 ε/Δt + 1e-9 of
        // mn − mn/(m+n), and for (1,1) it is exactly 1/2.
        let dt = eps.max(0.1) * scale;
        let t = standard_template((0.0, eps), (dt, eps), m, n).unwrap();
        let avg = average_contraction(&t, 0.0, dt).unwrap();
        let mn = (m * n) as i64;
        let target = rat_int(mn) - BigRational::new(mn.into(), ((m + n) as i64).into());
        let gap = (&avg - &target).abs();
        let tol = rat(10.0 * eps / dt) + BigRational::new(1.into(), 1_000_000_000.into());
        prop_assert!(gap <= tol, "({m},{n}): avg {avg}, target {target}");
        if m == 1 && n == 1 {
            prop_assert_eq!(avg, BigRational::new(1.into(), 2.into()));
        }
    }

    #[test]
    fn window_additivity_exact(
        ((m, n), p1, p2) in wide_pair(),
        cut_at in 0.1f64..0.9,
        lo in 0.0f64..0.3,
        hi in 0.7f64..1.0,
    ) {
        let t = standard_template(p1, p2, m, n).unwrap();
        let (d0, d1) = t.domain();
        let a = d0 + lo * (d1 - d0);
        let c = d0 + hi * (d1 - d0);
        let b = a + cut_at * (c - a);
        prop_assume!(a < b && b < c);
        let whole = average_contraction(&t, a, c).unwrap();
        let left = average_contraction(&t, a, b).unwrap();
        let right = average_contraction(&t, b, c).unwrap();
        let stitched = (left * (rat(b) - rat(a)) + right * (rat(c) - rat(b)))
            / (rat(c) - rat(a));
        prop_assert_eq!(whole, stitched);
    }

    #[test]
    fn json_round_trip_bitwise(((m, n), p1, p2) in wide_pair()) {
        let t = standard_template(p1, p2, m, n).unwrap();
        let back = Template::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(&t.breakpoints, &back.breakpoints);
        prop_assert_eq!(&t.values, &back.values);
        prop_assert_eq!(&t.slopes, &back.slopes);
    }

    #[test]
    fn zero_anchored_sequences_validate(
        (m, n) in small_shape(),
        widths in proptest::collection::vec(1.0f64..50.0, 2..6),
    ) {
        // all-zero heights are admissible for every shape and junction
        let mut points = vec![(0.0, 0.0)];
        for w in widths {
            let t_next = points.last().unwrap().0 + w;
            points.push((t_next, 0.0));
        }
        let t = standard_template_seq(&points, m, n).unwrap();
        let report = validate_template(&t);
        prop_assert!(report.is_valid(), "({m},{n}): {report}");
    }

    #[test]
    fn concat_with_trivial_blocks_validates(
        (m, n) in small_shape(),
        gap in 1.0f64..30.0,
        width in 10.0f64..60.0,
    ) {
        let scaled = width * ((m + n) * (m + n)) as f64;
        let pieces = vec![
            trivial_on(m, n, 0.0, gap),
            standard_template((gap, 0.0), (gap + scaled, 0.0), m, n).unwrap(),
            trivial_on(m, n, gap + scaled, gap + scaled + gap, ),
        ];
        let t = Template::concat(pieces).unwrap();
        let report = validate_template(&t);
        prop_assert!(report.is_valid(), "({m},{n}): {report}");
        // rate of the flat stretches is mn exactly
        let avg = average_contraction(&t, 0.0, gap).unwrap();
        prop_assert_eq!(avg, rat_int((m * n) as i64));
    }
}
