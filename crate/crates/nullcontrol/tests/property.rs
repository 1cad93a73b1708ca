//! Property tests of the algebraic invariants.

use nullcontrol::analytic::{compose, disc_interpolation_bound, three_circle_bound, Certificate};
use nullcontrol::sets::{greedy_nodes, Interval, MeasurableSet1D};
use proptest::prelude::*;

fn cert_strategy() -> impl Strategy<Value = Certificate> {
    (1.0f64..1e6, 0.01f64..1.0).prop_map(|(n, theta)| Certificate::new(n, theta).unwrap())
}

proptest! {
    #[test]
    fn compose_is_associative(a in cert_strategy(), b in cert_strategy(), c in cert_strategy()) {
        let left = compose(&compose(&a, &b), &c);
        let right = compose(&a, &compose(&b, &c));
        prop_assert!((left.n - right.n).abs() <= 1e-12 * right.n.abs());
        prop_assert!((left.theta - right.theta).abs() <= 1e-15);
    }

    #[test]
    fn compose_identity_is_neutral(c in cert_strategy()) {
        let id = Certificate::identity();
        let l = compose(&id, &c);
        prop_assert!((l.n - c.n).abs() <= 1e-12 * c.n && (l.theta - c.theta).abs() <= 1e-15);
    }

    #[test]
    fn three_circle_exact_on_powers(
        k in 1u32..=8,
        r1 in 0.05f64..2.0,
        gap1 in 0.0f64..2.0,
        gap2 in 0.01f64..2.0,
    ) {
        let r = r1 + gap1;
        let r2 = r + gap2;
        let (bound, _) = three_circle_bound(
            r1.powi(k as i32), r2.powi(k as i32), r1, r, r2).unwrap();
        let truth = r.powi(k as i32);
        prop_assert!((bound - truth).abs() <= 1e-11 * truth);
    }

    #[test]
    fn interpolation_bound_monotone_in_both_arguments(
        eps in 1e-16f64..1.0,
        meas in 0.01f64..0.4,
        deps in 1.0f64..100.0,
        dmeas in 1.0f64..8.0,
    ) {
        let (b, _) = disc_interpolation_bound(eps, meas).unwrap();
        let (b_more_data, _) = disc_interpolation_bound((eps * deps).min(1.0), meas).unwrap();
        prop_assert!(b_more_data >= b - 1e-15);
        let bigger = (meas * dmeas).min(0.4);
        let (b_bigger_set, _) = disc_interpolation_bound(eps, bigger).unwrap();
        prop_assert!(b_bigger_set <= b + 1e-15);
    }

    #[test]
    fn measure_additive_and_monotone(
        lows in proptest::collection::vec(0.0f64..0.9, 1..5),
        lens in proptest::collection::vec(0.005f64..0.1, 1..5),
    ) {
        let n = lows.len().min(lens.len());
        let pairs: Vec<[f64; 2]> = (0..n)
            .map(|i| [lows[i], (lows[i] + lens[i]).min(1.0)])
            .collect();
        let set = MeasurableSet1D::unit(&pairs).unwrap();
        // measure never exceeds the sum of raw lengths (overlaps merge)
        let raw: f64 = pairs.iter().map(|p| p[1] - p[0]).sum();
        prop_assert!(set.measure() <= raw + 1e-12);
        // monotone under shrinking to a window
        let window = Interval { lo: 0.25, hi: 0.75 };
        let clipped = set.intersect(&window);
        prop_assert!(clipped.measure() <= set.measure() + 1e-15);
    }

    #[test]
    fn greedy_nodes_gap_bound_holds(
        lo in -0.2f64..0.0,
        len in 0.01f64..0.2,
        n in 0usize..20,
    ) {
        let hi = (lo + len).min(0.2);
        let amb = Interval { lo: -0.2, hi: 0.2 };
        let e = MeasurableSet1D::new(&[[lo, hi]], amb).unwrap();
        let nodes = greedy_nodes(&e, n).unwrap();
        prop_assert_eq!(nodes.len(), n + 1);
        let gap = e.measure() / (n as f64 + 1.0);
        for w in nodes.windows(2) {
            prop_assert!(w[1] - w[0] >= gap - 1e-12);
        }
    }
}
