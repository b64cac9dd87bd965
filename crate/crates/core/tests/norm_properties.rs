use proptest::prelude::*;

use steinhaus::norms::Custom3DParams;
use steinhaus::pointset::{count_in_ball_scan, lattice_window, sorted_distances_scan};
use steinhaus::{BallMode, IndexedPointSet, NormSpec};

fn spec_strategy() -> impl Strategy<Value = NormSpec> {
    prop_oneof![
        (1.0f64..6.0, 1usize..=4).prop_map(|(p, d)| NormSpec::lp(p, d).unwrap()),
        (1usize..=4).prop_map(|d| NormSpec::linf(d).unwrap()),
        Just(NormSpec::custom3d(Custom3DParams::default())),
    ]
}

fn with_vector() -> impl Strategy<Value = (NormSpec, Vec<f64>)> {
    spec_strategy().prop_flat_map(|s| {
        let d = s.dim();
        (Just(s), prop::collection::vec(-50.0f64..50.0, d))
    })
}

fn planar() -> impl Strategy<Value = NormSpec> {
    prop_oneof![
        (1.0f64..4.0).prop_map(|p| NormSpec::lp(p, 2).unwrap()),
        Just(NormSpec::linf(2).unwrap()),
    ]
}

proptest! {
    #[test]
    fn homogeneous_and_symmetric((spec, v) in with_vector(), t in -20.0f64..20.0) {
        let n = spec.norm(&v).unwrap();
        let tv: Vec<f64> = v.iter().map(|c| t * c).collect();
        let neg: Vec<f64> = v.iter().map(|c| -c).collect();
        prop_assert!((spec.norm(&tv).unwrap() - t.abs() * n).abs() <= 1e-9 * (1.0 + t.abs() * n));
        prop_assert!((spec.norm(&neg).unwrap() - n).abs() <= 1e-12 * (1.0 + n));
    }

    #[test]
    fn normalized_vectors_have_unit_norm((spec, v) in with_vector()) {
        prop_assume!(v.iter().any(|c| c.abs() > 1e-6));
        let u = spec.normalize(&v).unwrap();
        prop_assert!((spec.norm(&u).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert!((spec.boundary_scale(&v).unwrap() * spec.norm(&v).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn distance_is_norm_of_difference((spec, v) in with_vector(), shift in -5.0f64..5.0) {
        let w: Vec<f64> = v.iter().map(|c| c * 0.5 + shift).collect();
        let diff: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a - b).collect();
        let n = spec.norm(&diff).unwrap();
        prop_assert!((spec.distance(&v, &w) - n).abs() <= 1e-12 * (1.0 + n));
    }

    #[test]
    fn lp_triangle_inequality(p in 1.0f64..6.0, u in prop::collection::vec(-10.0f64..10.0, 3), v in prop::collection::vec(-10.0f64..10.0, 3)) {
        let spec = NormSpec::lp(p, 3).unwrap();
        let s: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let (nu, nv) = (spec.norm(&u).unwrap(), spec.norm(&v).unwrap());
        prop_assert!(spec.norm(&s).unwrap() <= nu + nv + 1e-12 * (1.0 + nu + nv));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn index_matches_scan(spec in planar(), cx in -6.0f64..6.0, cy in -6.0f64..6.0, r in 0.0f64..6.0, closed in any::<bool>()) {
        let ips = IndexedPointSet::build(lattice_window(2, 14.0, &spec).unwrap());
        prop_assume!(ips.certified_reach(&[cx, cy], &spec).unwrap() >= r);
        let mode = if closed { BallMode::Closed } else { BallMode::Open };
        let fast = ips.count_in_ball(&[cx, cy], r, &spec, mode).unwrap();
        let slow = count_in_ball_scan(ips.point_set(), &[cx, cy], r, &spec, mode).unwrap();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn count_is_monotone_in_radius(spec in planar(), cx in -4.0f64..4.0, cy in -4.0f64..4.0, r in 0.0f64..4.0, dr in 0.0f64..3.0) {
        let ips = IndexedPointSet::build(lattice_window(2, 12.0, &spec).unwrap());
        prop_assume!(ips.certified_reach(&[cx, cy], &spec).unwrap() >= r + dr);
        let a = ips.count_in_ball(&[cx, cy], r, &spec, BallMode::Open).unwrap();
        let b = ips.count_in_ball(&[cx, cy], r + dr, &spec, BallMode::Open).unwrap();
        prop_assert!(a.count <= b.count);
        prop_assert!(a.ids.iter().all(|id| b.ids.contains(id)));
    }

    #[test]
    fn sorted_distances_are_prefix_consistent(spec in planar(), cx in -3.0f64..3.0, cy in -3.0f64..3.0, k in 1usize..40) {
        let ips = IndexedPointSet::build(lattice_window(2, 12.0, &spec).unwrap());
        let long = ips.sorted_distances(&[cx, cy], &spec, k + 5);
        prop_assume!(long.is_ok());
        let long = long.unwrap();
        let short = ips.sorted_distances(&[cx, cy], &spec, k).unwrap();
        prop_assert_eq!(&long[..k], &short[..]);
        prop_assert!(long.windows(2).all(|w| w[0].0 <= w[1].0));
        let scan = sorted_distances_scan(ips.point_set(), &[cx, cy], &spec, k);
        prop_assert_eq!(short, scan);
    }

    #[test]
    fn custom_index_matches_scan(cx in -2.0f64..2.0, cy in -2.0f64..2.0, cz in -2.0f64..2.0, r in 0.0f64..2.5) {
        let spec = NormSpec::custom3d(Custom3DParams::default());
        let ips = IndexedPointSet::build(lattice_window(3, 5.0, &spec).unwrap());
        prop_assume!(ips.certified_reach(&[cx, cy, cz], &spec).unwrap() >= r);
        let fast = ips.count_in_ball(&[cx, cy, cz], r, &spec, BallMode::Open).unwrap();
        let slow = count_in_ball_scan(ips.point_set(), &[cx, cy, cz], r, &spec, BallMode::Open).unwrap();
        prop_assert_eq!(fast, slow);
    }
}
