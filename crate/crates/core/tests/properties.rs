//! Property tests for invariants that hold for every input.

use fracurv::curvature::{least_squares, parallel_set, raster_grid, Policy};
use fracurv::diagnostics::{growth_classifier, ladder, Verdict};
use fracurv::fmt::sig12;
use fracurv::geom::Vec2;
use fracurv::hierarchy::IfsTree;
use fracurv::ifs::{presets, similarity_dimension, Similarity};
use fracurv::raster::{parallel_mask, DistanceField};
use fracurv::words::{for_each_sigma, neighbor_tree, neighbors, sigma};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_of_unity(which in 0usize..4, t in 0.0f64..3.0) {
        let ifs = vec![presets::koch(), presets::uset(), presets::cantor_square(0.25).unwrap(), presets::square()]
            .swap_remove(which);
        let d = ifs.similarity_dimension();
        let eps = ifs.big_r * 10f64.powf(-t);
        let mut sum = 0.0;
        for_each_sigma(&ifs, eps, |_, r| sum += r.powf(d)).unwrap();
        prop_assert!((sum - 1.0).abs() <= 1e-9, "sum {}", sum);
    }

    #[test]
    fn moran_equation(ratios in prop::collection::vec(0.05f64..0.6, 2..7)) {
        let d = similarity_dimension(&ratios);
        let s: f64 = ratios.iter().map(|r| r.powf(d)).sum();
        prop_assert!((s - 1.0).abs() <= 1e-12, "sum {}", s);
    }

    #[test]
    fn similarity_inverse(r in 0.1f64..3.0, a in -PI..PI, flip: bool, x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let t = Similarity::new(r, a, flip, Vec2::new(0.3, -0.7));
        let p = Vec2::new(x, y);
        prop_assert!(t.inverse().apply(t.apply(p)).dist(p) <= 1e-12);
        prop_assert!(t.then_apply(&t.inverse()).apply(p).dist(p) <= 1e-12);
    }

    #[test]
    fn ladder_is_geometric(lo in -6.0f64..-1.0, span in 0.5f64..3.0, ppd in 1.0f64..24.0) {
        let eps_min = 10f64.powf(lo);
        let eps_max = (eps_min * 10f64.powf(span)).min(3.0);
        prop_assume!(eps_min < eps_max);
        let l = ladder(eps_min, eps_max, ppd, 3.0).unwrap();
        for w in l.windows(2) {
            prop_assert!(w[0] > w[1]);
            prop_assert!((w[0] / w[1] - 10f64.powf(1.0 / ppd)).abs() <= 1e-9);
        }
        prop_assert!(l.iter().all(|&e| e >= eps_min * (1.0 - 1e-12) && e <= eps_max && e < 3.0));
    }

    #[test]
    fn power_laws_are_unbounded(t in 0.2f64..2.0, c in 0.1f64..10.0) {
        let pts: Vec<(f64, f64)> = (0..30).map(|k| {
            let e = 10f64.powf(-(k as f64) / 12.0);
            (e, c * e.powf(-t))
        }).collect();
        match growth_classifier(&pts) {
            Verdict::Unbounded { exponent, r2 } => {
                prop_assert!((exponent - t).abs() <= 1e-9);
                prop_assert!(r2 > 0.999);
            }
            v => prop_assert!(false, "{:?}", v),
        }
    }

    #[test]
    fn constants_are_bounded(c in 0.0f64..10.0) {
        let pts: Vec<(f64, f64)> = (0..30).map(|k| (10f64.powf(-(k as f64) / 12.0), c)).collect();
        prop_assert_eq!(growth_classifier(&pts), Verdict::Bounded { bound: c });
    }

    #[test]
    fn sig12_round_trips(x in -1e20f64..1e20) {
        let y: f64 = sig12(x).parse().unwrap();
        prop_assert!((y - x).abs() <= 1e-11 * x.abs());
    }

    #[test]
    fn least_squares_recovers_lines(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, a * i as f64 + b)).collect();
        let (s, i, _) = least_squares(&pts);
        prop_assert!((s - a).abs() <= 1e-9 && (i - b).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn neighbours_are_symmetric(t in 0.0f64..1.0, pick in 0usize..10_000) {
        let ifs = presets::koch();
        let lambda = 108.0;
        let eps = 0.004 * 6f64.powf(t);
        let tree = neighbor_tree(&ifs, eps);
        let fam = sigma(&ifs, lambda * eps).unwrap();
        let w = &fam.words[pick % fam.words.len()];
        for n in neighbors(&ifs, &tree, eps, lambda, w).unwrap() {
            prop_assert!(neighbors(&ifs, &tree, eps, lambda, &n).unwrap().contains(w), "{} -> {}", w, n);
        }
    }

    #[test]
    fn masks_grow_with_eps(p in 0.2f64..0.45, a in 0.01f64..0.3, b in 0.01f64..0.3) {
        let ifs = presets::cantor_square(p).unwrap();
        let tree = Arc::new(IfsTree::new(&ifs, 2e-3));
        let field = DistanceField::build(tree.clone(), raster_grid(&tree, 0.3, 5e-3), None, None).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        let small = parallel_mask(&field, lo);
        let big = parallel_mask(&field, hi);
        prop_assert_eq!(small.and(&big).unwrap().count(), small.count());
    }

    #[test]
    fn gauss_bonnet_on_cantor(p in 0.2f64..0.45, e in 0.02f64..0.4) {
        let ifs = presets::cantor_square(p).unwrap();
        let ps = parallel_set(&ifs, e, &Policy::default()).unwrap();
        let turning: f64 = ps.polys.loops.iter().map(|l| l.turning().iter().sum::<f64>()).sum();
        prop_assert!((turning - 2.0 * PI * ps.chi() as f64).abs() <= 1e-9);
    }

    #[test]
    fn euler_characteristic_is_motion_invariant(a in -PI..PI, e in 0.03f64..0.3) {
        let ifs = presets::cantor_square(0.3).unwrap();
        let moved = ifs.conjugated(&Similarity::new(1.0, a, false, Vec2::new(0.4, -0.2))).unwrap();
        let p = Policy::default();
        let base = parallel_set(&ifs, e, &p).unwrap();
        let rot = parallel_set(&moved, e, &p).unwrap();
        // Away from critical values the topology cannot depend on the grid.
        prop_assume!(!base.record().near_critical && !rot.record().near_critical);
        prop_assert_eq!(base.chi(), rot.chi());
    }
}
