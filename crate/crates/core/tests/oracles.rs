//! Oracle values checked against independent constructions and the raster.

use fracurv::curvature::{fractal_avg_with, parallel_set, total_curvatures, Policy};
use fracurv::diagnostics::pair_snapshot;
use fracurv::ifs::{presets, Word};
use fracurv::oracles::{cantor_n, uset_c0var, CantorSquareParams};
use std::f64::consts::PI;

/// Gaps of `p * C_p` (the right edge of `S_1 F`), by explicit subdivision.
fn edge_gaps(p: f64, depth: usize) -> Vec<f64> {
    let mut intervals = vec![(0.0, p)];
    let mut gaps = Vec::new();
    for _ in 0..depth {
        let mut next = Vec::with_capacity(2 * intervals.len());
        for (a, b) in intervals {
            let l = b - a;
            gaps.push((1.0 - 2.0 * p) * l);
            next.push((a, a + p * l));
            next.push((b - p * l, b));
        }
        intervals = next;
    }
    gaps
}

fn n_by_gaps(p: f64, eps: f64) -> u64 {
    let g = 1.0 - 2.0 * p;
    1 + edge_gaps(p, 18)
        .iter()
        .filter(|&&l| l * l > 4.0 * eps * eps - g * g)
        .count() as u64
}

#[test]
fn cantor_n_matches_gap_enumeration() {
    for p in [0.25, 0.3, 1.0 / 3.0, 0.4] {
        let c = CantorSquareParams::new(p).unwrap();
        let g = c.g;
        for k in 1..60 {
            let eps = g / 2.0 + 0.2 * g * 0.8f64.powi(k);
            assert_eq!(
                cantor_n(&c, eps).unwrap(),
                n_by_gaps(p, eps),
                "p = {p}, eps = {eps}"
            );
        }
    }
}

/// Four blobs joined by `N` bridges per adjacent pair: chi = 4 - 4N while
/// diagonal blobs stay apart and each blob is simply connected.
#[test]
fn cantor_third_euler_characteristic() {
    let ifs = presets::cantor_square(1.0 / 3.0).unwrap();
    for eps in [0.168, 0.17, 0.19, 0.2, 0.22] {
        let want = 4 - 4 * n_by_gaps(1.0 / 3.0, eps) as i64;
        let ps = parallel_set(&ifs, eps, &Policy::default()).unwrap();
        assert_eq!(ps.chi(), want, "eps = {eps}");
    }
}

#[test]
fn uset_staircase_on_raster() {
    let u = presets::uset();
    for eps in [0.05, 1.0 / 45.0, 1.0 / 100.0, 1.0 / 300.0] {
        // Below 1/18 the oracle applies; at 0.05 the notch walls are merged.
        let s = pair_snapshot(&u, &Word(vec![1]), &Word(vec![2]), eps, &Policy::default()).unwrap();
        if eps < 1.0 / 18.0 {
            let want = uset_c0var(eps).unwrap();
            assert!(
                (s.c0.variation - want).abs() <= 0.02 * want,
                "eps {eps}: {} vs {want}",
                s.c0.variation
            );
        } else {
            assert!(s.c0.variation < 1.0, "eps {eps}: {}", s.c0.variation);
        }
    }
}

#[test]
fn square_steiner_all_measures() {
    let sq = presets::square();
    for eps in [0.05, 0.2, 0.7] {
        let r = total_curvatures(&sq, eps).unwrap();
        assert_eq!(r.c0, 1.0);
        assert!(
            (r.c1 - (2.0 + PI * eps)).abs() <= 1e-2 * (2.0 + PI * eps),
            "{eps}: c1 {}",
            r.c1
        );
        let area = 1.0 + 4.0 * eps + PI * eps * eps;
        assert!((r.c2 - area).abs() <= 1e-3 * area, "{eps}: c2 {}", r.c2);
        assert!((r.c0_var - 1.0).abs() <= 0.01, "{eps}: c0_var {}", r.c0_var);
    }
}

/// For the square the average has the closed form
/// `1 + (4(1 - delta) + (pi/2)(1 - delta^2)) / |ln delta|`.
#[test]
fn square_average_closed_form() {
    let delta: f64 = 0.1;
    let want = 1.0 + (4.0 * (1.0 - delta) + 0.5 * PI * (1.0 - delta * delta)) / delta.ln().abs();
    let got = fractal_avg_with(&presets::square(), 2, delta, &Policy::default())
        .unwrap()
        .value;
    assert!((got - want).abs() <= 2e-3 * want, "{got} vs {want}");
}
