//! Curvature measures of boundary polylines.
//!
//! The variation uses arc-length windows: at each vertex the turning angles
//! within `w/2` of arc length on both sides are summed before taking the
//! absolute value, and the result is spread over the window length. Along a
//! smooth arc this recovers `|∫κ ds|` up to `O(w)`, while raster noise (turning
//! signs flipping at the scale `h`) cancels inside each window.

use super::contour::{BoundaryPolygons, Loop};
use super::mask::BinaryMask;
use crate::geom::Vec2;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::hash::Hash;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct C0 {
    pub signed: f64,
    pub variation: f64,
}

/// Per-vertex data of one loop.
pub struct VertexCurvature {
    pub turning: Vec<f64>,
    /// Turning within the window centered at the vertex.
    pub windowed: Vec<f64>,
    /// `(1/w) ∫ |g|` over the vertex's half-edges, where `g(s)` is the turning
    /// inside the window centered at arc position `s`.
    pub variation: Vec<f64>,
}

pub fn vertex_curvature(l: &Loop, w: f64) -> VertexCurvature {
    let n = l.points.len();
    let turning = l.turning();
    let e = l.edge_lengths();
    let total: f64 = e.iter().sum();
    if total <= w || n < 3 {
        let s: f64 = turning.iter().sum();
        let variation = (0..n)
            .map(|k| s.abs() * 0.5 * (e[(k + n - 1) % n] + e[k]) / total)
            .collect();
        return VertexCurvature {
            windowed: vec![s; n],
            variation,
            turning,
        };
    }
    let mut pos = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &len in &e {
        pos.push(acc);
        acc += len;
    }
    let in_window = |s: f64, u: usize| (s - pos[u] + 0.5 * w).rem_euclid(total) < w;

    // Sweep g over one period starting at the beginning of vertex 0's share.
    let p0 = -0.5 * e[n - 1];
    let wrap = |q: f64| {
        let x = p0 + (q - p0).rem_euclid(total);
        if x <= p0 {
            p0 + total
        } else {
            x
        }
    };
    enum Ev {
        Jump(f64),
        Boundary,
        Probe(usize),
    }
    let mut events: Vec<(f64, Ev)> = Vec::with_capacity(4 * n);
    for u in 0..n {
        events.push((wrap(pos[u] - 0.5 * w), Ev::Jump(turning[u])));
        events.push((wrap(pos[u] + 0.5 * w), Ev::Jump(-turning[u])));
        events.push((pos[u], Ev::Probe(u)));
        if u + 1 < n {
            events.push((pos[u] + 0.5 * e[u], Ev::Boundary));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut g: f64 = (0..n)
        .filter(|&u| in_window(p0, u))
        .map(|u| turning[u])
        .sum();
    let mut variation = vec![0.0; n];
    let mut windowed = vec![0.0; n];
    let (mut cur, mut v) = (p0, 0usize);
    for (q, ev) in events {
        variation[v] += g.abs() * (q - cur);
        cur = q;
        match ev {
            Ev::Jump(d) => g += d,
            Ev::Boundary => v += 1,
            Ev::Probe(k) => windowed[k] = g,
        }
    }
    variation[v] += g.abs() * (p0 + total - cur);
    for x in &mut variation {
        *x /= w;
    }
    VertexCurvature {
        turning,
        windowed,
        variation,
    }
}

/// Signed curvature and windowed variation, both in units of full turns.
pub fn curvature_c0_with_window(
    polys: &BoundaryPolygons,
    region: Option<&BinaryMask>,
    w: f64,
) -> C0 {
    let mut out = C0::default();
    for l in &polys.loops {
        let vc = vertex_curvature(l, w);
        for k in 0..l.points.len() {
            if region.is_some_and(|m| !m.contains(l.points[k])) {
                continue;
            }
            out.signed += vc.turning[k];
            out.variation += vc.variation[k];
        }
    }
    out.signed /= 2.0 * PI;
    out.variation /= 2.0 * PI;
    out
}

/// [`curvature_c0_with_window`] with the default window `4h`.
pub fn curvature_c0(polys: &BoundaryPolygons, region: Option<&BinaryMask>) -> C0 {
    curvature_c0_with_window(polys, region, 4.0 * polys.h)
}

/// Signed curvature of labelled vertices and windowed variation of labelled
/// windows, per label. A vertex's share of the variation counts for label `L`
/// when a window centered in that share contains a vertex carrying `L`.
/// Results are in full turns.
pub fn labelled_c0<L: Copy + Eq + Hash>(
    polys: &BoundaryPolygons,
    w: f64,
    mut labels: impl FnMut(Vec2, &mut Vec<L>),
) -> HashMap<L, C0> {
    let mut out: HashMap<L, C0> = HashMap::new();
    let mut near: Vec<L> = Vec::new();
    for l in &polys.loops {
        let n = l.points.len();
        let mut own: Vec<Vec<L>> = Vec::with_capacity(n);
        let mut any = false;
        for &p in &l.points {
            let mut v = Vec::new();
            labels(p, &mut v);
            any |= !v.is_empty();
            own.push(v);
        }
        if !any {
            continue;
        }
        let vc = vertex_curvature(l, w);
        let e = l.edge_lengths();
        for k in 0..n {
            for &lab in &own[k] {
                out.entry(lab).or_default().signed += vc.turning[k] / (2.0 * PI);
            }
            near.clear();
            near.extend_from_slice(&own[k]);
            // Walk outwards along the loop while within half a window.
            // Windows of those vertices overlap this vertex's share of the loop.
            let (reach_back, reach_fwd) = (0.5 * (w + e[(k + n - 1) % n]), 0.5 * (w + e[k]));
            let (mut back, mut fwd) = (0.0, 0.0);
            for step in 1..n {
                let u = (k + n - step) % n;
                back += e[u];
                if back >= reach_back {
                    break;
                }
                near.extend_from_slice(&own[u]);
            }
            for step in 1..n {
                let u = (k + step) % n;
                fwd += e[(u + n - 1) % n];
                if fwd >= reach_fwd {
                    break;
                }
                near.extend_from_slice(&own[u]);
            }
            if near.is_empty() {
                continue;
            }
            let mut seen: Vec<L> = Vec::with_capacity(near.len());
            for &lab in &near {
                if !seen.contains(&lab) {
                    seen.push(lab);
                    out.entry(lab).or_default().variation += vc.variation[k] / (2.0 * PI);
                }
            }
        }
    }
    out
}

/// [`labelled_c0`] for a single region given by a membership test.
pub fn region_c0(polys: &BoundaryPolygons, w: f64, member: impl Fn(Vec2) -> bool) -> C0 {
    labelled_c0(polys, w, |p, out: &mut Vec<()>| {
        if member(p) {
            out.push(());
        }
    })
    .remove(&())
    .unwrap_or_default()
}

/// Sign-coherent runs of strongly turning windows inside the region.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cluster {
    /// Turning of the run in full turns.
    pub turning: f64,
    pub vertices: usize,
}

/// Clusters of consecutive in-region vertices whose windowed turning exceeds
/// `min_window` radians with one sign; runs with total below `min_total`
/// radians are dropped.
pub fn clusters(
    polys: &BoundaryPolygons,
    region: Option<&BinaryMask>,
    w: f64,
    min_window: f64,
    min_total: f64,
) -> Vec<Cluster> {
    clusters_where(
        polys,
        |p| region.is_none_or(|m| m.contains(p)),
        w,
        min_window,
        min_total,
    )
}

pub fn clusters_where(
    polys: &BoundaryPolygons,
    member: impl Fn(Vec2) -> bool,
    w: f64,
    min_window: f64,
    min_total: f64,
) -> Vec<Cluster> {
    let mut out = Vec::new();
    for l in &polys.loops {
        let n = l.points.len();
        let inside: Vec<bool> = l.points.iter().map(|&p| member(p)).collect();
        if !inside.iter().any(|&b| b) {
            continue;
        }
        let vc = vertex_curvature(l, w);
        let sign = |k: usize| -> i8 {
            if !inside[k] || vc.windowed[k].abs() < min_window {
                0
            } else if vc.windowed[k] > 0.0 {
                1
            } else {
                -1
            }
        };
        let signs: Vec<i8> = (0..n).map(sign).collect();
        // Start at a break so that runs do not wrap around.
        let Some(start) = (0..n).find(|&k| signs[k] != signs[(k + n - 1) % n]) else {
            if signs[0] != 0 {
                let t: f64 = vc.turning.iter().sum();
                if t.abs() >= min_total {
                    out.push(Cluster {
                        turning: t / (2.0 * PI),
                        vertices: n,
                    });
                }
            }
            continue;
        };
        let mut k = 0;
        while k < n {
            let s = signs[(start + k) % n];
            let mut m = k;
            let mut t = 0.0;
            while m < n && signs[(start + m) % n] == s {
                t += vc.turning[(start + m) % n];
                m += 1;
            }
            if s != 0 && t.abs() >= min_total {
                out.push(Cluster {
                    turning: t / (2.0 * PI),
                    vertices: m - k,
                });
            }
            k = m;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polygon(points: Vec<Vec2>, h: f64) -> BoundaryPolygons {
        BoundaryPolygons {
            eps: 1.0,
            h,
            loops: vec![Loop { points }],
        }
    }

    #[test]
    fn convex_polygon_has_unit_variation() {
        let pts: Vec<Vec2> = (0..500)
            .map(|k| Vec2::new(1.0, 0.0).rotate(2.0 * PI * k as f64 / 500.0))
            .collect();
        let c = curvature_c0(&polygon(pts, 0.01), None);
        assert!((c.signed - 1.0).abs() < 1e-12);
        assert!((c.variation - 1.0).abs() < 1e-9);
    }

    #[test]
    fn raster_disk_variation_is_one() {
        use crate::geom::Rect;
        use crate::ifs::PointCloud;
        use crate::raster::{boundary_polygons, distance_field, Grid};
        let cloud = PointCloud {
            points: vec![Vec2::new(0.1234, 0.0567)],
            hausdorff_error: 0.0,
        };
        let grid = Grid::covering(&Rect::new(Vec2::new(-1.0, -1.0), Vec2::new(1.2, 1.2)), 0.01);
        let f = distance_field(&cloud, grid).unwrap();
        let c = curvature_c0(&boundary_polygons(&f, 0.5), None);
        assert!((c.signed - 1.0).abs() < 1e-12);
        assert!((c.variation - 1.0).abs() < 0.01, "{}", c.variation);
    }

    #[test]
    fn labelled_windows_capture_whole_corners() {
        let mut pts = Vec::new();
        for k in 0..100 {
            pts.push(Vec2::new(k as f64 / 100.0, 0.0));
        }
        for k in 0..100 {
            pts.push(Vec2::new(1.0, k as f64 / 100.0));
        }
        for k in 0..100 {
            pts.push(Vec2::new(1.0 - k as f64 / 100.0, 1.0));
        }
        for k in 0..100 {
            pts.push(Vec2::new(0.0, 1.0 - k as f64 / 100.0));
        }
        let polys = polygon(pts, 0.01);
        // Only the corner vertex (1, 0) is in the region; its whole window counts.
        let c = region_c0(&polys, 0.04, |p| p.dist(Vec2::new(1.0, 0.0)) < 1e-9);
        assert!((c.variation - 0.25).abs() < 1e-9, "{c:?}");
        assert!((c.signed - 0.25).abs() < 1e-9);
        let all = labelled_c0(&polys, 0.04, |p, out| out.push(p.x < 0.5));
        let total: f64 = all.values().map(|c| c.signed).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn square_corners_are_four_clusters() {
        let mut pts = Vec::new();
        for k in 0..100 {
            let t = k as f64 / 100.0;
            pts.push(Vec2::new(t, 0.0));
        }
        for k in 0..100 {
            pts.push(Vec2::new(1.0, k as f64 / 100.0));
        }
        for k in 0..100 {
            pts.push(Vec2::new(1.0 - k as f64 / 100.0, 1.0));
        }
        for k in 0..100 {
            pts.push(Vec2::new(0.0, 1.0 - k as f64 / 100.0));
        }
        let cl = clusters(&polygon(pts, 0.01), None, 0.04, 0.3, 0.3);
        assert_eq!(cl.len(), 4);
        assert!(cl.iter().all(|c| (c.turning - 0.25).abs() < 1e-9));
    }
}
