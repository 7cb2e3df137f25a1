//! Level-set topology and boundaries on tiled grids.
//!
//! Both the Euler characteristic and the marching-squares boundary look at the
//! 2x2 block of cells around each grid vertex. A diagonal block is ambiguous;
//! it is resolved by the exact distance at the vertex for fields and counted as
//! connected for masks (closed pixels touch at corners). Using one rule in both
//! places makes the turning number of the boundary equal to `2 pi chi`.

use super::field::DistanceField;
use super::{processing_tiles, Grid, TileIndex, TILE};
use crate::geom::Vec2;
use std::f64::consts::PI;

const N: usize = TILE + 1;

pub(crate) trait Tiled {
    fn grid(&self) -> &Grid;
    fn index(&self) -> &TileIndex;
    fn uniform(&self, tx: i64, ty: i64) -> Option<bool>;
    fn fill_inside(&self, tx: i64, ty: i64, buf: &mut [bool]);
    /// Whether the two inside cells of a diagonal block at `vertex` are joined.
    fn joined(&self, vertex: Vec2) -> bool;
}

pub(crate) struct Level<'a> {
    pub field: &'a DistanceField,
    pub eps: f64,
}

impl Tiled for Level<'_> {
    fn grid(&self) -> &Grid {
        &self.field.grid
    }
    fn index(&self) -> &TileIndex {
        &self.field.index
    }
    fn uniform(&self, tx: i64, ty: i64) -> Option<bool> {
        self.field.tile_uniform(tx, ty, self.eps)
    }
    fn fill_inside(&self, tx: i64, ty: i64, buf: &mut [bool]) {
        let mut vals = [0.0; N * N];
        self.field.fill_block(tx, ty, &mut vals);
        for (b, v) in buf.iter_mut().zip(vals) {
            *b = v <= self.eps;
        }
    }
    fn joined(&self, vertex: Vec2) -> bool {
        self.field.sample(vertex) <= self.eps
    }
}

/// Visits the 2x2 blocks that can be non-uniform, tile by tile.
/// The callback gets the tile, the local block origin and the inside flags buffer.
fn for_each_block<S: Tiled>(s: &S, mut f: impl FnMut(i64, i64, usize, usize, &[bool])) {
    let mut buf = [false; N * N];
    let tiles = processing_tiles(s.index(), |tx, ty| s.uniform(tx, ty) != Some(false));
    for (tx, ty) in tiles {
        let u = [
            s.uniform(tx, ty),
            s.uniform(tx + 1, ty),
            s.uniform(tx, ty + 1),
            s.uniform(tx + 1, ty + 1),
        ];
        if u[0].is_some() && u.iter().all(|&x| x == u[0]) {
            continue;
        }
        s.fill_inside(tx, ty, &mut buf);
        if u[0].is_some() {
            for b in 0..TILE {
                f(tx, ty, TILE - 1, b, &buf);
            }
            for a in 0..TILE - 1 {
                f(tx, ty, a, TILE - 1, &buf);
            }
        } else {
            for b in 0..TILE {
                for a in 0..TILE {
                    f(tx, ty, a, b, &buf);
                }
            }
        }
    }
}

#[inline]
fn corners(buf: &[bool], a: usize, b: usize) -> [bool; 4] {
    [
        buf[b * N + a],
        buf[b * N + a + 1],
        buf[(b + 1) * N + a + 1],
        buf[(b + 1) * N + a],
    ]
}

fn vertex_of(g: &Grid, tx: i64, ty: i64, a: usize, b: usize) -> Vec2 {
    let c = g.center(tx * TILE as i64 + a as i64, ty * TILE as i64 + b as i64);
    Vec2::new(c.x + 0.5 * g.h, c.y + 0.5 * g.h)
}

/// Euler characteristic in quarter units, with blocks resolved by `s.joined`.
pub(crate) fn euler_quarters<S: Tiled>(s: &S) -> i64 {
    let mut q = 0i64;
    let g = *s.grid();
    for_each_block(s, |tx, ty, a, b, buf| {
        let c = corners(buf, a, b);
        let n = c.iter().filter(|&&x| x).count();
        q += match n {
            1 => 1,
            3 => -1,
            2 if c[0] == c[2] => {
                if s.joined(vertex_of(&g, tx, ty, a, b)) {
                    -2
                } else {
                    2
                }
            }
            _ => 0,
        };
    });
    q
}

/// Euler characteristic of `{distance <= eps}` over the field's care set.
pub fn euler_characteristic_at(field: &DistanceField, eps: f64) -> i64 {
    let q = euler_quarters(&Level { field, eps });
    debug_assert_eq!(q % 4, 0);
    q / 4
}

/// Closed boundary curve, material on the left.
#[derive(Clone, Debug, Default)]
pub struct Loop {
    pub points: Vec<Vec2>,
}

impl Loop {
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|k| self.points[k].cross(self.points[(k + 1) % n]))
            .sum::<f64>()
            * 0.5
    }

    pub fn length(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|k| self.points[k].dist(self.points[(k + 1) % n]))
            .sum()
    }

    /// Exterior angle at each vertex, in `(-pi, pi]`, positive for left turns.
    pub fn turning(&self) -> Vec<f64> {
        let n = self.points.len();
        (0..n)
            .map(|k| {
                let a = self.points[k] - self.points[(k + n - 1) % n];
                let b = self.points[(k + 1) % n] - self.points[k];
                a.cross(b).atan2(a.dot(b))
            })
            .collect()
    }

    /// Length of the outgoing edge at each vertex.
    pub fn edge_lengths(&self) -> Vec<f64> {
        let n = self.points.len();
        (0..n)
            .map(|k| self.points[k].dist(self.points[(k + 1) % n]))
            .collect()
    }

    pub fn turning_number(&self) -> f64 {
        self.turning().iter().sum::<f64>() / (2.0 * PI)
    }
}

/// Boundary of `{distance <= eps}` as closed polylines.
#[derive(Clone, Debug)]
pub struct BoundaryPolygons {
    pub eps: f64,
    pub h: f64,
    pub loops: Vec<Loop>,
}

impl BoundaryPolygons {
    pub fn area(&self) -> f64 {
        self.loops.iter().map(Loop::signed_area).sum()
    }

    pub fn length(&self) -> f64 {
        self.loops.iter().map(Loop::length).sum()
    }

    /// Sum of all turning angles.
    pub fn total_turning(&self) -> f64 {
        self.loops
            .iter()
            .map(|l| l.turning().iter().sum::<f64>())
            .sum()
    }

    /// Outer boundaries, one per connected component.
    pub fn components(&self) -> usize {
        self.loops.iter().filter(|l| l.signed_area() > 0.0).count()
    }
}

struct Seg {
    from: u64,
    to: u64,
    p: Vec2,
}

/// Marching squares on the field at level `eps`, linear interpolation on edges.
pub fn boundary_polygons(field: &DistanceField, eps: f64) -> BoundaryPolygons {
    let g = field.grid;
    let level = Level { field, eps };
    let stride = g.width as u64 + 2;
    // Crossing on the grid edge from cell (i, j) to (i+1, j) (dir 0) or (i, j+1) (dir 1).
    let id = |i: i64, j: i64, dir: u64| (((j + 1) as u64 * stride + (i + 1) as u64) << 1) | dir;
    let mut vals = [0.0; N * N];
    let mut cur_tile = (i64::MIN, i64::MIN);
    let mut segs: Vec<Seg> = Vec::new();
    for_each_block(&level, |tx, ty, a, b, buf| {
        if cur_tile != (tx, ty) {
            field.fill_block(tx, ty, &mut vals);
            cur_tile = (tx, ty);
        }
        let c = corners(buf, a, b);
        let n = c.iter().filter(|&&x| x).count();
        if n == 0 || n == 4 {
            return;
        }
        let i = tx * TILE as i64 + a as i64;
        let j = ty * TILE as i64 + b as i64;
        let v = |da: usize, db: usize| vals[(b + db) * N + a + da];
        let cross = |bi: i64, bj: i64, v0: f64, v1: f64, dir: u64| {
            let t = ((eps - v0) / (v1 - v0)).clamp(1e-9, 1.0 - 1e-9);
            let base = g.center(bi, bj);
            let p = if dir == 0 {
                Vec2::new(base.x + t * g.h, base.y)
            } else {
                Vec2::new(base.x, base.y + t * g.h)
            };
            (id(bi, bj, dir), p)
        };
        let edges = [
            cross(i, j, v(0, 0), v(1, 0), 0),
            cross(i + 1, j, v(1, 0), v(1, 1), 1),
            cross(i, j + 1, v(0, 1), v(1, 1), 0),
            cross(i, j, v(0, 0), v(0, 1), 1),
        ];
        let exits: Vec<usize> = (0..4).filter(|&k| c[k] && !c[(k + 1) % 4]).collect();
        let entries: Vec<usize> = (0..4).filter(|&k| !c[k] && c[(k + 1) % 4]).collect();
        let mut push = |x: usize, e: usize| {
            segs.push(Seg {
                from: edges[x].0,
                to: edges[e].0,
                p: edges[x].1,
            });
        };
        if exits.len() == 1 {
            push(exits[0], entries[0]);
        } else {
            let joined = level.joined(vertex_of(&g, tx, ty, a, b));
            for &x in &exits {
                let e = if joined { (x + 1) % 4 } else { (x + 3) % 4 };
                push(x, e);
            }
        }
    });
    segs.sort_unstable_by_key(|s| s.from);
    let mut used = vec![false; segs.len()];
    let mut loops = Vec::new();
    for start in 0..segs.len() {
        if used[start] {
            continue;
        }
        let mut pts = Vec::new();
        let mut k = start;
        while !used[k] {
            used[k] = true;
            pts.push(segs[k].p);
            k = segs
                .binary_search_by_key(&segs[k].to, |s| s.from)
                .expect("every crossing is entered and left once");
        }
        loops.push(Loop { points: pts });
    }
    BoundaryPolygons { eps, h: g.h, loops }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::hierarchy::CloudTree;
    use crate::ifs::PointCloud;
    use std::sync::Arc;

    fn field(points: Vec<Vec2>, h: f64, band: Option<(f64, f64)>) -> DistanceField {
        let cloud = PointCloud {
            points,
            hausdorff_error: 0.0,
        };
        let grid = Grid::covering(&Rect::new(Vec2::new(-1.0, -1.0), Vec2::new(2.5, 2.0)), h);
        DistanceField::build(Arc::new(CloudTree::new(&cloud)), grid, band, None).unwrap()
    }

    #[test]
    fn disk_boundary() {
        let f = field(vec![Vec2::new(0.3, 0.2)], 0.01, None);
        let b = boundary_polygons(&f, 0.5);
        assert_eq!(b.loops.len(), 1);
        assert!((b.area() - PI * 0.25).abs() < 2e-3);
        assert!((b.length() - PI).abs() < 5e-3);
        assert!((b.total_turning() - 2.0 * PI).abs() < 1e-9);
        assert_eq!(euler_characteristic_at(&f, 0.5), 1);
    }

    #[test]
    fn annulus_has_zero_euler_characteristic() {
        let pts: Vec<Vec2> = (0..400)
            .map(|k| Vec2::new(0.5, 0.5) + Vec2::new(1.0, 0.0).rotate(k as f64 * 2.0 * PI / 400.0))
            .collect();
        for band in [None, Some((0.2, 0.3))] {
            let f = field(pts.clone(), 0.01, band);
            let b = boundary_polygons(&f, 0.25);
            assert_eq!(b.loops.len(), 2);
            assert_eq!(b.components(), 1);
            assert_eq!(euler_characteristic_at(&f, 0.25), 0);
            assert!(b.total_turning().abs() < 1e-9);
            let exact = PI * (1.25f64.powi(2) - 0.75f64.powi(2));
            assert!((b.area() - exact).abs() < 5e-3);
        }
    }

    #[test]
    fn two_disks_touching_diagonally_follow_the_vertex_rule() {
        // Two points whose eps-disks just meet at a point offset from the grid.
        let pts = vec![Vec2::new(0.0, 0.0), Vec2::new(0.6, 0.8)];
        for eps in [0.49, 0.4999, 0.5001, 0.51] {
            let f = field(pts.clone(), 0.013, None);
            let b = boundary_polygons(&f, eps);
            let chi = euler_characteristic_at(&f, eps);
            assert!((b.total_turning() - 2.0 * PI * chi as f64).abs() < 1e-9);
            assert_eq!(chi as usize, b.components());
        }
    }
}
