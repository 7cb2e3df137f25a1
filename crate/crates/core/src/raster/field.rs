use super::{Grid, TileIndex, ABSENT, DATA0, EMPTY, FULL, TILE};
use crate::error::{Error, Result};
use crate::geom::{Rect, Vec2};
use crate::hierarchy::{nearest_distance, nearest_from, BallTree, CloudTree};
use crate::ifs::PointCloud;
use std::sync::Arc;

/// Upper limit on stored band cells (8 bytes each).
pub const MAX_BAND_CELLS: usize = 120_000_000;
/// Upper limit on tiles in a dense directory.
pub const MAX_DENSE_TILES: usize = 40_000_000;

/// Exact point queries against the source set.
pub trait PointDistance: Send + Sync {
    fn distance(&self, p: Vec2) -> f64;
}

struct TreeDistance<T: BallTree>(Arc<T>);

impl<T: BallTree> PointDistance for TreeDistance<T> {
    fn distance(&self, p: Vec2) -> f64 {
        nearest_distance(self.0.as_ref(), p)
    }
}

/// Distances from cell centers to a finite point set, clamped to `[floor, cap]`.
///
/// Within the clamping band the values are exact. Tiles outside the care set
/// read as `cap`, so every level set in `(floor, cap)` stays closed there.
pub struct DistanceField {
    pub grid: Grid,
    pub floor: f64,
    pub cap: f64,
    pub source_error: f64,
    pub(crate) index: TileIndex,
    pub(crate) data: Vec<f64>,
    sampler: Arc<dyn PointDistance>,
}

impl DistanceField {
    /// Builds the field from a ball tree.
    ///
    /// `band = Some((lo, hi))` keeps exact values only where level sets in
    /// `[lo, hi]` are decided; `care = Some(rects)` restricts to tiles meeting them.
    pub fn build<T: BallTree + 'static>(
        tree: Arc<T>,
        grid: Grid,
        band: Option<(f64, f64)>,
        care: Option<&[Rect]>,
    ) -> Result<Self> {
        let margin = 1.5 * grid.h;
        let (floor, cap) = match band {
            Some((lo, hi)) => ((lo - margin).max(0.0), hi + margin),
            None => (0.0, f64::INFINITY),
        };
        let index = match care {
            None => {
                if grid.tiles_x() * grid.tiles_y() > MAX_DENSE_TILES {
                    return Err(Error::Resource(format!(
                        "grid of {}x{} cells is too large",
                        grid.width, grid.height
                    )));
                }
                TileIndex::dense(&grid)
            }
            Some(rects) => TileIndex::sparse(&grid, grid.tiles_meeting(rects)),
        };
        let mut b = Builder {
            tree: tree.as_ref(),
            grid,
            floor,
            cap,
            index,
            data: Vec::new(),
            scratch: Vec::new(),
        };
        let tiles: Option<Vec<(i64, i64)>> = if b.index.is_dense() {
            None
        } else {
            let tx = grid.tiles_x() as u64;
            Some(
                b.index
                    .keys()
                    .into_iter()
                    .map(|k| ((k % tx) as i64, (k / tx) as i64))
                    .collect(),
            )
        };
        let span = grid.tiles_x().max(grid.tiles_y()).next_power_of_two() as i64;
        let roots = tree.roots().to_vec();
        b.block(0, 0, span, tiles, roots)?;
        let Builder { index, data, .. } = b;
        Ok(DistanceField {
            grid,
            floor,
            cap,
            source_error: tree.source_error(),
            index,
            data,
            sampler: Arc::new(TreeDistance(tree)),
        })
    }

    /// Exact distance at an arbitrary point.
    pub fn sample(&self, p: Vec2) -> f64 {
        self.sampler.distance(p)
    }

    pub fn sampler(&self) -> Arc<dyn PointDistance> {
        self.sampler.clone()
    }

    #[inline]
    pub fn value(&self, i: i64, j: i64) -> f64 {
        if !self.grid.contains_cell(i, j) {
            return self.cap;
        }
        let t = TILE as i64;
        match self.index.get(i.div_euclid(t), j.div_euclid(t)) {
            ABSENT | EMPTY => self.cap,
            FULL => self.floor,
            c => {
                let base = (c - DATA0) as usize * TILE * TILE;
                self.data[base + (j.rem_euclid(t) * t + i.rem_euclid(t)) as usize]
            }
        }
    }

    /// Values of the `(TILE+1)^2` cells starting at the lower-left cell of tile `(tx, ty)`.
    pub(crate) fn fill_block(&self, tx: i64, ty: i64, buf: &mut [f64]) {
        let n = TILE + 1;
        let t = TILE as i64;
        for (dy, dx) in [(0i64, 0i64), (0, 1), (1, 0), (1, 1)] {
            let code = self.index.get(tx + dx, ty + dy);
            let (w, hgt) = (
                if dx == 0 { TILE } else { 1 },
                if dy == 0 { TILE } else { 1 },
            );
            for b in 0..hgt {
                for a in 0..w {
                    let i = (tx + dx) * t + a as i64;
                    let j = (ty + dy) * t + b as i64;
                    let v = if !self.grid.contains_cell(i, j) {
                        self.cap
                    } else {
                        match code {
                            ABSENT | EMPTY => self.cap,
                            FULL => self.floor,
                            c => self.data[(c - DATA0) as usize * TILE * TILE + b * TILE + a],
                        }
                    };
                    buf[(dy as usize * TILE + b) * n + dx as usize * TILE + a] = v;
                }
            }
        }
    }

    /// Tile state at threshold `eps`: `Some(true)` all inside, `Some(false)` all outside.
    pub(crate) fn tile_uniform(&self, tx: i64, ty: i64, eps: f64) -> Option<bool> {
        match self.index.get(tx, ty) {
            ABSENT | EMPTY => Some(eps >= self.cap),
            FULL => Some(eps >= self.floor),
            _ => None,
        }
    }

    /// Whether level sets at `eps` are fully resolved by the stored values.
    pub fn resolves(&self, eps: f64) -> bool {
        eps >= self.floor + self.grid.h && eps <= self.cap - self.grid.h
            || (self.floor == 0.0 && self.cap.is_infinite())
    }

    pub fn band_tiles(&self) -> usize {
        self.data.len() / (TILE * TILE)
    }
}

/// Exact full distance field of a point cloud.
pub fn distance_field(cloud: &PointCloud, grid: Grid) -> Result<DistanceField> {
    DistanceField::build(Arc::new(CloudTree::new(cloud)), grid, None, None)
}

struct Builder<'a, T: BallTree> {
    tree: &'a T,
    grid: Grid,
    floor: f64,
    cap: f64,
    index: TileIndex,
    data: Vec<f64>,
    scratch: Vec<T::Node>,
}

impl<T: BallTree> Builder<'_, T> {
    /// Rectangle spanned by the centers of grid cells in `[i0, i1) x [j0, j1)`, if any.
    fn centers(&self, i0: i64, j0: i64, i1: i64, j1: i64) -> Option<Rect> {
        let i1 = i1.min(self.grid.width as i64);
        let j1 = j1.min(self.grid.height as i64);
        (i0 < i1 && j0 < j1)
            .then(|| Rect::new(self.grid.center(i0, j0), self.grid.center(i1 - 1, j1 - 1)))
    }

    /// Refines and prunes candidates for a box; returns lower and upper distance bounds.
    fn classify(&mut self, r: &Rect, cands: &mut Vec<T::Node>) -> (f64, f64) {
        let t = self.tree;
        let rho = 0.5 * r.width().hypot(r.height());
        loop {
            let u = cands
                .iter()
                .map(|n| r.max_dist_to(t.witness(n)))
                .fold(f64::INFINITY, f64::min);
            let mut split = false;
            self.scratch.clear();
            for n in cands.drain(..) {
                let (c, rad) = t.ball(&n);
                if (r.dist_to(c) - rad).max(0.0) > u {
                    continue;
                }
                if rad > rho && !t.is_leaf(&n) {
                    t.children(&n, &mut self.scratch);
                    split = true;
                } else {
                    self.scratch.push(n);
                }
            }
            std::mem::swap(cands, &mut self.scratch);
            if !split {
                let l = cands
                    .iter()
                    .map(|n| {
                        let (c, rad) = t.ball(n);
                        (r.dist_to(c) - rad).max(0.0)
                    })
                    .fold(f64::INFINITY, f64::min);
                return (l, u);
            }
        }
    }

    fn block(
        &mut self,
        tx0: i64,
        ty0: i64,
        span: i64,
        tiles: Option<Vec<(i64, i64)>>,
        mut cands: Vec<T::Node>,
    ) -> Result<()> {
        if matches!(&tiles, Some(v) if v.is_empty()) {
            return Ok(());
        }
        let t = TILE as i64;
        let Some(r) = self.centers(tx0 * t, ty0 * t, (tx0 + span) * t, (ty0 + span) * t) else {
            return Ok(());
        };
        let (l, u) = self.classify(&r, &mut cands);
        let uniform = if l >= self.cap {
            Some(EMPTY)
        } else if u <= self.floor {
            Some(FULL)
        } else {
            None
        };
        if let Some(code) = uniform {
            self.mark(tx0, ty0, span, tiles.as_deref(), code);
            return Ok(());
        }
        if span == 1 {
            return self.tile(tx0, ty0, cands);
        }
        let half = span / 2;
        for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let (x0, y0) = (tx0 + dx * half, ty0 + dy * half);
            let sub = tiles.as_ref().map(|v| {
                v.iter()
                    .copied()
                    .filter(|&(x, y)| x >= x0 && x < x0 + half && y >= y0 && y < y0 + half)
                    .collect::<Vec<_>>()
            });
            self.block(x0, y0, half, sub, cands.clone())?;
        }
        Ok(())
    }

    fn mark(&mut self, tx0: i64, ty0: i64, span: i64, tiles: Option<&[(i64, i64)]>, code: u32) {
        match tiles {
            Some(v) => v.iter().for_each(|&(x, y)| self.index.set(x, y, code)),
            None => {
                let tx1 = (tx0 + span).min(self.index.tiles_x as i64);
                let ty1 = (ty0 + span).min(self.index.tiles_y as i64);
                for y in ty0..ty1 {
                    for x in tx0..tx1 {
                        self.index.set(x, y, code);
                    }
                }
            }
        }
    }

    fn tile(&mut self, tx: i64, ty: i64, cands: Vec<T::Node>) -> Result<()> {
        let mut vals = vec![self.cap; TILE * TILE];
        let t = TILE as i64;
        self.cells(
            tx * t,
            ty * t,
            TILE as i64,
            tx * t,
            ty * t,
            cands,
            &mut vals,
        );
        let code = if vals.iter().all(|&v| v >= self.cap) {
            EMPTY
        } else if vals.iter().all(|&v| v <= self.floor) {
            FULL
        } else {
            if self.data.len() + TILE * TILE > MAX_BAND_CELLS {
                return Err(Error::Resource(format!(
                    "distance band exceeds {MAX_BAND_CELLS} cells"
                )));
            }
            let c = DATA0 + (self.data.len() / (TILE * TILE)) as u32;
            self.data.extend_from_slice(&vals);
            c
        };
        self.index.set(tx, ty, code);
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn cells(
        &mut self,
        i0: i64,
        j0: i64,
        size: i64,
        bi: i64,
        bj: i64,
        mut cands: Vec<T::Node>,
        vals: &mut [f64],
    ) {
        let Some(r) = self.centers(i0, j0, i0 + size, j0 + size) else {
            return;
        };
        let (l, u) = self.classify(&r, &mut cands);
        let i1 = (i0 + size).min(self.grid.width as i64);
        let j1 = (j0 + size).min(self.grid.height as i64);
        let fill = if l >= self.cap {
            Some(self.cap)
        } else if u <= self.floor {
            Some(self.floor)
        } else {
            None
        };
        if let Some(v) = fill {
            for j in j0..j1 {
                for i in i0..i1 {
                    vals[((j - bj) * TILE as i64 + (i - bi)) as usize] = v;
                }
            }
            return;
        }
        if size <= 2 {
            for j in j0..j1 {
                for i in i0..i1 {
                    let p = self.grid.center(i, j);
                    let bound = u * (1.0 + 1e-9) + 1e-300;
                    let mut d = nearest_from(self.tree, &cands, p, bound);
                    if d >= bound {
                        d = nearest_from(self.tree, &cands, p, f64::INFINITY);
                    }
                    vals[((j - bj) * TILE as i64 + (i - bi)) as usize] =
                        d.clamp(self.floor, self.cap);
                }
            }
            return;
        }
        let half = size / 2;
        for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            self.cells(
                i0 + dx * half,
                j0 + dy * half,
                half,
                bi,
                bj,
                cands.clone(),
                vals,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::IfsTree;
    use crate::ifs::presets;

    fn brute(points: &[Vec2], p: Vec2) -> f64 {
        points
            .iter()
            .map(|q| q.dist(p))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn exact_field_matches_brute_force() {
        let ifs = presets::cantor_square(0.25).unwrap();
        let cloud = ifs.attractor_cloud(0.01).unwrap();
        let grid = Grid::new(Vec2::new(-0.3, -0.2), 0.037, 45, 41);
        let f = distance_field(&cloud, grid).unwrap();
        for j in 0..41 {
            for i in 0..45 {
                let d = brute(&cloud.points, grid.center(i, j));
                assert!((f.value(i, j) - d).abs() < 1e-14, "{i} {j}");
            }
        }
    }

    #[test]
    fn banded_field_is_exact_inside_band() {
        let ifs = presets::koch();
        let tree = Arc::new(IfsTree::new(&ifs, 0.002));
        let mut pts = Vec::new();
        let mut stack = tree.roots().to_vec();
        while let Some(n) = stack.pop() {
            if tree.is_leaf(&n) {
                tree.leaf_points(&n, &mut pts);
            } else {
                tree.children(&n, &mut stack);
            }
        }
        let grid = Grid::covering(
            &Rect::new(Vec2::new(-0.2, -0.2), Vec2::new(1.2, 0.6)),
            0.004,
        );
        let f = DistanceField::build(tree, grid, Some((0.05, 0.06)), None).unwrap();
        assert!(f.band_tiles() > 0);
        for j in 0..grid.height as i64 {
            for i in 0..grid.width as i64 {
                let d = brute(&pts, grid.center(i, j)).clamp(f.floor, f.cap);
                assert!((f.value(i, j) - d).abs() < 1e-13, "{i} {j}");
            }
        }
    }
}
