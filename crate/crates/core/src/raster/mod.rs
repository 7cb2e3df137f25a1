//! Rasterized parallel sets on sparse tiled grids.
//!
//! Grids are split into square tiles of [`TILE`] cells. A tile is either uniform
//! (entirely inside or outside the level set of interest) or stores per-cell
//! data. Tiles that were never requested are treated as outside, which frames
//! every windowed computation.

pub mod contour;
pub mod field;
pub mod io;
pub mod mask;
pub mod measure;

pub use contour::{boundary_polygons, euler_characteristic_at, BoundaryPolygons, Loop};
pub use field::{distance_field, DistanceField, PointDistance};
pub use mask::{euler_characteristic, parallel_mask, BinaryMask};
pub use measure::{curvature_c0, C0};

use crate::geom::{Rect, Vec2};

pub const TILE: usize = 16;

/// Uniform grid of square cells; cell `(i, j)` has center `origin + h (i + 1/2, j + 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub origin: Vec2,
    pub h: f64,
    pub width: usize,
    pub height: usize,
}

impl Grid {
    pub fn new(origin: Vec2, h: f64, width: usize, height: usize) -> Self {
        Grid {
            origin,
            h,
            width,
            height,
        }
    }

    /// Smallest grid with spacing `h` covering `r`, origin snapped to a multiple of `h`.
    pub fn covering(r: &Rect, h: f64) -> Self {
        let ox = (r.min.x / h).floor() * h;
        let oy = (r.min.y / h).floor() * h;
        let w = ((r.max.x - ox) / h).ceil().max(1.0) as usize;
        let hh = ((r.max.y - oy) / h).ceil().max(1.0) as usize;
        Grid::new(Vec2::new(ox, oy), h, w, hh)
    }

    pub fn cells(&self) -> f64 {
        self.width as f64 * self.height as f64
    }

    #[inline]
    pub fn center(&self, i: i64, j: i64) -> Vec2 {
        Vec2::new(
            self.origin.x + (i as f64 + 0.5) * self.h,
            self.origin.y + (j as f64 + 0.5) * self.h,
        )
    }

    /// Cell containing `p` (may be outside the grid).
    pub fn cell_of(&self, p: Vec2) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.h).floor() as i64,
            ((p.y - self.origin.y) / self.h).floor() as i64,
        )
    }

    pub fn contains_cell(&self, i: i64, j: i64) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.width && (j as usize) < self.height
    }

    pub fn tiles_x(&self) -> usize {
        self.width.div_ceil(TILE)
    }

    pub fn tiles_y(&self) -> usize {
        self.height.div_ceil(TILE)
    }

    pub fn extent(&self) -> Rect {
        Rect::new(
            self.origin,
            Vec2::new(
                self.origin.x + self.width as f64 * self.h,
                self.origin.y + self.height as f64 * self.h,
            ),
        )
    }

    /// Tiles meeting any of the rectangles, as sorted keys.
    pub fn tiles_meeting(&self, rects: &[Rect]) -> Vec<u64> {
        let tx = self.tiles_x() as i64;
        let ty = self.tiles_y() as i64;
        let span = (TILE as f64) * self.h;
        let mut keys = Vec::new();
        for r in rects {
            let x0 = (((r.min.x - self.origin.x) / span).floor() as i64).clamp(0, tx - 1);
            let x1 = (((r.max.x - self.origin.x) / span).floor() as i64).clamp(0, tx - 1);
            let y0 = (((r.min.y - self.origin.y) / span).floor() as i64).clamp(0, ty - 1);
            let y1 = (((r.max.y - self.origin.y) / span).floor() as i64).clamp(0, ty - 1);
            if r.max.x < self.origin.x || r.max.y < self.origin.y {
                continue;
            }
            for y in y0..=y1 {
                for x in x0..=x1 {
                    keys.push((y * tx + x) as u64);
                }
            }
        }
        keys.sort_unstable();
        keys.dedup();
        keys
    }
}

pub(crate) const ABSENT: u32 = 0;
pub(crate) const FULL: u32 = 1;
pub(crate) const EMPTY: u32 = 2;
pub(crate) const DATA0: u32 = 3;

/// Tile directory: dense when every tile is present, sorted keys otherwise.
#[derive(Clone, Debug)]
pub(crate) struct TileIndex {
    pub tiles_x: usize,
    pub tiles_y: usize,
    dense: Option<Vec<u32>>,
    keys: Vec<u64>,
    codes: Vec<u32>,
}

impl TileIndex {
    pub fn dense(grid: &Grid) -> Self {
        TileIndex {
            tiles_x: grid.tiles_x(),
            tiles_y: grid.tiles_y(),
            dense: Some(vec![ABSENT; grid.tiles_x() * grid.tiles_y()]),
            keys: Vec::new(),
            codes: Vec::new(),
        }
    }

    /// Sparse index over the given sorted keys, all initially absent.
    pub fn sparse(grid: &Grid, keys: Vec<u64>) -> Self {
        let n = keys.len();
        TileIndex {
            tiles_x: grid.tiles_x(),
            tiles_y: grid.tiles_y(),
            dense: None,
            keys,
            codes: vec![ABSENT; n],
        }
    }

    #[inline]
    fn slot(&self, tx: i64, ty: i64) -> Option<usize> {
        if tx < 0 || ty < 0 || tx as usize >= self.tiles_x || ty as usize >= self.tiles_y {
            return None;
        }
        let key = ty as u64 * self.tiles_x as u64 + tx as u64;
        match &self.dense {
            Some(_) => Some(key as usize),
            None => self.keys.binary_search(&key).ok(),
        }
    }

    #[inline]
    pub fn get(&self, tx: i64, ty: i64) -> u32 {
        match self.slot(tx, ty) {
            Some(s) => match &self.dense {
                Some(d) => d[s],
                None => self.codes[s],
            },
            None => ABSENT,
        }
    }

    pub fn set(&mut self, tx: i64, ty: i64, code: u32) {
        let s = self.slot(tx, ty).expect("tile is part of the index");
        match &mut self.dense {
            Some(d) => d[s] = code,
            None => self.codes[s] = code,
        }
    }

    /// Present tiles (code != ABSENT) as (tx, ty, code).
    pub fn present(&self) -> Vec<(i64, i64, u32)> {
        let tx = self.tiles_x as u64;
        let decode = |k: u64, c: u32| ((k % tx) as i64, (k / tx) as i64, c);
        match &self.dense {
            Some(d) => d
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != ABSENT)
                .map(|(k, &c)| decode(k as u64, c))
                .collect(),
            None => self
                .keys
                .iter()
                .zip(&self.codes)
                .filter(|(_, &c)| c != ABSENT)
                .map(|(&k, &c)| decode(k, c))
                .collect(),
        }
    }

    pub fn keys(&self) -> Vec<u64> {
        match &self.dense {
            Some(d) => (0..d.len() as u64).collect(),
            None => self.keys.clone(),
        }
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }
}

/// Tiles whose dual squares (top-left cell inside the tile) may be non-uniform.
/// `active(tx, ty)` tells whether a present tile may hold an inside cell.
pub(crate) fn processing_tiles(
    index: &TileIndex,
    active: impl Fn(i64, i64) -> bool,
) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for (tx, ty, _) in index.present() {
        if active(tx, ty) {
            for (dx, dy) in [(0, 0), (-1, 0), (0, -1), (-1, -1)] {
                out.push((tx + dx, ty + dy));
            }
        }
    }
    out.sort_unstable_by_key(|&(x, y)| (y, x));
    out.dedup();
    out
}
