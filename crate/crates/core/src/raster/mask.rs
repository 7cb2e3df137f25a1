use super::contour::{euler_quarters, Level, Tiled};
use super::field::DistanceField;
use super::{Grid, TileIndex, ABSENT, DATA0, EMPTY, FULL, TILE};
use crate::error::{Error, Result};
use crate::geom::Vec2;

const WORDS: usize = TILE * TILE / 64;

/// Set of grid cells, stored per tile like [`DistanceField`].
#[derive(Clone, Debug)]
pub struct BinaryMask {
    pub grid: Grid,
    /// Each cell center of the mask is within `delta` of the modelled set's
    /// threshold region: `F_{eps-delta}` is covered by the closed pixels and the
    /// pixels lie in `F_{eps+delta}`.
    pub delta: f64,
    pub(crate) index: TileIndex,
    bits: Vec<u64>,
}

/// Cells with center distance at most `eps`.
pub fn parallel_mask(field: &DistanceField, eps: f64) -> BinaryMask {
    let mut index = field.index.clone();
    let mut bits = Vec::new();
    let mut buf = [false; (TILE + 1) * (TILE + 1)];
    let level = Level { field, eps };
    for (tx, ty, code) in field.index.present() {
        let new = match code {
            ABSENT => ABSENT,
            FULL | EMPTY => match level.uniform(tx, ty) {
                Some(true) => FULL,
                _ => EMPTY,
            },
            _ => {
                level.fill_inside(tx, ty, &mut buf);
                let mut w = [0u64; WORDS];
                for b in 0..TILE {
                    for a in 0..TILE {
                        if buf[b * (TILE + 1) + a] {
                            let k = b * TILE + a;
                            w[k / 64] |= 1 << (k % 64);
                        }
                    }
                }
                push_tile(&mut bits, w)
            }
        };
        index.set(tx, ty, new);
    }
    BinaryMask {
        grid: field.grid,
        delta: field.source_error + field.grid.h * std::f64::consts::SQRT_2 / 2.0,
        index,
        bits,
    }
}

fn push_tile(bits: &mut Vec<u64>, w: [u64; WORDS]) -> u32 {
    let cells = TILE as u32 * TILE as u32;
    let ones: u32 = w.iter().map(|x| x.count_ones()).sum();
    if ones == 0 {
        EMPTY
    } else if ones == cells {
        FULL
    } else {
        let c = DATA0 + (bits.len() / WORDS) as u32;
        bits.extend_from_slice(&w);
        c
    }
}

impl BinaryMask {
    fn tile_words(&self, code: u32) -> [u64; WORDS] {
        match code {
            ABSENT | EMPTY => [0; WORDS],
            FULL => [u64::MAX; WORDS],
            c => {
                let s = (c - DATA0) as usize * WORDS;
                self.bits[s..s + WORDS].try_into().expect("tile words")
            }
        }
    }

    #[inline]
    pub fn get(&self, i: i64, j: i64) -> bool {
        if !self.grid.contains_cell(i, j) {
            return false;
        }
        let t = TILE as i64;
        match self.index.get(i.div_euclid(t), j.div_euclid(t)) {
            ABSENT | EMPTY => false,
            FULL => true,
            c => {
                let k = (j.rem_euclid(t) * t + i.rem_euclid(t)) as usize;
                self.bits[(c - DATA0) as usize * WORDS + k / 64] >> (k % 64) & 1 == 1
            }
        }
    }

    /// Whether the cell containing `p` is set.
    pub fn contains(&self, p: Vec2) -> bool {
        let (i, j) = self.grid.cell_of(p);
        self.get(i, j)
    }

    fn combine(&self, o: &BinaryMask, f: impl Fn(u64, u64) -> u64) -> Result<BinaryMask> {
        if self.grid != o.grid {
            return Err(Error::Domain("masks live on different grids".into()));
        }
        let mut keys: Vec<u64> = self.index.keys();
        keys.extend(o.index.keys());
        keys.sort_unstable();
        keys.dedup();
        let mut index = TileIndex::sparse(&self.grid, keys.clone());
        let mut bits = Vec::new();
        let tx = self.grid.tiles_x() as u64;
        for k in keys {
            let (x, y) = ((k % tx) as i64, (k / tx) as i64);
            let a = self.tile_words(self.index.get(x, y));
            let b = o.tile_words(o.index.get(x, y));
            let mut w = [0u64; WORDS];
            for q in 0..WORDS {
                w[q] = f(a[q], b[q]);
            }
            index.set(x, y, push_tile(&mut bits, w));
        }
        Ok(BinaryMask {
            grid: self.grid,
            delta: self.delta.max(o.delta),
            index,
            bits,
        })
    }

    pub fn and(&self, o: &BinaryMask) -> Result<BinaryMask> {
        self.combine(o, |a, b| a & b)
    }

    pub fn or(&self, o: &BinaryMask) -> Result<BinaryMask> {
        self.combine(o, |a, b| a | b)
    }

    pub fn count(&self) -> u64 {
        self.index
            .present()
            .into_iter()
            .map(|(_, _, c)| {
                self.tile_words(c)
                    .iter()
                    .map(|w| w.count_ones() as u64)
                    .sum::<u64>()
            })
            .sum()
    }

    pub fn area(&self) -> f64 {
        self.count() as f64 * self.grid.h * self.grid.h
    }

    /// Set cells, in tile order.
    pub fn cells(&self) -> Vec<(i64, i64)> {
        let t = TILE as i64;
        let mut out = Vec::new();
        for (tx, ty, c) in self.index.present() {
            let w = self.tile_words(c);
            for k in 0..TILE * TILE {
                if w[k / 64] >> (k % 64) & 1 == 1 {
                    let (i, j) = (tx * t + (k % TILE) as i64, ty * t + (k / TILE) as i64);
                    if self.grid.contains_cell(i, j) {
                        out.push((i, j));
                    }
                }
            }
        }
        out
    }

    /// Number of 8-connected components.
    pub fn components(&self) -> usize {
        let cells = self.cells();
        let mut seen = std::collections::HashSet::with_capacity(cells.len());
        let mut count = 0;
        for &c in &cells {
            if !seen.insert(c) {
                continue;
            }
            count += 1;
            let mut stack = vec![c];
            while let Some((i, j)) = stack.pop() {
                for dj in -1..=1 {
                    for di in -1..=1 {
                        let n = (i + di, j + dj);
                        if self.get(n.0, n.1) && seen.insert(n) {
                            stack.push(n);
                        }
                    }
                }
            }
        }
        count
    }
}

impl Tiled for BinaryMask {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn index(&self) -> &TileIndex {
        &self.index
    }
    fn uniform(&self, tx: i64, ty: i64) -> Option<bool> {
        match self.index.get(tx, ty) {
            ABSENT | EMPTY => Some(false),
            FULL => Some(true),
            _ => None,
        }
    }
    fn fill_inside(&self, tx: i64, ty: i64, buf: &mut [bool]) {
        let n = TILE + 1;
        let t = TILE as i64;
        for b in 0..n {
            for a in 0..n {
                buf[b * n + a] = self.get(tx * t + a as i64, ty * t + b as i64);
            }
        }
    }
    fn joined(&self, _vertex: Vec2) -> bool {
        true
    }
}

/// Euler characteristic `V - E + F` of the union of closed pixels.
pub fn euler_characteristic(mask: &BinaryMask) -> i64 {
    let q = euler_quarters(mask);
    debug_assert_eq!(q % 4, 0);
    q / 4
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::ifs::PointCloud;
    use crate::raster::field::distance_field;

    fn brute_chi(mask: &BinaryMask) -> i64 {
        use std::collections::HashSet;
        let cells = mask.cells();
        let mut v = HashSet::new();
        let mut e = HashSet::new();
        for &(i, j) in &cells {
            for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                v.insert((i + a, j + b));
            }
            e.insert((i, j, 0));
            e.insert((i, j + 1, 0));
            e.insert((i, j, 1));
            e.insert((i + 1, j, 1));
        }
        v.len() as i64 - e.len() as i64 + cells.len() as i64
    }

    #[test]
    fn closed_pixel_euler_characteristic_matches_counting() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let pts: Vec<Vec2> = (0..6).map(|_| Vec2::new(rng.gen(), rng.gen())).collect();
            let cloud = PointCloud {
                points: pts,
                hausdorff_error: 0.0,
            };
            let grid = Grid::covering(&Rect::new(Vec2::new(-0.3, -0.3), Vec2::new(1.3, 1.3)), 0.02);
            let f = distance_field(&cloud, grid).unwrap();
            let eps = rng.gen_range(0.05..0.3);
            let m = parallel_mask(&f, eps);
            assert_eq!(euler_characteristic(&m), brute_chi(&m));
        }
    }

    #[test]
    fn union_and_intersection() {
        let grid = Grid::covering(&Rect::new(Vec2::new(-1.0, -1.0), Vec2::new(2.0, 1.0)), 0.01);
        let a = distance_field(
            &PointCloud {
                points: vec![Vec2::ZERO],
                hausdorff_error: 0.0,
            },
            grid,
        )
        .unwrap();
        let b = distance_field(
            &PointCloud {
                points: vec![Vec2::new(1.0, 0.0)],
                hausdorff_error: 0.0,
            },
            grid,
        )
        .unwrap();
        let (ma, mb) = (parallel_mask(&a, 0.6), parallel_mask(&b, 0.6));
        let u = ma.or(&mb).unwrap();
        let i = ma.and(&mb).unwrap();
        assert_eq!(u.count() + i.count(), ma.count() + mb.count());
        assert_eq!(i.components(), 1);
        assert_eq!(euler_characteristic(&u), 1);
        assert_eq!(
            parallel_mask(&a, 0.3)
                .or(&parallel_mask(&b, 0.3))
                .unwrap()
                .components(),
            2
        );
    }
}
