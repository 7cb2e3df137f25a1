//! Bounding-disk hierarchies over point sets, and branch-and-bound queries on them.
//!
//! Two sources implement [`BallTree`]: the cylinder tree of an IFS (nodes are
//! cylinders `S_ω F`, leaves are cylinders of diameter at most the target error)
//! and a k-d tree over an explicit point cloud. All queries return exact
//! distances to the leaf point set, whose Hausdorff distance to the modelled set
//! is `source_error()`.

use crate::geom::{bounding_rect, Polygon, Rect, Vec2};
use crate::ifs::{Affine, Ifs, PointCloud, Word};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

pub trait BallTree: Send + Sync {
    type Node: Clone + Send + Sync;
    fn roots(&self) -> &[Self::Node];
    /// Disk containing every point below the node.
    fn ball(&self, n: &Self::Node) -> (Vec2, f64);
    /// Some point of the set below the node.
    fn witness(&self, n: &Self::Node) -> Vec2;
    fn is_leaf(&self, n: &Self::Node) -> bool;
    fn children(&self, n: &Self::Node, out: &mut Vec<Self::Node>);
    fn leaf_points(&self, n: &Self::Node, out: &mut Vec<Vec2>);
    fn source_error(&self) -> f64;
}

#[derive(Clone, Copy, Debug)]
pub struct CylNode {
    pub map: Affine,
    pub code: u64,
    pub len: u16,
}

/// Implicit cylinder tree of an IFS rooted at a set of words.
pub struct IfsTree {
    maps: Vec<Affine>,
    seeds: Vec<Vec2>,
    center: Vec2,
    radius: f64,
    diam: f64,
    target_error: f64,
    roots: Vec<CylNode>,
}

impl IfsTree {
    pub fn new(ifs: &Ifs, target_error: f64) -> Self {
        Self::for_words(ifs, &[Word::empty()], target_error)
    }

    pub fn for_words(ifs: &Ifs, words: &[Word], target_error: f64) -> Self {
        let (center, radius) = ifs.bounding_disk();
        let geom = Geometry {
            maps: ifs.affines(),
            seeds: ifs.seeds(),
            center,
            radius,
            diam: ifs.diameter_bound(),
        };
        Self::from_geometry(&geom, words, target_error)
    }

    fn from_geometry(g: &Geometry, words: &[Word], target_error: f64) -> Self {
        let n = g.maps.len() as u64;
        let roots = words
            .iter()
            .map(|w| {
                let mut node = CylNode {
                    map: Affine::identity(),
                    code: 0,
                    len: 0,
                };
                for &l in &w.0 {
                    node = child_node(&node, &g.maps[l as usize - 1], n, l as u64 - 1);
                }
                node
            })
            .collect();
        IfsTree {
            maps: g.maps.clone(),
            seeds: g.seeds.clone(),
            center: g.center,
            radius: g.radius,
            diam: g.diam,
            target_error,
            roots,
        }
    }

    /// Same geometry with other roots.
    pub fn rerooted(&self, words: &[Word]) -> IfsTree {
        let g = Geometry {
            maps: self.maps.clone(),
            seeds: self.seeds.clone(),
            center: self.center,
            radius: self.radius,
            diam: self.diam,
        };
        Self::from_geometry(&g, words, self.target_error)
    }

    pub fn with_target_error(&self, target_error: f64) -> IfsTree {
        let mut t = self.rerooted(&[]);
        t.roots = self.roots.clone();
        t.target_error = target_error;
        t
    }

    pub fn root_node(&self, w: &Word) -> CylNode {
        self.rerooted(std::slice::from_ref(w)).roots[0]
    }

    pub fn n_maps(&self) -> usize {
        self.maps.len()
    }

    pub fn diam(&self) -> f64 {
        self.diam
    }

    pub fn bounding_disk(&self) -> (Vec2, f64) {
        (self.center, self.radius)
    }

    pub fn target_error(&self) -> f64 {
        self.target_error
    }

    /// Decode the word of a node (valid while `N^len` fits in 64 bits).
    pub fn word_of(&self, node: &CylNode) -> Word {
        let n = self.maps.len() as u64;
        let mut code = node.code;
        let mut letters = vec![0u16; node.len as usize];
        for slot in letters.iter_mut().rev() {
            *slot = (code % n) as u16 + 1;
            code /= n;
        }
        Word(letters)
    }

    pub fn child(&self, node: &CylNode, letter: usize) -> CylNode {
        child_node(
            node,
            &self.maps[letter],
            self.maps.len() as u64,
            letter as u64,
        )
    }

    /// Bounding rectangle of the leaf set (enlarged by the source error).
    pub fn bounds(&self) -> Rect {
        let mut r: Option<Rect> = None;
        for root in &self.roots {
            let (c, rad) = self.ball(root);
            // Refine a few levels for a tighter box.
            let mut nodes = vec![*root];
            while nodes.len() < 4096 && !nodes.iter().all(|n| self.is_leaf(n)) {
                let mut next = Vec::new();
                for n in &nodes {
                    if self.is_leaf(n) {
                        next.push(*n);
                    } else {
                        self.children(n, &mut next);
                    }
                }
                nodes = next;
            }
            let mut b = Rect::around(c, rad);
            let boxes = nodes.iter().map(|n| {
                let (c, rad) = self.ball(n);
                Rect::around(c, rad)
            });
            if let Some(u) = boxes.reduce(|a, b| a.union(&b)) {
                b = b.intersect(&u).unwrap_or(u);
            }
            r = Some(match r {
                Some(r) => r.union(&b),
                None => b,
            });
        }
        r.expect("tree has roots")
    }
}

struct Geometry {
    maps: Vec<Affine>,
    seeds: Vec<Vec2>,
    center: Vec2,
    radius: f64,
    diam: f64,
}

fn child_node(node: &CylNode, m: &Affine, n: u64, letter: u64) -> CylNode {
    CylNode {
        map: node.map.compose(m),
        code: node.code.wrapping_mul(n).wrapping_add(letter),
        len: node.len + 1,
    }
}

impl BallTree for IfsTree {
    type Node = CylNode;

    fn roots(&self) -> &[CylNode] {
        &self.roots
    }

    #[inline]
    fn ball(&self, n: &CylNode) -> (Vec2, f64) {
        (n.map.apply(self.center), n.map.ratio * self.radius)
    }

    #[inline]
    fn witness(&self, n: &CylNode) -> Vec2 {
        n.map.apply(self.seeds[0])
    }

    #[inline]
    fn is_leaf(&self, n: &CylNode) -> bool {
        n.map.ratio * self.diam <= self.target_error
    }

    fn children(&self, n: &CylNode, out: &mut Vec<CylNode>) {
        let k = self.maps.len() as u64;
        for (i, m) in self.maps.iter().enumerate() {
            out.push(child_node(n, m, k, i as u64));
        }
    }

    fn leaf_points(&self, n: &CylNode, out: &mut Vec<Vec2>) {
        out.extend(self.seeds.iter().map(|&s| n.map.apply(s)));
    }

    fn source_error(&self) -> f64 {
        self.target_error
    }
}

const KD_BUCKET: usize = 8;
const NO_CHILD: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct KdNode {
    lo: u32,
    hi: u32,
    left: u32,
    right: u32,
    center: Vec2,
    radius: f64,
}

/// Static 2-d tree over an explicit point cloud.
pub struct CloudTree {
    pts: Vec<Vec2>,
    nodes: Vec<KdNode>,
    roots: Vec<u32>,
    error: f64,
}

impl CloudTree {
    pub fn new(cloud: &PointCloud) -> Self {
        assert!(!cloud.points.is_empty(), "cloud must be nonempty");
        let mut t = CloudTree {
            pts: cloud.points.clone(),
            nodes: Vec::new(),
            roots: vec![0],
            error: cloud.hausdorff_error,
        };
        let n = t.pts.len();
        t.build(0, n);
        t
    }

    fn build(&mut self, lo: usize, hi: usize) -> u32 {
        let rect = bounding_rect(&self.pts[lo..hi]).expect("nonempty range");
        let idx = self.nodes.len() as u32;
        self.nodes.push(KdNode {
            lo: lo as u32,
            hi: hi as u32,
            left: NO_CHILD,
            right: NO_CHILD,
            center: rect.center(),
            radius: 0.5 * rect.width().hypot(rect.height()),
        });
        if hi - lo > KD_BUCKET {
            let mid = (lo + hi) / 2;
            let by_x = rect.width() >= rect.height();
            self.pts[lo..hi].select_nth_unstable_by(mid - lo, |a, b| {
                if by_x {
                    a.x.total_cmp(&b.x)
                } else {
                    a.y.total_cmp(&b.y)
                }
            });
            let l = self.build(lo, mid);
            let r = self.build(mid, hi);
            self.nodes[idx as usize].left = l;
            self.nodes[idx as usize].right = r;
        }
        idx
    }

    pub fn points(&self) -> &[Vec2] {
        &self.pts
    }
}

impl BallTree for CloudTree {
    type Node = u32;

    fn roots(&self) -> &[u32] {
        &self.roots
    }

    fn ball(&self, n: &u32) -> (Vec2, f64) {
        let k = &self.nodes[*n as usize];
        (k.center, k.radius)
    }

    fn witness(&self, n: &u32) -> Vec2 {
        self.pts[self.nodes[*n as usize].lo as usize]
    }

    fn is_leaf(&self, n: &u32) -> bool {
        self.nodes[*n as usize].left == NO_CHILD
    }

    fn children(&self, n: &u32, out: &mut Vec<u32>) {
        let k = &self.nodes[*n as usize];
        if k.left != NO_CHILD {
            out.push(k.left);
            out.push(k.right);
        }
    }

    fn leaf_points(&self, n: &u32, out: &mut Vec<Vec2>) {
        let k = &self.nodes[*n as usize];
        out.extend_from_slice(&self.pts[k.lo as usize..k.hi as usize]);
    }

    fn source_error(&self) -> f64 {
        self.error
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Key {
    // Reversed so that BinaryHeap pops the smallest bound first.
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

#[inline]
fn lower_bound<T: BallTree>(t: &T, n: &T::Node, p: Vec2) -> f64 {
    let (c, r) = t.ball(n);
    (p.dist(c) - r).max(0.0)
}

/// Exact distance from `p` to the leaf point set below `nodes`, never above `upper`.
pub fn nearest_from<T: BallTree>(t: &T, nodes: &[T::Node], p: Vec2, upper: f64) -> f64 {
    let mut best = upper;
    let mut arena: Vec<T::Node> = Vec::with_capacity(64);
    let mut heap = BinaryHeap::with_capacity(64);
    let mut kids = Vec::with_capacity(8);
    let mut pts = Vec::with_capacity(8);
    for n in nodes {
        best = best.min(p.dist(t.witness(n)));
        heap.push(Key(lower_bound(t, n, p), arena.len()));
        arena.push(n.clone());
    }
    while let Some(Key(lb, i)) = heap.pop() {
        if lb >= best {
            break;
        }
        let n = arena[i].clone();
        if t.is_leaf(&n) {
            pts.clear();
            t.leaf_points(&n, &mut pts);
            for q in &pts {
                best = best.min(p.dist(*q));
            }
            continue;
        }
        kids.clear();
        t.children(&n, &mut kids);
        for c in kids.drain(..) {
            best = best.min(p.dist(t.witness(&c)));
            let lb = lower_bound(t, &c, p);
            if lb < best {
                heap.push(Key(lb, arena.len()));
                arena.push(c);
            }
        }
    }
    best
}

pub fn nearest_distance<T: BallTree>(t: &T, p: Vec2) -> f64 {
    nearest_from(t, t.roots(), p, f64::INFINITY)
}

/// True iff the leaf point set below `nodes` has a point within `r` of `p`.
pub fn within<T: BallTree>(t: &T, nodes: &[T::Node], p: Vec2, r: f64) -> bool {
    let mut stack: Vec<T::Node> = nodes.to_vec();
    let mut pts = Vec::new();
    while let Some(n) = stack.pop() {
        if p.dist(t.witness(&n)) <= r {
            return true;
        }
        if lower_bound(t, &n, p) > r {
            continue;
        }
        if t.is_leaf(&n) {
            pts.clear();
            t.leaf_points(&n, &mut pts);
            if pts.iter().any(|q| p.dist(*q) <= r) {
                return true;
            }
        } else {
            t.children(&n, &mut stack);
        }
    }
    false
}

/// Certified one-sided proximity test between the sets below `a` and `b`:
/// returns true whenever the modelled sets come within `thr` of each other
/// (it may also return true when they are up to `thr + 2 * source_error` apart).
pub fn may_be_within<T: BallTree>(t: &T, a: &[T::Node], b: &[T::Node], thr: f64) -> bool {
    let slack = thr + 2.0 * t.source_error();
    let mut stack: Vec<(T::Node, T::Node)> = Vec::new();
    for x in a {
        for y in b {
            stack.push((x.clone(), y.clone()));
        }
    }
    let (mut pa, mut pb) = (Vec::new(), Vec::new());
    while let Some((x, y)) = stack.pop() {
        let (cx, rx) = t.ball(&x);
        let (cy, ry) = t.ball(&y);
        if t.witness(&x).dist(t.witness(&y)) <= thr {
            return true;
        }
        if cx.dist(cy) - rx - ry > slack {
            continue;
        }
        let (lx, ly) = (t.is_leaf(&x), t.is_leaf(&y));
        if lx && ly {
            pa.clear();
            pb.clear();
            t.leaf_points(&x, &mut pa);
            t.leaf_points(&y, &mut pb);
            if pa.iter().any(|p| pb.iter().any(|q| p.dist(*q) <= slack)) {
                return true;
            }
            continue;
        }
        let mut kids = Vec::new();
        if !lx && (ly || rx >= ry) {
            t.children(&x, &mut kids);
            stack.extend(kids.into_iter().map(|k| (k, y.clone())));
        } else {
            t.children(&y, &mut kids);
            stack.extend(kids.into_iter().map(|k| (x.clone(), k)));
        }
    }
    false
}

/// Rectangles covering `(A)_eps ∩ (B)_eps` for the sets below `a` and `b`.
/// Pairs are refined until both disks have radius at most `max_radius`.
pub fn pair_cover<T: BallTree>(
    t: &T,
    a: &[T::Node],
    b: &[T::Node],
    eps: f64,
    max_radius: f64,
    limit: usize,
) -> Option<Vec<Rect>> {
    let mut out = Vec::new();
    let mut stack: Vec<(T::Node, T::Node)> = Vec::new();
    for x in a {
        for y in b {
            stack.push((x.clone(), y.clone()));
        }
    }
    let e = eps + t.source_error();
    while let Some((x, y)) = stack.pop() {
        let (cx, rx) = t.ball(&x);
        let (cy, ry) = t.ball(&y);
        if cx.dist(cy) - rx - ry > 2.0 * e {
            continue;
        }
        let (lx, ly) = (t.is_leaf(&x), t.is_leaf(&y));
        let split_x = !lx && rx > max_radius && (rx >= ry || ly || ry <= max_radius);
        let split_y = !ly && ry > max_radius && !split_x;
        if split_x {
            let mut kids = Vec::new();
            t.children(&x, &mut kids);
            stack.extend(kids.into_iter().map(|k| (k, y.clone())));
        } else if split_y {
            let mut kids = Vec::new();
            t.children(&y, &mut kids);
            stack.extend(kids.into_iter().map(|k| (x.clone(), k)));
        } else {
            let bx = Rect::around(cx, rx + e);
            let by = Rect::around(cy, ry + e);
            if let Some(r) = bx.intersect(&by) {
                out.push(r);
                if out.len() > limit {
                    return None;
                }
            }
        }
    }
    Some(out)
}

/// Minimum distance from the leaf point set below `nodes` to the boundary of
/// `poly` (up to `tol` from above), and whether every leaf point lies inside it.
pub fn distance_to_polygon_boundary<T: BallTree>(
    t: &T,
    nodes: &[T::Node],
    poly: &Polygon,
    tol: f64,
) -> (f64, bool) {
    let mut best = f64::INFINITY;
    let mut inside = true;
    let mut stack: Vec<T::Node> = nodes.to_vec();
    let mut pts = Vec::new();
    while let Some(n) = stack.pop() {
        let w = t.witness(&n);
        inside &= poly.contains(w);
        best = best.min(poly.boundary_distance(w));
        let (c, r) = t.ball(&n);
        let d = poly.boundary_distance(c);
        // A disk not meeting the boundary lies on one side of it.
        if d > r && (!poly.contains(c) || d - r >= best - tol) {
            inside &= poly.contains(c);
            continue;
        }
        if t.is_leaf(&n) {
            pts.clear();
            t.leaf_points(&n, &mut pts);
            for q in &pts {
                inside &= poly.contains(*q);
                best = best.min(poly.boundary_distance(*q));
            }
        } else {
            t.children(&n, &mut stack);
        }
    }
    (best, inside)
}

/// True iff some leaf point below `nodes` is within `thr` of the boundary of `poly`.
pub fn polygon_boundary_within<T: BallTree>(
    t: &T,
    nodes: &[T::Node],
    poly: &Polygon,
    thr: f64,
) -> bool {
    let mut stack: Vec<T::Node> = nodes.to_vec();
    let mut pts = Vec::new();
    while let Some(n) = stack.pop() {
        if poly.boundary_distance(t.witness(&n)) <= thr {
            return true;
        }
        let (c, r) = t.ball(&n);
        if poly.boundary_distance(c) - r > thr {
            continue;
        }
        if t.is_leaf(&n) {
            pts.clear();
            t.leaf_points(&n, &mut pts);
            if pts.iter().any(|q| poly.boundary_distance(*q) <= thr) {
                return true;
            }
        } else {
            t.children(&n, &mut stack);
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::presets;
    use rand::{Rng, SeedableRng};

    fn brute(points: &[Vec2], p: Vec2) -> f64 {
        points
            .iter()
            .map(|q| q.dist(p))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn cloud_tree_matches_brute_force() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let pts: Vec<Vec2> = (0..2000).map(|_| Vec2::new(rng.gen(), rng.gen())).collect();
        let t = CloudTree::new(&PointCloud {
            points: pts.clone(),
            hausdorff_error: 0.0,
        });
        for _ in 0..200 {
            let p = Vec2::new(rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
            assert_eq!(nearest_distance(&t, p), brute(&pts, p));
        }
    }

    #[test]
    fn ifs_tree_matches_cloud() {
        let k = presets::koch();
        let target = 2e-3;
        let tree = IfsTree::new(&k, target);
        // Leaves of the tree are exactly the images of the seeds at leaf depth.
        let mut leaves = Vec::new();
        let mut stack = tree.roots().to_vec();
        while let Some(n) = stack.pop() {
            if tree.is_leaf(&n) {
                tree.leaf_points(&n, &mut leaves);
            } else {
                tree.children(&n, &mut stack);
            }
        }
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let p = Vec2::new(rng.gen_range(-0.2..1.2), rng.gen_range(-0.2..0.6));
            let d = nearest_distance(&tree, p);
            assert_eq!(d, brute(&leaves, p));
            assert_eq!(within(&tree, tree.roots(), p, d + 1e-12), true);
            assert_eq!(within(&tree, tree.roots(), p, d * 0.999 - 1e-12), false);
        }
    }

    #[test]
    fn words_decode() {
        let u = presets::uset();
        let tree = IfsTree::new(&u, 0.01);
        let w = Word(vec![3, 7, 1, 4]);
        let node = tree.root_node(&w);
        assert_eq!(tree.word_of(&node), w);
        let s = u.compose(&w);
        let z = Vec2::new(0.3, 0.8);
        assert!(s.apply(z).dist(node.map.apply(z)) < 1e-14);
    }

    #[test]
    fn koch_first_level_pieces_touch() {
        let k = presets::koch();
        let tree = IfsTree::new(&k, 1e-3);
        let a = [tree.root_node(&Word(vec![1]))];
        let b = [tree.root_node(&Word(vec![2]))];
        assert!(may_be_within(&tree, &a, &b, 1e-9));
        let c = presets::cantor_square(1.0 / 3.0).unwrap();
        let tc = IfsTree::new(&c, 1e-3);
        let a = [tc.root_node(&Word(vec![1]))];
        let b = [tc.root_node(&Word(vec![2]))];
        assert!(!may_be_within(&tc, &a, &b, 0.3));
        assert!(may_be_within(&tc, &a, &b, 0.34));
    }

    #[test]
    fn cover_contains_intersection_points() {
        let c = presets::cantor_square(1.0 / 3.0).unwrap();
        let t = IfsTree::new(&c, 2e-3);
        let a = [t.root_node(&Word(vec![1]))];
        let b = [t.root_node(&Word(vec![2]))];
        let eps = 0.18;
        let boxes = pair_cover(&t, &a, &b, eps, eps, 1 << 20).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..3000 {
            let p = Vec2::new(rng.gen_range(0.0..1.0), rng.gen_range(-0.2..0.6));
            if nearest_from(&t, &a, p, f64::INFINITY) <= eps
                && nearest_from(&t, &b, p, f64::INFINITY) <= eps
            {
                assert!(boxes.iter().any(|r| r.dist_to(p) == 0.0));
            }
        }
    }
}
