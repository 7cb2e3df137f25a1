use crate::error::{Error, Result};
use crate::geom::{bounding_rect, convex_hull, Polygon, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

pub const DEFAULT_POINT_BUDGET: usize = 10_000_000;

/// A contracting similarity `x -> ratio * Rot(rotation) * (reflect ? conj(x) : x) + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Similarity {
    pub ratio: f64,
    pub rotation: f64,
    pub reflect: bool,
    pub translation: Vec2,
}

impl Similarity {
    pub fn new(ratio: f64, rotation: f64, reflect: bool, translation: Vec2) -> Self {
        Similarity {
            ratio,
            rotation,
            reflect,
            translation,
        }
    }

    pub fn identity() -> Self {
        Similarity::new(1.0, 0.0, false, Vec2::ZERO)
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        let q = if self.reflect {
            Vec2::new(p.x, -p.y)
        } else {
            p
        };
        q.rotate(self.rotation) * self.ratio + self.translation
    }

    /// `self ∘ other`.
    pub fn then_apply(&self, other: &Similarity) -> Similarity {
        let rotation = if self.reflect {
            self.rotation - other.rotation
        } else {
            self.rotation + other.rotation
        };
        Similarity {
            ratio: self.ratio * other.ratio,
            rotation,
            reflect: self.reflect != other.reflect,
            translation: self.apply(other.translation),
        }
    }

    pub fn inverse(&self) -> Similarity {
        let mut inv = Similarity {
            ratio: 1.0 / self.ratio,
            rotation: if self.reflect {
                self.rotation
            } else {
                -self.rotation
            },
            reflect: self.reflect,
            translation: Vec2::ZERO,
        };
        inv.translation = -inv.apply(self.translation);
        inv
    }

    pub fn fixed_point(&self) -> Vec2 {
        self.affine().fixed_point()
    }

    pub fn affine(&self) -> Affine {
        let (s, c) = self.rotation.sin_cos();
        Affine {
            a: Vec2::new(self.ratio * c, self.ratio * s),
            reflect: self.reflect,
            t: self.translation,
            ratio: self.ratio,
        }
    }
}

/// Complex-coefficient form of a similarity, used on hot paths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine {
    pub a: Vec2,
    pub reflect: bool,
    pub t: Vec2,
    pub ratio: f64,
}

impl Affine {
    pub fn identity() -> Self {
        Affine {
            a: Vec2::new(1.0, 0.0),
            reflect: false,
            t: Vec2::ZERO,
            ratio: 1.0,
        }
    }

    #[inline]
    fn linear(&self, p: Vec2) -> Vec2 {
        let y = if self.reflect { -p.y } else { p.y };
        Vec2::new(self.a.x * p.x - self.a.y * y, self.a.y * p.x + self.a.x * y)
    }

    #[inline]
    pub fn apply(&self, p: Vec2) -> Vec2 {
        self.linear(p) + self.t
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Affine) -> Affine {
        let b = if self.reflect {
            Vec2::new(other.a.x, -other.a.y)
        } else {
            other.a
        };
        Affine {
            a: Vec2::new(
                self.a.x * b.x - self.a.y * b.y,
                self.a.x * b.y + self.a.y * b.x,
            ),
            reflect: self.reflect != other.reflect,
            t: self.apply(other.t),
            ratio: self.ratio * other.ratio,
        }
    }

    pub fn fixed_point(&self) -> Vec2 {
        // Solve (I - M) z = t for the real 2x2 matrix M of the linear part.
        let (m00, m01, m10, m11) = if self.reflect {
            (self.a.x, self.a.y, self.a.y, -self.a.x)
        } else {
            (self.a.x, -self.a.y, self.a.y, self.a.x)
        };
        let (a, b, c, d) = (1.0 - m00, -m01, -m10, 1.0 - m11);
        let det = a * d - b * c;
        Vec2::new(
            (d * self.t.x - b * self.t.y) / det,
            (a * self.t.y - c * self.t.x) / det,
        )
    }
}

/// Finite word over `{1..N}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<u16>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }

    pub fn child(&self, letter: u16) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl From<&[u16]> for Word {
    fn from(v: &[u16]) -> Self {
        Word(v.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug)]
pub struct PointCloud {
    pub points: Vec<Vec2>,
    pub hausdorff_error: f64,
}

#[derive(Clone, Debug)]
pub struct Ifs {
    pub name: String,
    pub maps: Vec<Similarity>,
    pub open_set: Polygon,
    pub big_r: f64,
    /// A word u with S_u F inside the open set, if the preset knows one.
    pub sosc_word: Option<Word>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Lattice {
    Arithmetic {
        h: f64,
        tolerance: f64,
        max_denominator: u64,
    },
    NonArithmetic {
        tolerance: f64,
        max_denominator: u64,
    },
}

impl Lattice {
    pub fn is_arithmetic(&self) -> bool {
        matches!(self, Lattice::Arithmetic { .. })
    }
}

const RATIONAL_TOL: f64 = 1e-12;
const MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Serialize, Deserialize)]
struct MapJson {
    ratio: f64,
    rotation_deg: f64,
    reflect: bool,
    translation: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct IfsJson {
    name: String,
    #[serde(rename = "R")]
    big_r: f64,
    open_set: Vec<[f64; 2]>,
    maps: Vec<MapJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u: Option<Vec<u16>>,
}

impl Ifs {
    pub fn new(name: &str, maps: Vec<Similarity>, open_set: Vec<Vec2>, big_r: f64) -> Result<Self> {
        let ifs = Ifs {
            name: name.to_string(),
            maps,
            open_set: Polygon::new(open_set),
            big_r,
            sosc_word: None,
        };
        ifs.validate()?;
        Ok(ifs)
    }

    pub fn with_sosc_word(mut self, u: Word) -> Result<Self> {
        self.check_word(&u)?;
        self.sosc_word = Some(u);
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.maps.len() < 2 {
            return Err(Error::Config("an IFS needs at least two maps".into()));
        }
        for (i, m) in self.maps.iter().enumerate() {
            if !(m.ratio > 0.0 && m.ratio < 1.0) {
                return Err(Error::Config(format!(
                    "map {} has ratio {} outside (0,1)",
                    i + 1,
                    m.ratio
                )));
            }
        }
        if !self.open_set.is_simple() {
            return Err(Error::Config(
                "open_set must be a simple polygon with positive area".into(),
            ));
        }
        let diam = self.diameter_bound();
        if !(self.big_r > 2f64.sqrt() * diam) {
            return Err(Error::Config(format!(
                "R = {} must exceed sqrt(2) * diam F (diam bound {diam})",
                self.big_r
            )));
        }
        Ok(())
    }

    /// The IFS of `t(F)`: maps `t ∘ S_i ∘ t^{-1}`, open set `t(O)`, `R` scaled by the ratio of `t`.
    pub fn conjugated(&self, t: &Similarity) -> Result<Ifs> {
        let inv = t.inverse();
        let maps = self
            .maps
            .iter()
            .map(|m| t.then_apply(&m.then_apply(&inv)))
            .collect();
        let mut open: Vec<Vec2> = self.open_set.vertices.iter().map(|&v| t.apply(v)).collect();
        if t.reflect {
            open.reverse();
        }
        let mut out = Ifs::new(&self.name, maps, open, self.big_r * t.ratio)?;
        out.sosc_word = self.sosc_word.clone();
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.maps.len()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio).collect()
    }

    pub fn r_min(&self) -> f64 {
        self.ratios().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn r_max(&self) -> f64 {
        self.ratios().into_iter().fold(0.0, f64::max)
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        match w.0.iter().find(|&&l| l == 0 || l as usize > self.n()) {
            Some(l) => Err(Error::Domain(format!(
                "letter {l} out of range 1..{}",
                self.n()
            ))),
            None => Ok(()),
        }
    }

    pub fn compose(&self, w: &Word) -> Similarity {
        w.0.iter().fold(Similarity::identity(), |acc, &l| {
            acc.then_apply(&self.maps[l as usize - 1])
        })
    }

    pub fn word_ratio(&self, w: &Word) -> f64 {
        w.0.iter()
            .map(|&l| self.maps[l as usize - 1].ratio)
            .product()
    }

    pub fn affines(&self) -> Vec<Affine> {
        self.maps.iter().map(Similarity::affine).collect()
    }

    pub fn similarity_dimension(&self) -> f64 {
        similarity_dimension(&self.ratios())
    }

    /// eta = -sum r_i^D ln r_i.
    pub fn eta(&self) -> f64 {
        let d = self.similarity_dimension();
        -self
            .ratios()
            .iter()
            .map(|r| r.powf(d) * r.ln())
            .sum::<f64>()
    }

    pub fn lattice(&self) -> Lattice {
        classify_lattice(&self.ratios())
    }

    /// Seeds used for clouds: extreme points of the set of fixed points, all in F.
    pub fn seeds(&self) -> Vec<Vec2> {
        let fixed: Vec<Vec2> = self.maps.iter().map(Similarity::fixed_point).collect();
        let hull = convex_hull(&fixed);
        if hull.is_empty() {
            vec![fixed[0]]
        } else {
            hull
        }
    }

    /// Center and radius of a disk certified to contain F.
    pub fn bounding_disk(&self) -> (Vec2, f64) {
        let aff = self.affines();
        let fixed: Vec<Vec2> = aff.iter().map(Affine::fixed_point).collect();
        let c0 = fixed.iter().fold(Vec2::ZERO, |a, &p| a + p) * (1.0 / fixed.len() as f64);
        // Invariant disk: |S_i c - c| + r_i rho <= rho.
        let rho0 = aff
            .iter()
            .map(|m| m.apply(c0).dist(c0) / (1.0 - m.ratio))
            .fold(0.0, f64::max);
        // Tighten with a shallow cloud of images of c0.
        let mut pts = vec![(Affine::identity(), c0)];
        while pts.len() * aff.len() <= 20_000 && pts[0].0.ratio > 1e-3 {
            let mut next = Vec::with_capacity(pts.len() * aff.len());
            for (m, _) in &pts {
                for a in &aff {
                    let c = m.compose(a);
                    next.push((c, c.apply(c0)));
                }
            }
            pts = next;
        }
        let cloud: Vec<Vec2> = pts.iter().map(|p| p.1).collect();
        let rect = bounding_rect(&cloud).expect("cloud nonempty");
        let c = rect.center();
        let rho = pts
            .iter()
            .map(|(m, p)| p.dist(c) + m.ratio * rho0)
            .fold(0.0, f64::max);
        if rho < rho0 {
            (c, rho)
        } else {
            (c0, rho0)
        }
    }

    /// Upper bound for diam F.
    pub fn diameter_bound(&self) -> f64 {
        let (_, rho) = self.bounding_disk();
        let cloud = self.attractor_cloud_depth(self.depth_for(rho * 0.02), &self.seeds());
        let hull = convex_hull(&cloud.points);
        let pts = if hull.len() >= 2 {
            hull
        } else {
            cloud.points.clone()
        };
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                d = d.max(pts[i].dist(pts[j]));
            }
        }
        (d + 2.0 * cloud.hausdorff_error).min(2.0 * rho)
    }

    fn depth_for(&self, target: f64) -> usize {
        let (_, rho) = self.bounding_disk();
        let rmax = self.r_max();
        let mut n = 0;
        let mut size = 2.0 * rho;
        while size > target {
            size *= rmax;
            n += 1;
        }
        n
    }

    fn attractor_cloud_depth(&self, n: usize, seeds: &[Vec2]) -> PointCloud {
        let (_, rho) = self.bounding_disk();
        let aff = self.affines();
        let mut maps = vec![Affine::identity()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(maps.len() * aff.len());
            for m in &maps {
                for a in &aff {
                    next.push(m.compose(a));
                }
            }
            maps = next;
        }
        let err = maps.iter().map(|m| m.ratio).fold(0.0, f64::max) * 2.0 * rho;
        let points = maps
            .iter()
            .flat_map(|m| seeds.iter().map(move |&s| m.apply(s)))
            .collect();
        PointCloud {
            points,
            hausdorff_error: err,
        }
    }

    /// Deterministic cloud: images of the seeds under all words of the minimal depth
    /// whose cylinders have diameter at most `target_error`.
    pub fn attractor_cloud(&self, target_error: f64) -> Result<PointCloud> {
        self.attractor_cloud_with_budget(target_error, &self.seeds(), DEFAULT_POINT_BUDGET)
    }

    pub fn attractor_cloud_with_budget(
        &self,
        target_error: f64,
        seeds: &[Vec2],
        budget: usize,
    ) -> Result<PointCloud> {
        if !(target_error > 0.0) {
            return Err(Error::Domain("target_error must be positive".into()));
        }
        let n = self.depth_for(target_error);
        let count = (self.n() as f64).powi(n as i32) * seeds.len() as f64;
        if count > budget as f64 {
            return Err(Error::Resource(format!(
                "cloud of depth {n} needs {count:.3e} points, budget {budget}"
            )));
        }
        Ok(self.attractor_cloud_depth(n, seeds))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: IfsJson = serde_json::from_str(s)?;
        let maps = j
            .maps
            .iter()
            .map(|m| {
                Similarity::new(
                    m.ratio,
                    m.rotation_deg.to_radians(),
                    m.reflect,
                    Vec2::new(m.translation[0], m.translation[1]),
                )
            })
            .collect();
        let poly = j.open_set.iter().map(|p| Vec2::new(p[0], p[1])).collect();
        let ifs = Ifs::new(&j.name, maps, poly, j.big_r)?;
        match j.u {
            Some(u) => ifs.with_sosc_word(Word(u)),
            None => Ok(ifs),
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Ifs::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let j = IfsJson {
            name: self.name.clone(),
            big_r: self.big_r,
            open_set: self.open_set.vertices.iter().map(|p| [p.x, p.y]).collect(),
            maps: self
                .maps
                .iter()
                .map(|m| MapJson {
                    ratio: m.ratio,
                    rotation_deg: m.rotation.to_degrees(),
                    reflect: m.reflect,
                    translation: [m.translation.x, m.translation.y],
                })
                .collect(),
            u: self.sosc_word.as_ref().map(|w| w.0.clone()),
        };
        serde_json::to_string_pretty(&j).expect("serializable")
    }
}

pub fn similarity_dimension(ratios: &[f64]) -> f64 {
    let f = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let df = |s: f64| ratios.iter().map(|r| r.powf(s) * r.ln()).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..8 {
        let step = f(s) / df(s);
        s -= step;
        if step.abs() < 1e-17 {
            break;
        }
    }
    s
}

/// Continued-fraction convergent p/q of x with q <= qmax, if within `tol`.
fn rational_approx(x: f64, qmax: u64, tol: f64) -> Option<(i64, u64)> {
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > qmax as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        // A convergent is only accepted when it is far better than the generic
        // 1/q^2 quality of continued fractions, so chance approximations fail.
        let q = k1 as f64;
        if (x - h1 as f64 / q).abs() < tol.min(1e-3 / (q * q)) {
            return Some((h1 as i64, k1 as u64));
        }
        let frac = v - a;
        if frac.abs() < 1e-300 {
            break;
        }
        v = 1.0 / frac;
    }
    None
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn classify_lattice(ratios: &[f64]) -> Lattice {
    let l0 = -ratios[0].ln();
    let mut fracs = Vec::with_capacity(ratios.len());
    for r in ratios {
        match rational_approx(-r.ln() / l0, MAX_DENOMINATOR, RATIONAL_TOL) {
            Some((p, q)) if p > 0 => fracs.push((p as u128, q as u128)),
            _ => {
                return Lattice::NonArithmetic {
                    tolerance: RATIONAL_TOL,
                    max_denominator: MAX_DENOMINATOR,
                }
            }
        }
    }
    let lcm = fracs.iter().fold(1u128, |l, &(_, q)| l / gcd(l, q) * q);
    let g = fracs.iter().fold(0u128, |g, &(p, q)| gcd(g, p * (lcm / q)));
    Lattice::Arithmetic {
        h: l0 * g as f64 / lcm as f64,
        tolerance: RATIONAL_TOL,
        max_denominator: MAX_DENOMINATOR,
    }
}

pub mod presets {
    use super::*;

    pub const NAMES: [&str; 4] = ["koch", "uset", "cantor-square", "square"];

    pub fn unit_square() -> Vec<Vec2> {
        vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ]
    }

    /// Junction point c = 1/2 + i sqrt(3)/6 of the Koch curve.
    pub fn koch_junction() -> Vec2 {
        Vec2::new(0.5, 3f64.sqrt() / 6.0)
    }

    pub fn koch() -> Ifs {
        let r = 1.0 / 3f64.sqrt();
        let c = koch_junction();
        let maps = vec![
            Similarity::new(r, PI / 6.0, true, Vec2::ZERO),
            Similarity::new(r, -PI / 6.0, true, c),
        ];
        let tri = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), c];
        Ifs::new("koch", maps, tri, 3.0)
            .and_then(|i| i.with_sosc_word(Word(vec![1, 2, 1, 2, 1, 1, 1, 1])))
            .expect("koch preset is valid")
    }

    /// Seven maps of ratio 1/3 on the cells of a U in the 3x3 grid, numbered
    /// top-left, middle-left, bottom-left, bottom-middle (rotated), bottom-right,
    /// middle-right, top-right.
    pub fn uset() -> Ifs {
        let t = 1.0 / 3.0;
        let cell = |x: f64, y: f64| Similarity::new(t, 0.0, false, Vec2::new(x, y));
        let maps = vec![
            cell(0.0, 2.0 * t),
            cell(0.0, t),
            cell(0.0, 0.0),
            Similarity::new(t, -PI / 2.0, false, Vec2::new(t, t)),
            cell(2.0 * t, 0.0),
            cell(2.0 * t, t),
            cell(2.0 * t, 2.0 * t),
        ];
        Ifs::new("uset", maps, unit_square(), 3.0)
            .and_then(|i| i.with_sosc_word(Word(vec![2, 6])))
            .expect("uset preset is valid")
    }

    /// Four corner squares of side p, numbered bottom-left, bottom-right, top-left, top-right.
    pub fn cantor_square(p: f64) -> Result<Ifs> {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::Config(format!(
                "cantor-square needs p in (0,1/2), got {p}"
            )));
        }
        let q = 1.0 - p;
        let maps = [(0.0, 0.0), (q, 0.0), (0.0, q), (q, q)]
            .iter()
            .map(|&(x, y)| Similarity::new(p, 0.0, false, Vec2::new(x, y)))
            .collect();
        Ifs::new(&format!("cantor-square(p={p})"), maps, unit_square(), 3.0)?
            .with_sosc_word(Word(vec![1, 4]))
    }

    /// The unit square as the attractor of four maps of ratio 1/2.
    pub fn square() -> Ifs {
        let maps = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)]
            .iter()
            .map(|&(x, y)| Similarity::new(0.5, 0.0, false, Vec2::new(x, y)))
            .collect();
        Ifs::new("square", maps, unit_square(), 3.0).expect("square preset is valid")
    }

    pub fn by_name(name: &str, p: Option<f64>) -> Result<Ifs> {
        match name {
            "koch" => Ok(koch()),
            "uset" => Ok(uset()),
            "cantor-square" => cantor_square(p.unwrap_or(1.0 / 3.0)),
            "square" => Ok(square()),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (known: {})",
                NAMES.join(", ")
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        a.dist(b) <= tol
    }

    #[test]
    fn koch_maps_match_complex_form() {
        let k = koch();
        let s3 = 3f64.sqrt();
        assert!(close(
            k.maps[0].apply(Vec2::new(1.0, 0.0)),
            Vec2::new(0.5, s3 / 6.0),
            1e-15
        ));
        assert!(close(
            k.maps[1].apply(Vec2::new(1.0, 0.0)),
            Vec2::new(1.0, 0.0),
            1e-15
        ));
        // S_1(z) = c conj(z) at a generic point.
        let z = Vec2::new(0.3, 0.7);
        let c = koch_junction();
        let expect = Vec2::new(c.x * z.x + c.y * z.y, c.y * z.x - c.x * z.y);
        assert!(close(k.maps[0].apply(z), expect, 1e-15));
    }

    #[test]
    fn cantor_corner_map() {
        let p = 0.25;
        let f = cantor_square(p).unwrap();
        assert!(close(
            f.maps[0].apply(Vec2::new(1.0, 1.0)),
            Vec2::new(p, p),
            1e-15
        ));
    }

    #[test]
    fn uset_cells() {
        let u = uset();
        let centers = [(1, 5), (1, 3), (1, 1), (3, 1), (5, 1), (5, 3), (5, 5)];
        for (m, (cx, cy)) in u.maps.iter().zip(centers) {
            let img = m.apply(Vec2::new(0.5, 0.5));
            assert!(close(
                img,
                Vec2::new(cx as f64 / 6.0, cy as f64 / 6.0),
                1e-15
            ));
        }
    }

    #[test]
    fn compose_identity_and_ratio() {
        let k = koch();
        let id = k.compose(&Word::empty());
        assert_eq!(id.ratio, 1.0);
        assert!(close(
            id.apply(Vec2::new(0.2, 0.9)),
            Vec2::new(0.2, 0.9),
            0.0
        ));
        let s12 = k.compose(&Word(vec![1, 2]));
        assert!((s12.ratio - 1.0 / 3.0).abs() < 1e-15);
        let u = uset();
        assert!((u.compose(&Word(vec![4, 2, 7])).ratio - 1.0 / 27.0).abs() < 1e-17);
    }

    #[test]
    fn affine_agrees_with_similarity() {
        let k = koch();
        let w = Word(vec![1, 2, 2, 1, 2]);
        let s = k.compose(&w);
        let a = k.affines();
        let mut m = Affine::identity();
        for &l in &w.0 {
            m = m.compose(&a[l as usize - 1]);
        }
        let z = Vec2::new(0.37, -0.2);
        assert!(close(s.apply(z), m.apply(z), 1e-14));
        assert!(close(s.fixed_point(), s.apply(s.fixed_point()), 1e-14));
    }

    #[test]
    fn dimensions() {
        assert!((koch().similarity_dimension() - 4f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!((uset().similarity_dimension() - 7f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!((similarity_dimension(&[0.5, 0.5, 0.5, 0.5]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eta_koch() {
        assert!((koch().eta() - 3f64.ln() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn lattice_classification() {
        match koch().lattice() {
            Lattice::Arithmetic { h, .. } => assert!((h - 3f64.ln() / 2.0).abs() < 1e-12),
            _ => panic!("koch is arithmetic"),
        }
        match classify_lattice(&[0.5, 0.25]) {
            Lattice::Arithmetic { h, .. } => assert!((h - 2f64.ln()).abs() < 1e-12),
            _ => panic!("{{1/2,1/4}} is arithmetic"),
        }
        match classify_lattice(&[0.25, 0.125]) {
            Lattice::Arithmetic { h, .. } => assert!((h - 2f64.ln()).abs() < 1e-12),
            _ => panic!("{{1/4,1/8}} is arithmetic"),
        }
        assert!(!classify_lattice(&[0.5, 1.0 / 3.0]).is_arithmetic());
    }

    #[test]
    fn clouds() {
        let k = koch();
        let cloud = k.attractor_cloud(1e-2).unwrap();
        assert!(cloud.hausdorff_error <= 1e-2);
        for end in [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)] {
            assert!(cloud.points.iter().any(|p| p.dist(end) < 1e-14));
        }
        let single = k
            .attractor_cloud_with_budget(0.1, &[Vec2::ZERO], DEFAULT_POINT_BUDGET)
            .unwrap();
        let n = k.depth_for(0.1);
        assert_eq!(single.points.len(), 1 << n);
        let err = k
            .attractor_cloud_with_budget(1e-9, &[Vec2::ZERO], 1000)
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn json_roundtrip() {
        let u = uset();
        let back = Ifs::from_json_str(&u.to_json()).unwrap();
        assert_eq!(back.n(), 7);
        for (a, b) in u.maps.iter().zip(&back.maps) {
            assert!((a.rotation - b.rotation).abs() < 1e-12);
            assert!(close(a.translation, b.translation, 0.0));
        }
        assert_eq!(back.sosc_word, u.sosc_word);
        assert!(Ifs::from_json_str("{\"name\":\"x\"}").is_err());
    }

    #[test]
    fn rejects_small_r() {
        let maps = presets::square().maps;
        assert!(Ifs::new("bad", maps, unit_square(), 1.0).is_err());
    }

    #[test]
    fn conjugation_moves_fixed_points() {
        let f = koch();
        let t = Similarity::new(2.0, 0.7, true, Vec2::new(0.3, -1.0));
        let g = f.conjugated(&t).unwrap();
        for (a, b) in f.maps.iter().zip(&g.maps) {
            assert!(close(t.apply(a.fixed_point()), b.fixed_point(), 1e-12));
            assert!((a.ratio - b.ratio).abs() < 1e-15);
        }
        let p = Vec2::new(0.2, 0.9);
        assert!(close(t.inverse().apply(t.apply(p)), p, 1e-12));
        assert_eq!(g.big_r, 6.0);
    }
}
