//! SCBC and pairwise CBC scans over eps ladders, and a heuristic growth classifier.
//!
//! Localized variations are measured on the boundary of `F_eps` rastered around
//! the region of interest. A boundary vertex belongs to `(S_a F)_eps ∩ (S_b F)_eps`
//! when its exact distance to both cylinders is at most `eps + h`; the variation
//! counts every window that meets such a vertex.

use crate::curvature::{
    least_squares, parallel_set, parallel_set_on, raster_grid, ParallelSet, Policy,
};
use crate::error::{Error, Result};
use crate::fmt::{round12, sig12};
use crate::geom::{Rect, Vec2};
use crate::hierarchy::{pair_cover, within, BallTree, CylNode, IfsTree};
use crate::ifs::{Ifs, Word};
use crate::raster::measure::{clusters_where, labelled_c0, region_c0, Cluster};
use crate::raster::{parallel_mask, BinaryMask, DistanceField, Grid, C0};
use crate::words::preset_sosc;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Arc;

/// Membership slack of pair regions, in units of `h`.
pub const REGION_SLACK: f64 = 2.0;
pub const SLOPE_THRESHOLD: f64 = -0.15;
pub const R2_THRESHOLD: f64 = 0.7;
pub const MIN_POINTS: usize = 10;
pub const MIN_DECADES: f64 = 1.5;
const MAX_COVER_RECTS: usize = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionMode {
    Intersection,
    Union,
}

/// Cellwise AND/OR of the parallel masks of the cylinders `S_w F`, each from
/// its own distance field on `grid`.
pub fn region_from_cylinders(
    ifs: &Ifs,
    words: &[Word],
    eps: f64,
    mode: RegionMode,
    grid: Grid,
    care: Option<&[Rect]>,
    target_error: f64,
) -> Result<BinaryMask> {
    if words.is_empty() {
        return Err(Error::Domain(
            "region_from_cylinders needs at least one word".into(),
        ));
    }
    let base = IfsTree::new(ifs, target_error);
    let mut out: Option<BinaryMask> = None;
    for w in words {
        ifs.check_word(w)?;
        let tree = Arc::new(base.rerooted(std::slice::from_ref(w)));
        let field = DistanceField::build(tree, grid, Some((eps, eps)), care)?;
        let m = parallel_mask(&field, eps);
        out = Some(match (out, mode) {
            (None, _) => m,
            (Some(a), RegionMode::Intersection) => a.and(&m)?,
            (Some(a), RegionMode::Union) => a.or(&m)?,
        });
    }
    Ok(out.expect("words is nonempty"))
}

/// `eps_max * 10^{-k/ppd}` for `k = 0, 1, ...` down to `eps_min`, keeping values below `big_r`.
pub fn ladder(eps_min: f64, eps_max: f64, ppd: f64, big_r: f64) -> Result<Vec<f64>> {
    if !(eps_min > 0.0 && eps_min < eps_max && eps_max <= big_r) {
        return Err(Error::Config(format!(
            "ladder needs 0 < eps_min < eps_max <= R, got {eps_min}, {eps_max}, R = {big_r}"
        )));
    }
    if !(ppd > 0.0) {
        return Err(Error::Config(format!(
            "points per decade must be positive, got {ppd}"
        )));
    }
    let mut out = Vec::new();
    let mut k = 0.0;
    loop {
        let e = eps_max * 10f64.powf(-k / ppd);
        if e < eps_min * (1.0 - 1e-12) {
            break;
        }
        if e < big_r {
            out.push(e);
        }
        k += 1.0;
    }
    if out.is_empty() {
        return Err(Error::Config("empty eps ladder".into()));
    }
    Ok(out)
}

/// Points within `eps + 2h` of both `S_a F` and `S_b F`.
pub struct PairRegion {
    pub eps: f64,
    pub slack: f64,
    tree: Arc<IfsTree>,
    a: CylNode,
    b: CylNode,
}

impl PairRegion {
    pub fn new(ifs: &Ifs, a: &Word, b: &Word, eps: f64, policy: &Policy) -> Result<Self> {
        ifs.check_word(a)?;
        ifs.check_word(b)?;
        if a == b {
            return Err(Error::Domain(format!(
                "pair needs two different words, got {a} twice"
            )));
        }
        let tree = Arc::new(IfsTree::new(ifs, policy.target(eps)));
        let (a, b) = (tree.root_node(a), tree.root_node(b));
        Ok(PairRegion {
            eps,
            slack: REGION_SLACK * policy.h(eps),
            tree,
            a,
            b,
        })
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let r = self.eps + self.slack;
        within(self.tree.as_ref(), &[self.a], p, r) && within(self.tree.as_ref(), &[self.b], p, r)
    }

    /// Boxes covering the region, or `None` past `limit` boxes.
    pub fn cover(&self, max_radius: f64, limit: usize) -> Option<Vec<Rect>> {
        pair_cover(
            self.tree.as_ref(),
            &[self.a],
            &[self.b],
            self.eps + self.slack,
            max_radius,
            limit,
        )
    }
}

/// `F_eps` around a pair region with the localized curvature there.
pub struct PairSnapshot {
    pub eps: f64,
    pub h: f64,
    pub c0: C0,
    pub near_critical: bool,
    /// `None` when the region is empty.
    pub parallel: Option<ParallelSet>,
    pub cover: Vec<Rect>,
    pub region: PairRegion,
}

impl PairSnapshot {
    pub fn contains(&self, p: Vec2) -> bool {
        self.region.contains(p)
    }

    pub fn clusters(&self, min_window: f64, min_total: f64) -> Vec<Cluster> {
        match &self.parallel {
            Some(ps) => clusters_where(
                &ps.polys,
                |p| self.contains(p),
                4.0 * self.h,
                min_window,
                min_total,
            ),
            None => Vec::new(),
        }
    }

    /// Intersection mask of the two cylinders on the snapshot's care set.
    pub fn region_mask(&self, ifs: &Ifs, a: &Word, b: &Word) -> Result<Option<BinaryMask>> {
        let Some(ps) = &self.parallel else {
            return Ok(None);
        };
        let care: Vec<Rect> = self.cover.iter().map(|r| r.inflate(8.0 * self.h)).collect();
        region_from_cylinders(
            ifs,
            &[a.clone(), b.clone()],
            self.eps,
            RegionMode::Intersection,
            ps.field.grid,
            Some(&care),
            self.region.tree.target_error(),
        )
        .map(Some)
    }
}

pub fn pair_snapshot(
    ifs: &Ifs,
    a: &Word,
    b: &Word,
    eps: f64,
    policy: &Policy,
) -> Result<PairSnapshot> {
    let region = PairRegion::new(ifs, a, b, eps, policy)?;
    let h = policy.h(eps);
    let cover = region
        .cover((0.5 * eps).max(8.0 * h), MAX_COVER_RECTS)
        .ok_or_else(|| Error::Resource(format!("pair cover exceeds {MAX_COVER_RECTS} boxes")))?;
    let tree = region.tree.clone();
    let mut snap = PairSnapshot {
        eps,
        h,
        c0: C0::default(),
        near_critical: false,
        parallel: None,
        cover,
        region,
    };
    if snap.cover.is_empty() {
        return Ok(snap);
    }
    // Room for a full window around every region vertex before the care edge.
    let care: Vec<Rect> = snap.cover.iter().map(|r| r.inflate(8.0 * h)).collect();
    let grid = raster_grid(&tree, eps, h);
    let ps = parallel_set_on(tree, grid, eps, Some(&care))?;
    snap.c0 = region_c0(&ps.polys, 4.0 * h, |p| snap.contains(p));
    let (lo, hi) = ps.chi_pair();
    snap.near_critical = lo != hi;
    snap.parallel = Some(ps);
    Ok(snap)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScanKind {
    ScbcPair { i: u16, j: u16 },
    CbcPairwise { lambda: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub eps: f64,
    pub value: f64,
    pub near_critical: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Bounded { bound: f64 },
    Unbounded { exponent: f64, r2: f64 },
    InsufficientData { points: usize, decades: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSeries {
    pub kind: ScanKind,
    /// Sorted by eps, descending.
    pub points: Vec<ScanPoint>,
    pub verdict: Verdict,
    /// Scales skipped because the raster would exceed the resource budget.
    pub dropped: Vec<(f64, String)>,
    /// Largest scale of the pairwise part; larger scales hold total variations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairwise_below: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ScanSeries {
    fn new(
        kind: ScanKind,
        mut points: Vec<ScanPoint>,
        dropped: Vec<(f64, String)>,
        pairwise_below: Option<f64>,
    ) -> Self {
        points.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        let usable: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| !p.near_critical && pairwise_below.is_none_or(|e| p.eps < e))
            .map(|p| (p.eps, p.value))
            .collect();
        ScanSeries {
            kind,
            verdict: growth_classifier(&usable),
            points,
            dropped,
            pairwise_below,
            warnings: Vec::new(),
        }
    }

    pub fn max_value(&self) -> f64 {
        self.points.iter().map(|p| p.value).fold(0.0, f64::max)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["eps", "value", "near_critical"])?;
        for p in &self.points {
            w.write_record([sig12(p.eps), sig12(p.value), p.near_critical.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `{kind, verdict, exponent?, bound?, thresholds}`.
    pub fn verdict_json(&self) -> serde_json::Value {
        let kind = match self.kind {
            ScanKind::ScbcPair { i, j } => serde_json::json!({"type": "scbc_pair", "i": i, "j": j}),
            ScanKind::CbcPairwise { lambda } => {
                serde_json::json!({"type": "cbc_pairwise", "lambda": round12(lambda)})
            }
        };
        let mut v = serde_json::json!({
            "kind": kind,
            "label": "heuristic verdict",
            "thresholds": {
                "slope": SLOPE_THRESHOLD,
                "r2": R2_THRESHOLD,
                "min_points": MIN_POINTS,
                "min_decades": MIN_DECADES,
            },
        });
        let o = v.as_object_mut().expect("object");
        match self.verdict {
            Verdict::Bounded { bound } => {
                o.insert("verdict".into(), "bounded".into());
                o.insert("bound".into(), round12(bound).into());
            }
            Verdict::Unbounded { exponent, r2 } => {
                o.insert("verdict".into(), "unbounded".into());
                o.insert("exponent".into(), round12(exponent).into());
                o.insert("r2".into(), round12(r2).into());
            }
            Verdict::InsufficientData { points, decades } => {
                o.insert("verdict".into(), "insufficient_data".into());
                o.insert("points".into(), points.into());
                o.insert("decades".into(), round12(decades).into());
            }
        }
        if let Some(e) = self.pairwise_below {
            o.insert("pairwise_below".into(), round12(e).into());
        }
        if !self.warnings.is_empty() {
            o.insert("warnings".into(), self.warnings.clone().into());
        }
        v
    }
}

/// Bounded versus power-law growth of `(eps, value)` as `eps -> 0`.
pub fn growth_classifier(series: &[(f64, f64)]) -> Verdict {
    let n = series.len();
    let (lo, hi) = series.iter().fold((f64::INFINITY, 0.0f64), |(a, b), p| {
        (a.min(p.0), b.max(p.0))
    });
    let decades = if n > 0 { (hi / lo).log10() } else { 0.0 };
    if n < MIN_POINTS || decades < MIN_DECADES {
        return Verdict::InsufficientData { points: n, decades };
    }
    let max = series.iter().map(|p| p.1).fold(0.0, f64::max);
    let pos: Vec<(f64, f64)> = series
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    if pos.len() >= 3 {
        let (slope, _, r2) = least_squares(&pos);
        if slope <= SLOPE_THRESHOLD && r2 >= R2_THRESHOLD {
            return Verdict::Unbounded {
                exponent: -slope,
                r2,
            };
        }
    }
    Verdict::Bounded { bound: max }
}

pub fn scbc_scan(ifs: &Ifs, i: u16, j: u16, ladder: &[f64], policy: &Policy) -> Result<ScanSeries> {
    if i == j {
        return Err(Error::Domain(format!(
            "scbc pair needs i != j, got ({i},{j})"
        )));
    }
    let (a, b) = (Word(vec![i]), Word(vec![j]));
    let mut points = Vec::with_capacity(ladder.len());
    let mut dropped = Vec::new();
    for &eps in ladder {
        match pair_snapshot(ifs, &a, &b, eps, policy) {
            Ok(s) => points.push(ScanPoint {
                eps,
                value: s.c0.variation,
                near_critical: s.near_critical,
            }),
            Err(Error::Resource(msg)) => dropped.push((eps, msg)),
            Err(e) => return Err(e),
        }
    }
    Ok(ScanSeries::new(
        ScanKind::ScbcPair { i, j },
        points,
        dropped,
        None,
    ))
}

type Key = (u16, u64);

/// Words of `Σ(scale)` within `r` of `p`, as `(length, code)`.
fn sigma_words_near(tree: &IfsTree, ifs: &Ifs, scale: f64, p: Vec2, r: f64, out: &mut Vec<Key>) {
    let mut stack: Vec<CylNode> = vec![tree.root_node(&Word::empty())];
    while let Some(node) = stack.pop() {
        for letter in 0..tree.n_maps() {
            let c = tree.child(&node, letter);
            let (cc, rc) = tree.ball(&c);
            if p.dist(cc) - rc > r {
                continue;
            }
            if ifs.big_r * c.map.ratio < scale {
                if within(tree, &[c], p, r) {
                    out.push((c.len, c.code));
                }
            } else {
                stack.push(c);
            }
        }
    }
}

/// Largest localized variation over neighbouring pairs of `Σ(lambda eps)` at one scale.
pub fn pairwise_max(ifs: &Ifs, lambda: f64, eps: f64, policy: &Policy) -> Result<(f64, bool)> {
    let ps = parallel_set(ifs, eps, policy)?;
    let h = policy.h(eps);
    let tree = IfsTree::new(ifs, policy.target(eps));
    let scale = lambda * eps;
    let r = eps + REGION_SLACK * h;
    let mut near: Vec<Key> = Vec::new();
    let per_pair = labelled_c0(&ps.polys, 4.0 * h, |p, out: &mut Vec<(Key, Key)>| {
        near.clear();
        sigma_words_near(&tree, ifs, scale, p, r, &mut near);
        near.sort_unstable();
        for x in 0..near.len() {
            for y in x + 1..near.len() {
                out.push((near[x], near[y]));
            }
        }
    });
    let max = per_pair.values().map(|c| c.variation).fold(0.0, f64::max);
    let (lo, hi) = ps.chi_pair();
    Ok((max, lo != hi))
}

/// Pairwise maxima for `eps < R/lambda`, total variation of `F_eps` above.
pub fn cbc_pairwise_scan(
    ifs: &Ifs,
    lambda: f64,
    ladder: &[f64],
    policy: &Policy,
) -> Result<ScanSeries> {
    if !(lambda >= 1.0) {
        return Err(Error::Domain(format!(
            "lambda = {lambda} must be at least 1"
        )));
    }
    let mut warnings = Vec::new();
    if let Ok(c) = preset_sosc(ifs) {
        if lambda < c.lambda_min * (1.0 - 1e-12) {
            warnings.push(format!(
                "lambda = {lambda} is below the certified lambda_min = {}; neighbour pairs are still exact",
                c.lambda_min
            ));
        }
    }
    let split = ifs.big_r / lambda;
    let mut points = Vec::with_capacity(ladder.len());
    let mut dropped = Vec::new();
    for &eps in ladder {
        let r = if eps < split {
            pairwise_max(ifs, lambda, eps, policy)
        } else {
            parallel_set(ifs, eps, policy).map(|ps| {
                let rec = ps.record();
                (rec.c0_var, rec.near_critical)
            })
        };
        match r {
            Ok((value, near_critical)) => points.push(ScanPoint {
                eps,
                value,
                near_critical,
            }),
            Err(Error::Resource(msg)) => dropped.push((eps, msg)),
            Err(e) => return Err(e),
        }
    }
    let mut series = ScanSeries::new(
        ScanKind::CbcPairwise { lambda },
        points,
        dropped,
        Some(split),
    );
    series.warnings = warnings;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::presets;

    #[test]
    fn classifier_examples() {
        let flat: Vec<(f64, f64)> = (0..30)
            .map(|k| (10f64.powf(-k as f64 / 12.0), 2.0))
            .collect();
        assert_eq!(growth_classifier(&flat), Verdict::Bounded { bound: 2.0 });
        let zero: Vec<(f64, f64)> = flat.iter().map(|p| (p.0, 0.0)).collect();
        assert_eq!(growth_classifier(&zero), Verdict::Bounded { bound: 0.0 });
        assert!(matches!(
            growth_classifier(&flat[..5]),
            Verdict::InsufficientData { .. }
        ));
        // Staircase sampled at the band edges.
        let stairs: Vec<(f64, f64)> = (1..14)
            .map(|m| (0.5 * 3f64.powi(-(m + 2)), 0.5 * (2f64.powi(m) - 1.0)))
            .collect();
        match growth_classifier(&stairs) {
            Verdict::Unbounded { exponent, .. } => {
                assert!(
                    (exponent - 2f64.ln() / 3f64.ln()).abs() < 0.05,
                    "{exponent}"
                )
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn ladder_shape() {
        let l = ladder(1e-3, 1.0, 12.0, 3.0).unwrap();
        assert_eq!(l.len(), 37);
        assert!(l.windows(2).all(|w| w[0] > w[1]));
        assert!(ladder(1.0, 0.5, 12.0, 3.0).is_err());
        assert!(ladder(1e-3, 4.0, 12.0, 3.0).is_err());
    }

    #[test]
    fn cantor_pair_empty_below_half_gap() {
        let ifs = presets::cantor_square(1.0 / 3.0).unwrap();
        let s = pair_snapshot(
            &ifs,
            &Word(vec![1]),
            &Word(vec![2]),
            0.15,
            &Policy::default(),
        )
        .unwrap();
        assert!(s.parallel.is_none());
        assert_eq!(s.c0.variation, 0.0);
    }
}
