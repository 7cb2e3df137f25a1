//! Total curvatures of parallel sets, the renewal remainder `R_k`, and
//! fractal curvature estimates.
//!
//! `C_0` is the Euler characteristic, `C_1` half the boundary length and `C_2`
//! the area of `F_eps`, all measured on rasters with `h = h_ratio * eps`.
//!
//! Small scales are reached through the renewal identity
//! `C_k(F_eps) = sum_i r_i^k C_k(F_{eps/r_i}) + R_k(eps)` for `eps <= r_min`,
//! where `R_k(eps)` is evaluated locally: the union and the first-level
//! cylinders are rastered on a window around the pairwise overlaps, and
//! everything away from the overlaps cancels cell for cell.

use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::hierarchy::{pair_cover, IfsTree};
use crate::ifs::{Ifs, Lattice, Word};
use crate::raster::{
    boundary_polygons, curvature_c0, euler_characteristic_at, BoundaryPolygons, DistanceField, Grid,
};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

/// Relative offset used to detect critical values of the distance function.
pub const CRITICAL_REL: f64 = 1e-3;
/// Cap on the number of rectangles in a pair window.
pub const MAX_WINDOW_RECTS: usize = 2_000_000;

/// Raster resolution policy: `h = h_ratio * eps`, cylinder leaves of diameter `h/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub h_ratio: f64,
}

impl Default for Policy {
    fn default() -> Self {
        Policy {
            h_ratio: 1.0 / 50.0,
        }
    }
}

impl Policy {
    pub fn new(h_ratio: f64) -> Result<Self> {
        if !(h_ratio > 0.0 && h_ratio <= 1.0 / 20.0) {
            return Err(Error::Config(format!(
                "h_ratio = {h_ratio} must lie in (0, 1/20]"
            )));
        }
        Ok(Policy { h_ratio })
    }

    pub fn h(&self, eps: f64) -> f64 {
        self.h_ratio * eps
    }

    pub fn target(&self, eps: f64) -> f64 {
        0.5 * self.h(eps)
    }

    pub fn halved(&self) -> Policy {
        Policy {
            h_ratio: 0.5 * self.h_ratio,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureRecord {
    pub eps: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c0_var: f64,
    pub near_critical: bool,
    pub h: f64,
    pub target_error: f64,
}

impl CurvatureRecord {
    pub fn c(&self, k: usize) -> f64 {
        [self.c0, self.c1, self.c2][k]
    }
}

/// Rastered `F_eps` with its boundary.
pub struct ParallelSet {
    pub eps: f64,
    pub field: DistanceField,
    pub polys: BoundaryPolygons,
}

impl ParallelSet {
    pub fn h(&self) -> f64 {
        self.field.grid.h
    }

    pub fn chi(&self) -> i64 {
        euler_characteristic_at(&self.field, self.eps)
    }

    /// Euler characteristics at `eps (1 - 1e-3)` and `eps (1 + 1e-3)`.
    pub fn chi_pair(&self) -> (i64, i64) {
        (
            euler_characteristic_at(&self.field, self.eps * (1.0 - CRITICAL_REL)),
            euler_characteristic_at(&self.field, self.eps * (1.0 + CRITICAL_REL)),
        )
    }

    /// `[C_0, C_1, C_2]` over the field's care set.
    pub fn measures(&self) -> [f64; 3] {
        [
            self.chi() as f64,
            0.5 * self.polys.length(),
            self.polys.area(),
        ]
    }

    pub fn record(&self) -> CurvatureRecord {
        let [c0, c1, c2] = self.measures();
        let (lo, hi) = self.chi_pair();
        CurvatureRecord {
            eps: self.eps,
            c0,
            c1,
            c2,
            c0_var: curvature_c0(&self.polys, None).variation,
            near_critical: lo != hi,
            h: self.h(),
            target_error: self.field.source_error,
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

/// Grid with spacing `h` covering `F_eps` for the tree's set.
pub fn raster_grid(tree: &IfsTree, eps: f64, h: f64) -> Grid {
    Grid::covering(
        &tree.bounds().inflate(eps * (1.0 + CRITICAL_REL) + 4.0 * h),
        h,
    )
}

/// Rasters the set below `tree` at `eps`, optionally only on tiles meeting `care`.
pub fn parallel_set_on(
    tree: Arc<IfsTree>,
    grid: Grid,
    eps: f64,
    care: Option<&[Rect]>,
) -> Result<ParallelSet> {
    check_eps(eps)?;
    let band = (eps * (1.0 - CRITICAL_REL), eps * (1.0 + CRITICAL_REL));
    let field = DistanceField::build(tree, grid, Some(band), care)?;
    let polys = boundary_polygons(&field, eps);
    Ok(ParallelSet { eps, field, polys })
}

pub fn parallel_set(ifs: &Ifs, eps: f64, policy: &Policy) -> Result<ParallelSet> {
    check_eps(eps)?;
    let tree = Arc::new(IfsTree::new(ifs, policy.target(eps)));
    let grid = raster_grid(&tree, eps, policy.h(eps));
    parallel_set_on(tree, grid, eps, None)
}

pub fn total_curvatures_with(ifs: &Ifs, eps: f64, policy: &Policy) -> Result<CurvatureRecord> {
    Ok(parallel_set(ifs, eps, policy)?.record())
}

pub fn total_curvatures(ifs: &Ifs, eps: f64) -> Result<CurvatureRecord> {
    total_curvatures_with(ifs, eps, &Policy::default())
}

/// Remainder `R_k(eps)` for `k = 0, 1, 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Remainder {
    pub eps: f64,
    pub values: [f64; 3],
    pub near_critical: bool,
}

/// `R_k(eps) = C_k(F_eps) - sum_i 1{eps <= r_i} r_i^k C_k(F_{eps/r_i})` from
/// independent full rasters.
pub fn rescaled_rk_with(ifs: &Ifs, eps: f64, policy: &Policy) -> Result<Remainder> {
    let whole = total_curvatures_with(ifs, eps, policy)?;
    let mut values = [whole.c0, whole.c1, whole.c2];
    let mut near = whole.near_critical;
    for r in ifs.ratios() {
        if eps <= r {
            let part = total_curvatures_with(ifs, eps / r, policy)?;
            for (k, v) in values.iter_mut().enumerate() {
                *v -= r.powi(k as i32) * part.c(k);
            }
            near |= part.near_critical;
        }
    }
    Ok(Remainder {
        eps,
        values,
        near_critical: near,
    })
}

pub fn rescaled_rk(ifs: &Ifs, eps: f64, k: usize) -> Result<f64> {
    if k > 2 {
        return Err(Error::Domain(format!("k = {k} must be 0, 1 or 2")));
    }
    Ok(rescaled_rk_with(ifs, eps, &Policy::default())?.values[k])
}

/// Rectangles covering every point within `reach` of two different first-level cylinders.
pub fn overlap_window(ifs: &Ifs, tree: &IfsTree, reach: f64, max_radius: f64) -> Result<Vec<Rect>> {
    let roots: Vec<_> = (1..=ifs.n() as u16)
        .map(|i| tree.root_node(&Word(vec![i])))
        .collect();
    let mut rects = Vec::new();
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let cover = pair_cover(
                tree,
                &roots[i..=i],
                &roots[j..=j],
                reach,
                max_radius,
                MAX_WINDOW_RECTS,
            )
            .ok_or_else(|| {
                Error::Resource(format!("overlap window exceeds {MAX_WINDOW_RECTS} boxes"))
            })?;
            rects.extend(cover);
            if rects.len() > MAX_WINDOW_RECTS {
                return Err(Error::Resource(format!(
                    "overlap window exceeds {MAX_WINDOW_RECTS} boxes"
                )));
            }
        }
    }
    Ok(rects)
}

/// `R_k(eps)` for `eps <= r_min`, measured on the overlap window only.
pub fn local_rk(ifs: &Ifs, eps: f64, policy: &Policy) -> Result<Remainder> {
    check_eps(eps)?;
    if eps > ifs.r_min() {
        return Err(Error::Domain(format!(
            "local R_k needs eps <= r_min = {}",
            ifs.r_min()
        )));
    }
    let h = policy.h(eps);
    let tree = Arc::new(IfsTree::new(ifs, policy.target(eps)));
    let grid = raster_grid(&tree, eps, h);
    // Cells whose clamped value can differ between the union and a single cylinder.
    let reach = eps * (1.0 + CRITICAL_REL) + 4.0 * h;
    let rects: Vec<Rect> = overlap_window(ifs, &tree, reach, eps.max(8.0 * h))?
        .into_iter()
        .map(|r| r.inflate(4.0 * h))
        .collect();
    if rects.is_empty() {
        return Ok(Remainder {
            eps,
            values: [0.0; 3],
            near_critical: false,
        });
    }
    let union = parallel_set_on(tree.clone(), grid, eps, Some(&rects))?;
    let mut values = union.measures();
    let (mut lo, mut hi) = union.chi_pair();
    for i in 1..=ifs.n() as u16 {
        let part = Arc::new(tree.rerooted(&[Word(vec![i])]));
        let ps = parallel_set_on(part, grid, eps, Some(&rects))?;
        for (v, m) in values.iter_mut().zip(ps.measures()) {
            *v -= m;
        }
        let (a, b) = ps.chi_pair();
        lo -= a;
        hi -= b;
    }
    Ok(Remainder {
        eps,
        values,
        near_critical: lo != hi,
    })
}

/// Memoized evaluation of `C_k(F_eps)` through the renewal identity.
pub struct Renewal<'a> {
    ifs: &'a Ifs,
    policy: Policy,
    memo: HashMap<i64, ([f64; 3], bool)>,
    /// Scales at and above this value are rastered directly.
    pub direct_min: f64,
    pub direct_evaluations: usize,
    pub local_evaluations: usize,
}

impl<'a> Renewal<'a> {
    pub fn new(ifs: &'a Ifs, policy: Policy) -> Self {
        Renewal {
            ifs,
            policy,
            memo: HashMap::new(),
            direct_min: ifs.r_min(),
            direct_evaluations: 0,
            local_evaluations: 0,
        }
    }

    fn key(eps: f64) -> i64 {
        (eps.ln() * 1e9).round() as i64
    }

    /// `([C_0, C_1, C_2], near_critical)` at `eps`.
    pub fn curvatures(&mut self, eps: f64) -> Result<([f64; 3], bool)> {
        check_eps(eps)?;
        let key = Self::key(eps);
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let v = if eps >= self.direct_min {
            self.direct_evaluations += 1;
            let r = total_curvatures_with(self.ifs, eps, &self.policy)?;
            ([r.c0, r.c1, r.c2], r.near_critical)
        } else {
            self.local_evaluations += 1;
            let rem = local_rk(self.ifs, eps, &self.policy)?;
            let (mut c, mut near) = (rem.values, rem.near_critical);
            for r in self.ifs.ratios() {
                let (part, n) = self.curvatures(eps / r)?;
                for k in 0..3 {
                    c[k] += r.powi(k as i32) * part[k];
                }
                near |= n;
            }
            (c, near)
        };
        self.memo.insert(key, v);
        Ok(v)
    }
}

/// Node spacing in `ln eps`: at least 40 nodes per decade, a whole number per
/// lattice period for arithmetic systems.
pub fn log_step(ifs: &Ifs) -> f64 {
    let per_decade = 10f64.ln() / 40.0;
    match ifs.lattice() {
        Lattice::Arithmetic { h, .. } => h / (h / per_decade).ceil(),
        Lattice::NonArithmetic { .. } => per_decade,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AverageResult {
    pub value: f64,
    pub nodes: usize,
    pub skipped: usize,
    pub warnings: Vec<String>,
    /// `(eps, eps^{D-k} C_k(F_eps), near_critical)`, descending in `eps`.
    pub samples: Vec<(f64, f64, bool)>,
}

/// `(1/|ln delta|) ∫_delta^1 eps^{D-k} C_k(F_eps) deps/eps`, trapezoid rule in
/// `ln eps`; near-critical interior nodes are skipped.
pub fn fractal_avg_with(ifs: &Ifs, k: usize, delta: f64, policy: &Policy) -> Result<AverageResult> {
    if k > 2 {
        return Err(Error::Domain(format!("k = {k} must be 0, 1 or 2")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta = {delta} must lie in (0, 1)")));
    }
    let d = ifs.similarity_dimension();
    let step = log_step(ifs);
    let l = -delta.ln();
    // Offset by a third of a step so that nodes avoid lattice-aligned critical values.
    let mut ts = vec![0.0];
    let mut j = 0.0;
    loop {
        let t = -(j + 1.0 / 3.0) * step;
        if t <= -l {
            break;
        }
        ts.push(t);
        j += 1.0;
    }
    ts.push(-l);
    let mut engine = Renewal::new(ifs, *policy);
    let mut samples = Vec::with_capacity(ts.len());
    for &t in &ts {
        let eps = t.exp();
        let (c, near) = engine.curvatures(eps)?;
        samples.push((eps, eps.powf(d - k as f64) * c[k], near));
    }
    let n = samples.len();
    let usable: Vec<usize> = (0..n)
        .filter(|&i| i == 0 || i == n - 1 || !samples[i].2)
        .collect();
    let skipped = n - usable.len();
    let mut vals: Vec<(f64, f64)> = usable.iter().map(|&i| (ts[i], samples[i].1)).collect();
    // An endpoint on a critical value takes the value of its nearest regular neighbour.
    for (end, next) in [
        (0usize, 1usize),
        (vals.len() - 1, vals.len().saturating_sub(2)),
    ] {
        let idx = if end == 0 { 0 } else { n - 1 };
        if samples[idx].2 && vals.len() > 2 {
            vals[end].1 = vals[next].1;
        }
    }
    let integral: f64 = vals
        .windows(2)
        .map(|w| 0.5 * (w[0].0 - w[1].0) * (w[0].1 + w[1].1))
        .sum();
    let mut warnings = Vec::new();
    if skipped as f64 > 0.1 * n as f64 {
        warnings.push(format!(
            "{skipped} of {n} nodes are near-critical and were skipped"
        ));
    }
    Ok(AverageResult {
        value: integral / l,
        nodes: n,
        skipped,
        warnings,
        samples,
    })
}

pub fn fractal_avg(ifs: &Ifs, k: usize, delta: f64) -> Result<f64> {
    Ok(fractal_avg_with(ifs, k, delta, &Policy::default())?.value)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    /// Bound on `(1/eta) ∫_0^{eps_min}`, from a power fit over the last decade.
    pub tail: f64,
    pub converged: bool,
    /// `(r, R_k(r), near_critical)`, descending in `r`.
    pub samples: Vec<(f64, f64, bool)>,
}

/// `R_k(r)` with the indicator set fixed to the cylinders with `r_i >= above`.
fn remainder_with(
    ifs: &Ifs,
    r: f64,
    k: usize,
    above: f64,
    policy: &Policy,
    engine: &mut Renewal,
) -> Result<(f64, bool)> {
    if above <= ifs.r_min() && r <= ifs.r_min() {
        let rem = local_rk(ifs, r, policy)?;
        return Ok((rem.values[k], rem.near_critical));
    }
    let whole = total_curvatures_with(ifs, r, policy)?;
    let mut v = whole.c(k);
    let mut near = whole.near_critical;
    for ri in ifs.ratios() {
        if ri >= above {
            let (c, n) = engine.curvatures(r / ri)?;
            v -= ri.powi(k as i32) * c[k];
            near |= n;
        }
    }
    Ok((v, near))
}

/// `(1/eta) ∫_{eps_min}^1 r^{D-k-1} R_k(r) dr`, split at the jumps `r = r_i`.
pub fn fractal_integral_with(
    ifs: &Ifs,
    k: usize,
    eps_min: f64,
    policy: &Policy,
) -> Result<IntegralResult> {
    if k > 2 {
        return Err(Error::Domain(format!("k = {k} must be 0, 1 or 2")));
    }
    if !(eps_min > 0.0 && eps_min < ifs.r_min()) {
        return Err(Error::Domain(format!(
            "eps_min = {eps_min} must lie in (0, r_min)"
        )));
    }
    let d = ifs.similarity_dimension();
    let eta = ifs.eta();
    let mut breaks: Vec<f64> = ifs.ratios();
    // Upper limit 1, matching the averaging window of `fractal_avg`.
    breaks.push(1.0);
    breaks.push(eps_min);
    breaks.sort_by(|a, b| b.total_cmp(a));
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let step = 10f64.ln() / 40.0;
    let mut engine = Renewal::new(ifs, *policy);
    let mut total = 0.0;
    let mut samples = Vec::new();
    for seg in breaks.windows(2) {
        let (hi, lo) = (seg[0], seg[1]);
        // On (lo, hi] the cylinders with r_i >= hi are counted.
        let above = hi;
        let m = ((hi / lo).ln() / step).ceil().max(1.0) as usize;
        let mut pts = Vec::with_capacity(m + 1);
        for q in 0..=m {
            let t = hi.ln() + (lo.ln() - hi.ln()) * q as f64 / m as f64;
            let r = if q == m { lo } else { t.exp() };
            // At r = lo the indicator of cylinders with r_i = lo is still off on this segment.
            let (v, near) = remainder_with(ifs, r, k, above, policy, &mut engine)?;
            pts.push((r, r.powf(d - k as f64) * v, near));
            samples.push((r, v, near));
        }
        let mut last: Option<(f64, f64)> = None;
        for (i, &(r, g, near)) in pts.iter().enumerate() {
            if near && i != 0 && i != pts.len() - 1 {
                continue;
            }
            if let Some((r0, g0)) = last {
                total += 0.5 * (r0.ln() - r.ln()) * (g0 + g);
            }
            last = Some((r, g));
        }
    }
    let tail = tail_bound(&samples, eps_min, d, k) / eta;
    let value = total / eta;
    let converged = tail.is_finite() && tail <= 0.1 * value.abs();
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));
    samples.dedup_by(|a, b| a.0 == b.0);
    Ok(IntegralResult {
        value,
        tail,
        converged,
        samples,
    })
}

/// `∫_0^{eps_min} |g| dln r` for a power law `|g| = A r^beta` fitted over the last decade.
fn tail_bound(samples: &[(f64, f64, bool)], eps_min: f64, d: f64, k: usize) -> f64 {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.0 <= 10.0 * eps_min && !s.2)
        .map(|s| (s.0, (s.0.powf(d - k as f64) * s.1).abs()))
        .collect();
    if pts.iter().all(|p| p.1 == 0.0) {
        return 0.0;
    }
    let pos: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|p| (p.0.ln(), p.1.ln()))
        .collect();
    if pos.len() < 3 {
        return f64::INFINITY;
    }
    let (slope, intercept, _) = least_squares(&pos);
    // Envelope of the data above the fitted line.
    let lift = pos
        .iter()
        .map(|&(x, y)| y - (intercept + slope * x))
        .fold(0.0, f64::max);
    if slope <= 0.0 {
        return f64::INFINITY;
    }
    (intercept + lift + slope * eps_min.ln()).exp() / slope
}

/// Ordinary least squares `y = a x + b`; returns `(a, b, r^2)`.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my, 0.0);
    }
    let a = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (a, my - a * mx, r2)
}

/// Range of `eps^{D-k} C_k(F_eps)` over the last two decades above `delta`;
/// `None` for arithmetic systems, where the limit does not exist in general.
pub fn esslim_probe(
    ifs: &Ifs,
    k: usize,
    delta: f64,
    policy: &Policy,
) -> Result<Option<(f64, f64)>> {
    if ifs.lattice().is_arithmetic() {
        return Ok(None);
    }
    let avg = fractal_avg_with(ifs, k, delta, policy)?;
    let band = avg
        .samples
        .iter()
        .filter(|s| s.0 <= 100.0 * delta && !s.2)
        .fold(None, |acc: Option<(f64, f64)>, s| {
            Some(acc.map_or((s.1, s.1), |(a, b)| (a.min(s.1), b.max(s.1))))
        });
    Ok(band)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FractalEstimate {
    pub k: usize,
    #[serde(rename = "D")]
    pub d: f64,
    pub eta: f64,
    pub delta: f64,
    pub value_avg: f64,
    pub value_integral: f64,
    pub integral_tail: f64,
    pub integral_converged: bool,
    pub esslim_band: Option<(f64, f64)>,
    pub warnings: Vec<String>,
}

pub fn fractal_integral(
    ifs: &Ifs,
    k: usize,
    delta: f64,
    policy: &Policy,
) -> Result<FractalEstimate> {
    let avg = fractal_avg_with(ifs, k, delta, policy)?;
    let int = fractal_integral_with(ifs, k, delta.min(0.5 * ifs.r_min()), policy)?;
    let mut warnings = avg.warnings.clone();
    if !int.converged {
        warnings.push(format!(
            "integral tail bound {:e} exceeds 10% of the value",
            int.tail
        ));
    }
    Ok(FractalEstimate {
        k,
        d: ifs.similarity_dimension(),
        eta: ifs.eta(),
        delta,
        value_avg: avg.value,
        value_integral: int.value,
        integral_tail: int.tail,
        integral_converged: int.converged,
        esslim_band: esslim_probe(ifs, k, delta, policy)?,
        warnings,
    })
}

pub const CSV_HEADER: [&str; 8] = [
    "eps",
    "c0",
    "c1",
    "c2",
    "c0_var",
    "near_critical",
    "h",
    "target_error",
];

pub fn write_records_csv(records: &[CurvatureRecord], out: impl Write) -> Result<()> {
    use crate::fmt::sig12;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            sig12(r.eps),
            sig12(r.c0),
            sig12(r.c1),
            sig12(r.c2),
            sig12(r.c0_var),
            r.near_critical.to_string(),
            sig12(r.h),
            sig12(r.target_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::presets;
    use std::f64::consts::PI;

    #[test]
    fn square_steiner() {
        let r = total_curvatures(&presets::square(), 0.3).unwrap();
        assert_eq!(r.c0, 1.0);
        assert!((r.c2 - (1.0 + 1.2 + PI * 0.09)).abs() < 2e-3, "{}", r.c2);
        assert!((r.c1 - (2.0 + PI * 0.3)).abs() < 2e-3, "{}", r.c1);
        assert!((r.c0_var - 1.0).abs() < 0.02);
    }

    #[test]
    fn cantor_components() {
        let ifs = presets::cantor_square(1.0 / 3.0).unwrap();
        assert_eq!(total_curvatures(&ifs, 0.16).unwrap().c0, 4.0);
        // One component around a central hole.
        assert_eq!(total_curvatures(&ifs, 0.18).unwrap().c0, 0.0);
    }

    #[test]
    fn local_and_direct_remainders_agree() {
        let ifs = presets::koch();
        let p = Policy::default();
        for eps in [0.05, 0.12] {
            let a = local_rk(&ifs, eps, &p).unwrap();
            let b = rescaled_rk_with(&ifs, eps, &p).unwrap();
            assert_eq!(a.values[0], b.values[0]);
            assert!(
                (a.values[2] - b.values[2]).abs() < 2e-3 * eps,
                "{a:?} {b:?}"
            );
        }
    }

    #[test]
    fn renewal_matches_direct() {
        let ifs = presets::koch();
        let p = Policy::default();
        let mut e = Renewal::new(&ifs, p);
        let eps = 0.02;
        let (c, _) = e.curvatures(eps).unwrap();
        let r = total_curvatures_with(&ifs, eps, &p).unwrap();
        assert!((c[2] - r.c2).abs() < 2e-3 * r.c2, "{} {}", c[2], r.c2);
        assert!((c[1] - r.c1).abs() < 1e-2 * r.c1, "{} {}", c[1], r.c1);
        assert!(e.local_evaluations > 0);
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_records_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "eps,c0,c1,c2,c0_var,near_critical,h,target_error\n"
        );
    }
}
