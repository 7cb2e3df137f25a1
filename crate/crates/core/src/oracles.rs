//! Closed-form values for the Cantor square, the U-set and the Koch curve.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use serde::Serialize;
use std::f64::consts::PI;

/// Cantor square with corner squares of side `p`; `g = 1 - 2p` is the gap.
///
/// For `eps > g/2` the set `(S_1 F)_eps ∩ (S_2 F)_eps` is cut along the middle
/// line by a Cantor set `C̃` whose complementary intervals have lengths
/// `s p^k g` (`2^k` of them). The default scale is `s = p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CantorSquareParams {
    pub p: f64,
    pub g: f64,
    pub s: f64,
}

impl CantorSquareParams {
    pub fn new(p: f64) -> Result<Self> {
        Self::with_scale(p, p)
    }

    pub fn with_scale(p: f64, s: f64) -> Result<Self> {
        if !(p > 0.0 && p < 0.5) || !(s > 0.0) {
            return Err(Error::Domain(format!("cantor parameters p = {p}, s = {s}")));
        }
        Ok(CantorSquareParams {
            p,
            g: 1.0 - 2.0 * p,
            s,
        })
    }
}

/// `1 + #{complementary intervals of C̃ with l^2 > 4 eps^2 - g^2}`.
pub fn cantor_n(c: &CantorSquareParams, eps: f64) -> Result<u64> {
    if !(eps > c.g / 2.0) {
        return Err(Error::Domain(format!(
            "cantor_N needs eps > g/2 = {}",
            c.g / 2.0
        )));
    }
    let thr = 4.0 * eps * eps - c.g * c.g;
    let mut n = 1u64;
    let mut l = c.s * c.g;
    let mut count = 1u64;
    while l * l > thr {
        n = n
            .checked_add(count)
            .ok_or_else(|| Error::Domain(format!("cantor_N overflows at eps = {eps}")))?;
        l *= c.p;
        count = count.saturating_mul(2);
    }
    Ok(n)
}

/// Opening angle `2 asin(g / (2 eps))` of the lens cut out at a gap.
pub fn cantor_alpha(c: &CantorSquareParams, eps: f64) -> Result<f64> {
    if !(eps >= c.g / 2.0) {
        return Err(Error::Domain(format!(
            "cantor_alpha needs eps >= g/2 = {}",
            c.g / 2.0
        )));
    }
    Ok(2.0 * (c.g / (2.0 * eps)).min(1.0).asin())
}

/// `C_0^var` of the pair intersection: `N alpha / pi`.
pub fn cantor_c0var(c: &CantorSquareParams, eps: f64) -> Result<f64> {
    Ok(cantor_n(c, eps)? as f64 * cantor_alpha(c, eps)? / PI)
}

/// Band index `m` with `3^{-(m+2)}/2 <= eps < 3^{-(m+1)}/2`.
pub fn uset_band(eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps < 1.0 / 18.0) {
        return Err(Error::Domain(format!(
            "uset_c0var needs 0 < eps < 1/18, got {eps}"
        )));
    }
    let lower = |m: u32| 0.5 * 3f64.powi(-(m as i32 + 2));
    let mut m = 1;
    while eps < lower(m) {
        m += 1;
    }
    Ok(m)
}

/// Number of corner pairs `J(eps) = 2^m - 1` in the pair intersection.
pub fn uset_pairs(eps: f64) -> Result<u64> {
    Ok((1u64 << uset_band(eps)?) - 1)
}

/// `C_0^var` of `(S_1 F)_eps ∩ (S_2 F)_eps` for the U-set: `(2^m - 1)/2`.
pub fn uset_c0var(eps: f64) -> Result<f64> {
    Ok(0.5 * uset_pairs(eps)? as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KochConstants {
    /// Signed curvature of the parallel set on the arc around the junction.
    pub arc_measure: f64,
    /// Range of the junction point's own contribution.
    pub junction_range: (f64, f64),
    pub d0: f64,
    pub r: f64,
    pub critical_point: Vec2,
}

impl KochConstants {
    /// Critical values `r^k / 9` of the distance function.
    pub fn critical_value(&self, k: u32) -> f64 {
        self.r.powi(k as i32) / 9.0
    }
}

pub fn koch_constants() -> KochConstants {
    KochConstants {
        arc_measure: 1.0 / 6.0,
        junction_range: (-1.0, -0.5),
        d0: 1.0 / 6.0 + 1.0,
        r: 1.0 / 3f64.sqrt(),
        critical_point: Vec2::new(0.5, 3f64.sqrt() / 18.0),
    }
}
