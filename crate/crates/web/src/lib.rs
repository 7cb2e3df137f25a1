//! Browser bindings: render a parallel set, measure it, and compare a pair
//! region against its closed form.

use fracurv::curvature::{parallel_set, Policy};
use fracurv::diagnostics::{pair_snapshot, PairRegion};
use fracurv::ifs::{presets, Ifs, Word};
use fracurv::oracles::{cantor_c0var, uset_c0var, CantorSquareParams};
use fracurv::raster::io::to_svg_highlight;
use fracurv::{Error, Result};
use serde_json::json;
use wasm_bindgen::prelude::*;

// Browsers get a coarser default grid than the CLI.
const H_RATIO: f64 = 1.0 / 30.0;

fn setup(preset: &str, p: f64, h_ratio: f64) -> Result<(Ifs, Policy)> {
    let ifs = presets::by_name(preset, (p > 0.0).then_some(p))?;
    let policy = Policy::new(if h_ratio > 0.0 { h_ratio } else { H_RATIO })?;
    Ok((ifs, policy))
}

fn parse_pair(pair: &str) -> Result<Option<(Word, Word)>> {
    if pair.trim().is_empty() {
        return Ok(None);
    }
    let ids: Vec<u16> = pair
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad pair '{pair}'")))
        })
        .collect::<Result<_>>()?;
    match ids[..] {
        [i, j] => Ok(Some((Word(vec![i]), Word(vec![j])))),
        _ => Err(Error::Config(format!(
            "a pair needs two indices, got '{pair}'"
        ))),
    }
}

/// SVG of `F_eps` with the boundary inside the pair region in red.
pub fn svg(preset: &str, p: f64, eps: f64, h_ratio: f64, pair: &str) -> Result<String> {
    let (ifs, policy) = setup(preset, p, h_ratio)?;
    let ps = parallel_set(&ifs, eps, &policy)?;
    Ok(match parse_pair(pair)? {
        Some((a, b)) => {
            let region = PairRegion::new(&ifs, &a, &b, eps, &policy)?;
            to_svg_highlight(&ps.polys, |x| region.contains(x))
        }
        None => to_svg_highlight(&ps.polys, |_| false),
    })
}

/// `{eps, c0, c1, c2, c0_var, near_critical, h, target_error}`.
pub fn measures(preset: &str, p: f64, eps: f64, h_ratio: f64) -> Result<String> {
    let (ifs, policy) = setup(preset, p, h_ratio)?;
    Ok(serde_json::to_string(
        &parallel_set(&ifs, eps, &policy)?.record(),
    )?)
}

/// Localized `C_0^var` on `(S_i F)_eps ∩ (S_j F)_eps`, with the closed form where one exists.
pub fn pair_measure(preset: &str, p: f64, eps: f64, h_ratio: f64, pair: &str) -> Result<String> {
    let (ifs, policy) = setup(preset, p, h_ratio)?;
    let (a, b) = parse_pair(pair)?.ok_or_else(|| Error::Config("missing pair".into()))?;
    let s = pair_snapshot(&ifs, &a, &b, eps, &policy)?;
    let first = (a.0[0], b.0[0]);
    let oracle = match (preset, first) {
        ("uset", (1, 2) | (2, 1)) => uset_c0var(eps).ok(),
        ("cantor-square", (1, 2) | (2, 1)) => {
            CantorSquareParams::new(if p > 0.0 { p } else { 1.0 / 3.0 })
                .and_then(|c| cantor_c0var(&c, eps))
                .ok()
        }
        _ => None,
    };
    Ok(json!({
        "eps": eps,
        "h": s.h,
        "signed": s.c0.signed,
        "variation": s.c0.variation,
        "near_critical": s.near_critical,
        "empty": s.parallel.is_none(),
        "oracle": oracle,
    })
    .to_string())
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = renderSvg)]
pub fn render_svg(
    preset: &str,
    p: f64,
    eps: f64,
    h_ratio: f64,
    pair: &str,
) -> std::result::Result<String, JsError> {
    js(svg(preset, p, eps, h_ratio, pair))
}

#[wasm_bindgen(js_name = curvatures)]
pub fn curvatures(
    preset: &str,
    p: f64,
    eps: f64,
    h_ratio: f64,
) -> std::result::Result<String, JsError> {
    js(measures(preset, p, eps, h_ratio))
}

#[wasm_bindgen(js_name = pairCurvature)]
pub fn pair_curvature(
    preset: &str,
    p: f64,
    eps: f64,
    h_ratio: f64,
    pair: &str,
) -> std::result::Result<String, JsError> {
    js(pair_measure(preset, p, eps, h_ratio, pair))
}
