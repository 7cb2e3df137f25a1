//! Scale-indexed word families and the constants of the strong open set condition.

use crate::error::{Error, Result};
use crate::geom::Polygon;
use crate::hierarchy::{
    distance_to_polygon_boundary, may_be_within, polygon_boundary_within, BallTree, CylNode,
    IfsTree,
};
use crate::ifs::{Ifs, Word};
use serde::{Deserialize, Serialize};

/// Default cap on the size of an enumerated family.
pub const MAX_FAMILY: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Sigma,
    SigmaB,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordFamily {
    pub epsilon: f64,
    pub kind: FamilyKind,
    pub words: Vec<Word>,
    /// Resolution slack of the boundary test (sigma_b only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
}

fn check_eps(ifs: &Ifs, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= ifs.big_r) {
        return Err(Error::Domain(format!(
            "eps = {eps} outside (0, R = {}]",
            ifs.big_r
        )));
    }
    Ok(())
}

/// Calls `f(word, ratio)` for each word with `R r_w < eps <= R r_{w minus last letter}`.
pub fn for_each_sigma(ifs: &Ifs, eps: f64, mut f: impl FnMut(&[u16], f64)) -> Result<()> {
    check_eps(ifs, eps)?;
    let ratios = ifs.ratios();
    let mut word: Vec<u16> = Vec::new();
    fn rec(
        ratios: &[f64],
        big_r: f64,
        eps: f64,
        r: f64,
        word: &mut Vec<u16>,
        f: &mut dyn FnMut(&[u16], f64),
    ) {
        for (i, &ri) in ratios.iter().enumerate() {
            let rw = r * ri;
            word.push(i as u16 + 1);
            if big_r * rw < eps {
                f(word, rw);
            } else {
                rec(ratios, big_r, eps, rw, word, f);
            }
            word.pop();
        }
    }
    rec(&ratios, ifs.big_r, eps, 1.0, &mut word, &mut f);
    Ok(())
}

/// Number of words in `Σ(eps)`, without storing them.
pub fn sigma_size(ifs: &Ifs, eps: f64) -> Result<u64> {
    let mut n = 0u64;
    for_each_sigma(ifs, eps, |_, _| n += 1)?;
    Ok(n)
}

pub fn sigma_with_limit(ifs: &Ifs, eps: f64, limit: usize) -> Result<WordFamily> {
    let mut words = Vec::new();
    let mut over = false;
    for_each_sigma(ifs, eps, |w, _| {
        if words.len() < limit {
            words.push(Word(w.to_vec()));
        } else {
            over = true;
        }
    })?;
    if over {
        return Err(Error::Resource(format!(
            "Σ({eps}) has more than {limit} words"
        )));
    }
    Ok(WordFamily {
        epsilon: eps,
        kind: FamilyKind::Sigma,
        words,
        slack: None,
    })
}

pub fn sigma(ifs: &Ifs, eps: f64) -> Result<WordFamily> {
    sigma_with_limit(ifs, eps, MAX_FAMILY)
}

/// Words of `Σ(eps)` whose cylinder comes within `2 eps` of the complement of
/// `SO = ⋃ S_i O`.
///
/// The sets `S_i O` are disjoint and open, so for `x` in the closure of `S_i O`
/// the distance to the complement of `SO` is the distance to the boundary of
/// `S_i O`; the test is done against that polygon.
pub fn sigma_b(ifs: &Ifs, eps: f64) -> Result<WordFamily> {
    let fam = sigma(ifs, eps)?;
    let target = eps / 100.0;
    let tree = IfsTree::new(ifs, target);
    let images: Vec<Polygon> = ifs
        .maps
        .iter()
        .map(|m| Polygon::new(ifs.open_set.vertices.iter().map(|&v| m.apply(v)).collect()))
        .collect();
    let slack = 2.0 * target;
    let words = fam
        .words
        .into_iter()
        .filter(|w| {
            let node = tree.root_node(w);
            polygon_boundary_within(
                &tree,
                &[node],
                &images[w.0[0] as usize - 1],
                2.0 * eps + slack,
            )
        })
        .collect();
    Ok(WordFamily {
        epsilon: eps,
        kind: FamilyKind::SigmaB,
        words,
        slack: Some(slack),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoscConstants {
    pub u: Word,
    pub alpha: f64,
    pub rho: f64,
    pub lambda_min: f64,
}

/// `alpha` is a certified lower bound for `dist(S_u F, O^c)`.
pub fn sosc_constants(ifs: &Ifs, u: &Word) -> Result<SoscConstants> {
    ifs.check_word(u)?;
    if u.is_empty() {
        return Err(Error::InvalidWord("u must be nonempty".into()));
    }
    let target = 1e-7 * ifs.diameter_bound() * ifs.word_ratio(u);
    let tree = IfsTree::new(ifs, target);
    let node = tree.root_node(u);
    let (d, inside) = distance_to_polygon_boundary(&tree, &[node], &ifs.open_set, target);
    let alpha = d - 2.0 * target;
    if !inside || alpha <= 0.0 {
        return Err(Error::InvalidWord(format!(
            "S_{u} F is not certified inside O (distance {d:e})"
        )));
    }
    let rho = ifs.r_min() * alpha / 2.0;
    Ok(SoscConstants {
        u: u.clone(),
        alpha,
        rho,
        lambda_min: (ifs.big_r / rho).max(1.0),
    })
}

/// Constants for the preset's stored word `u`.
pub fn preset_sosc(ifs: &Ifs) -> Result<SoscConstants> {
    let u = ifs
        .sosc_word
        .clone()
        .ok_or_else(|| Error::InvalidWord(format!("no word u stored for '{}'", ifs.name)))?;
    sosc_constants(ifs, &u)
}

/// Cylinder tree suitable for neighbor tests at scale `eps`.
pub fn neighbor_tree(ifs: &Ifs, eps: f64) -> IfsTree {
    IfsTree::new(ifs, eps / 50.0)
}

/// Words of `Σ(lambda eps) \ {w}` whose cylinders may come within `2 eps` of
/// `S_w F`: a certified superset of the true neighbors, with slack
/// `2 * tree.source_error()`. The relation is symmetric.
pub fn neighbors(ifs: &Ifs, tree: &IfsTree, eps: f64, lambda: f64, w: &Word) -> Result<Vec<Word>> {
    let scale = lambda * eps;
    check_eps(ifs, scale)?;
    let rw = ifs.word_ratio(w);
    let parent = if w.len() >= 1 {
        ifs.word_ratio(&w.prefix(w.len() - 1))
    } else {
        1.0
    };
    if w.is_empty() || !(ifs.big_r * rw < scale && scale <= ifs.big_r * parent) {
        return Err(Error::Domain(format!("{w} is not in Σ({scale})")));
    }
    let wn = tree.root_node(w);
    let (cw, rw_ball) = tree.ball(&wn);
    let thr = 2.0 * eps;
    let slack = thr + 2.0 * tree.source_error();
    let mut out = Vec::new();
    let mut stack: Vec<(CylNode, f64)> = vec![(tree.root_node(&Word::empty()), 1.0)];
    let ratios = ifs.ratios();
    while let Some((node, r)) = stack.pop() {
        for (i, &ri) in ratios.iter().enumerate() {
            let c = tree.child(&node, i);
            let (cc, rc) = tree.ball(&c);
            if cc.dist(cw) - rc - rw_ball > slack {
                continue;
            }
            let rc_ratio = r * ri;
            if ifs.big_r * rc_ratio < scale {
                let word = tree.word_of(&c);
                if &word == w {
                    continue;
                }
                // Canonical argument order keeps the test symmetric.
                let hit = if word < *w {
                    may_be_within(tree, &[c], &[wn], thr)
                } else {
                    may_be_within(tree, &[wn], &[c], thr)
                };
                if hit {
                    out.push(word);
                }
            } else {
                stack.push((c, rc_ratio));
            }
        }
    }
    out.sort();
    Ok(out)
}
