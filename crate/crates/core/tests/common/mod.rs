//! Reference oracles shared by the integration tests. Each one is written
//! independently of the library code it checks.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use orbitcalc_core::groupexpr::GroupExpr;
use orbitcalc_core::polysym::HomogPoly;
use orbitcalc_core::reebmodel::{ReebModel, VertexKind};
use orbitcalc_core::wreath::WreathElement;

// ---------------------------------------------------------------------------
// S3 as permutations of {0,1,2}

pub type Perm = [usize; 3];

pub const R: Perm = [1, 2, 0];
pub const S: Perm = [0, 2, 1];
pub const E: Perm = [0, 1, 2];

/// `(p ∘ q)(x) = p(q(x))`.
pub fn compose(p: Perm, q: Perm) -> Perm {
    [p[q[0]], p[q[1]], p[q[2]]]
}

/// Library index `i + 3j` names `r^i s^j`.
pub fn s3_perm(index: usize) -> Perm {
    let (i, j) = (index % 3, index / 3);
    let mut p = E;
    for _ in 0..i {
        p = compose(p, R);
    }
    if j == 1 {
        p = compose(p, S);
    }
    p
}

pub fn sign(p: Perm) -> i8 {
    let mut inversions = 0;
    for a in 0..3 {
        for b in a + 1..3 {
            if p[a] > p[b] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

// ---------------------------------------------------------------------------
// Faithful actions of wreath products
//
// `(g; a)` acts on `Z × G` by `(j, x) ↦ (j − a, g_{(j−a) mod m} · x)`; this
// left action is faithful and turns products into composition.

pub fn big(x: &BigInt) -> i64 {
    x.to_i64().expect("small integer")
}

fn modp(a: i64, m: i64) -> usize {
    a.rem_euclid(m) as usize
}

/// Z wr_m Z (or Z wr_{m,n} Z² when `n` is given) acting on integer points.
pub fn act_int(x: &WreathElement, m: usize, n: Option<usize>, point: (i64, i64, i64)) -> (i64, i64, i64) {
    let (j, k, v) = point;
    match (x, n) {
        (WreathElement::Wr { coords, shift }, None) => {
            let a = big(shift);
            let c = &coords[modp(j - a, m as i64)];
            let WreathElement::Int(g) = c else { panic!("integer base expected") };
            (j - a, k, big(g) + v)
        }
        (WreathElement::Wr2 { coords, shift }, Some(n)) => {
            let (a, b) = (big(&shift[0]), big(&shift[1]));
            let (i, l) = (modp(j - a, m as i64), modp(k - b, n as i64));
            let WreathElement::Int(g) = &coords[i * n + l] else { panic!("integer base expected") };
            (j - a, k - b, big(g) + v)
        }
        _ => panic!("unexpected element {x:?}"),
    }
}

/// S3 wr_m Z acting on `Z × S3`.
pub fn act_s3(x: &WreathElement, m: usize, point: (i64, Perm)) -> (i64, Perm) {
    let (j, p) = point;
    let WreathElement::Wr { coords, shift } = x else { panic!("wreath element expected") };
    let a = big(shift);
    let WreathElement::Fin(g) = coords[modp(j - a, m as i64)] else { panic!("finite base expected") };
    (j - a, compose(s3_perm(g), p))
}

pub fn int_points(m: usize, n: Option<usize>) -> Vec<(i64, i64, i64)> {
    let rows = m as i64;
    let cols = n.unwrap_or(1) as i64;
    let mut out = Vec::new();
    for j in -rows..2 * rows {
        for k in -cols..2 * cols {
            out.push((j, k, 0));
        }
    }
    out
}

pub fn s3_points(m: usize) -> Vec<(i64, Perm)> {
    (-(m as i64)..2 * m as i64).flat_map(|j| [(j, E), (j, R), (j, S)]).collect()
}

// ---------------------------------------------------------------------------
// Group expressions

/// Rank of the center, counted directly on the unnormalized expression tree.
pub fn center_rank_oracle(e: &GroupExpr) -> u64 {
    match e {
        GroupExpr::Unit | GroupExpr::Zmod(_) => 0,
        GroupExpr::Z => 1,
        GroupExpr::Prod(fs) => fs.iter().map(center_rank_oracle).sum(),
        GroupExpr::WrZ(a, _) => center_rank_oracle(a) + 1,
        GroupExpr::WrZ2(a, _, _) => center_rank_oracle(a) + 2,
        other => panic!("no center oracle for {other}"),
    }
}

/// Number of `Z` letters in the word, with `wr_{m,n} Z²` contributing two.
pub fn z_letters(e: &GroupExpr) -> u64 {
    match e {
        GroupExpr::Unit | GroupExpr::Zmod(_) => 0,
        GroupExpr::Z => 1,
        GroupExpr::Prod(fs) => fs.iter().map(z_letters).sum(),
        GroupExpr::WrZ(a, _) | GroupExpr::WrZmod(a, _) => z_letters(a) + u64::from(matches!(e, GroupExpr::WrZ(..))),
        GroupExpr::WrZ2(a, _, _) => z_letters(a) + 2,
        GroupExpr::WrZmod2(a, _, _) => z_letters(a),
        GroupExpr::DiagQuot(_) => panic!("not a word"),
    }
}

// ---------------------------------------------------------------------------
// Rooted decorated trees

fn label(model: &ReebModel, v: usize) -> String {
    let vx = &model.vertices[v];
    let kind = match &vx.kind {
        VertexKind::Boundary => "B".to_string(),
        VertexKind::NonDegExtreme => "N".to_string(),
        VertexKind::DegExtreme { m, dihedral } => format!("D{m}{dihedral}"),
        VertexKind::CriticalLeaf { crit_points } => {
            let mut c = crit_points.clone();
            c.sort_unstable();
            format!("C{c:?}")
        }
    };
    format!("{kind}|{:?}|{}", vx.level, model.x.contains(&v))
}

fn children(model: &ReebModel, v: usize, parent: Option<usize>) -> Vec<(usize, usize)> {
    let mut skipped = false;
    let mut out = Vec::new();
    for (e, &(a, b)) in model.edges.iter().enumerate() {
        if a != v && b != v {
            continue;
        }
        if Some(e) == parent && !skipped {
            skipped = true;
            continue;
        }
        let w = if a == v { b } else { a };
        out.push((w, e));
    }
    out
}

/// Backtracking isomorphism test between the rooted trees hanging below
/// `(v1, parent1)` in `m1` and `(v2, parent2)` in `m2`.
pub fn trees_isomorphic(
    m1: &ReebModel,
    v1: usize,
    p1: Option<usize>,
    m2: &ReebModel,
    v2: usize,
    p2: Option<usize>,
) -> bool {
    if label(m1, v1) != label(m2, v2) {
        return false;
    }
    let c1 = children(m1, v1, p1);
    let c2 = children(m2, v2, p2);
    if c1.len() != c2.len() {
        return false;
    }
    let mut used = vec![false; c2.len()];
    match_children(m1, &c1, m2, &c2, &mut used, 0)
}

fn match_children(
    m1: &ReebModel,
    c1: &[(usize, usize)],
    m2: &ReebModel,
    c2: &[(usize, usize)],
    used: &mut [bool],
    i: usize,
) -> bool {
    if i == c1.len() {
        return true;
    }
    let (w1, e1) = c1[i];
    for j in 0..c2.len() {
        if used[j] {
            continue;
        }
        let (w2, e2) = c2[j];
        if trees_isomorphic(m1, w1, Some(e1), m2, w2, Some(e2)) {
            used[j] = true;
            if match_children(m1, c1, m2, c2, used, i + 1) {
                return true;
            }
            used[j] = false;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Polynomials

/// Largest `m ≤ max_m` such that rotation by `2π/m` fixes `g` numerically,
/// or `None` when a generic irrational angle also fixes it.
pub fn rotation_order_numeric(g: &HomogPoly, max_m: u64) -> Option<u64> {
    let residual = |theta: f64| -> f64 {
        let (s, c) = theta.sin_cos();
        (0..64)
            .map(|i| {
                let phi = i as f64 * 0.0981747704 + 0.123;
                let (x, y) = (phi.cos(), phi.sin());
                let scale = 1.0 + g.eval(x, y).abs();
                (g.eval(c * x - s * y, s * x + c * y) - g.eval(x, y)).abs() / scale
            })
            .fold(0.0, f64::max)
    };
    if residual(1.0) < 1e-9 {
        return None;
    }
    (1..=max_m).rev().find(|&m| residual(std::f64::consts::TAU / m as f64) < 1e-9)
}

/// Whether some reflection across a line fixes `g`, scanning candidate axes
/// through the real roots and their bisectors numerically.
pub fn has_reflection_numeric(g: &HomogPoly) -> bool {
    let reflect_residual = |alpha: f64| -> f64 {
        let (s2, c2) = (2.0 * alpha).sin_cos();
        (0..64)
            .map(|i| {
                let phi = i as f64 * 0.0981747704 + 0.321;
                let (x, y) = (phi.cos(), phi.sin());
                let (rx, ry) = (c2 * x + s2 * y, s2 * x - c2 * y);
                let scale = 1.0 + g.eval(x, y).abs();
                (g.eval(rx, ry) - g.eval(x, y)).abs() / scale
            })
            .fold(0.0, f64::max)
    };
    // A reflection axis of an invariant form is a critical direction of
    // g restricted to the circle; search the derivative's sign changes.
    let n = 20_000;
    let h = |t: f64| {
        let eps = 1e-6;
        g.eval((t + eps).cos(), (t + eps).sin()) - g.eval((t - eps).cos(), (t - eps).sin())
    };
    let mut candidates = Vec::new();
    for i in 0..n {
        let a = std::f64::consts::PI * i as f64 / n as f64;
        let b = std::f64::consts::PI * (i + 1) as f64 / n as f64;
        let (ha, hb) = (h(a), h(b));
        if ha == 0.0 || ha.signum() != hb.signum() {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if h(lo).signum() == h(mid).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            candidates.push(0.5 * (lo + hi));
        }
    }
    if candidates.is_empty() {
        candidates.push(0.0);
    }
    candidates.iter().any(|&a| reflect_residual(a) < 1e-7)
}

/// Counts of a model's vertex kinds, keyed by a short tag.
pub fn kind_census(model: &ReebModel) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for v in &model.vertices {
        let tag = match v.kind {
            VertexKind::Boundary => "boundary",
            VertexKind::NonDegExtreme => "nondeg",
            VertexKind::DegExtreme { .. } => "deg",
            VertexKind::CriticalLeaf { .. } => "leaf",
        };
        *out.entry(tag).or_insert(0) += 1;
    }
    out
}
