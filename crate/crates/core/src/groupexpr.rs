//! Symbolic groups built from `1`, `Z` and `Z_m` by products and wreath constructors.
//!
//! Every operation works on the normal form returned by [`normalize`]. The text
//! format is the one printed by `Display` and accepted by [`GroupExpr::parse`]:
//! `1`, `Z`, `Z_m`, `(A x B)`, `(A wr[m] Z)`, `(A wr[m,n] Z2)`, `(A wr Z_m)`,
//! `(A wr (Z_m x Z_n))` and `diag((A wr[m] Z), (B wr[n] Z))`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::GroupError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupExpr {
    Unit,
    Z,
    Zmod(u64),
    Prod(Vec<GroupExpr>),
    /// `A wr_m Z`
    WrZ(Box<GroupExpr>, u64),
    /// `A wr_{m,n} Z²`
    WrZ2(Box<GroupExpr>, u64, u64),
    /// `A wr Z_m`
    WrZmod(Box<GroupExpr>, u64),
    /// `A wr (Z_m × Z_n)`
    WrZmod2(Box<GroupExpr>, u64, u64),
    /// `(Π Bᵢ wr_{mᵢ} Z) / ⟨(γ₁,…,γ_k)⟩`, the quotient by the diagonal Garside element.
    DiagQuot(Vec<(GroupExpr, u64)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupFamily {
    #[serde(rename = "ccZ")]
    CcZ,
    #[serde(rename = "ccB")]
    CcB,
    #[serde(rename = "clsBt")]
    ClsBt,
    #[serde(rename = "ccP")]
    CcP,
    #[serde(rename = "clsGt")]
    ClsGt,
    #[serde(rename = "ccBprime")]
    CcBprime,
}

impl GroupFamily {
    pub const ALL: [GroupFamily; 6] = [
        GroupFamily::CcZ,
        GroupFamily::CcB,
        GroupFamily::ClsBt,
        GroupFamily::CcP,
        GroupFamily::ClsGt,
        GroupFamily::CcBprime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GroupFamily::CcZ => "ccZ",
            GroupFamily::CcB => "ccB",
            GroupFamily::ClsBt => "clsBt",
            GroupFamily::CcP => "ccP",
            GroupFamily::ClsGt => "clsGt",
            GroupFamily::CcBprime => "ccBprime",
        }
    }
}

impl FromStr for GroupFamily {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GroupFamily::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| GroupError::UnknownFamily(s.to_string()))
    }
}

impl fmt::Display for GroupFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Order of a group: finite cardinality or infinite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Order {
    Finite(num_bigint::BigUint),
    Infinite,
}

impl Order {
    pub fn is_finite(&self) -> bool {
        matches!(self, Order::Finite(_))
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => f.write_str("infinite"),
        }
    }
}

impl GroupExpr {
    pub fn zmod(m: u64) -> Self {
        GroupExpr::Zmod(m)
    }

    pub fn prod(factors: impl IntoIterator<Item = GroupExpr>) -> Self {
        GroupExpr::Prod(factors.into_iter().collect())
    }

    pub fn wr_z(inner: GroupExpr, m: u64) -> Self {
        GroupExpr::WrZ(Box::new(inner), m)
    }

    pub fn wr_z2(inner: GroupExpr, m: u64, n: u64) -> Self {
        GroupExpr::WrZ2(Box::new(inner), m, n)
    }

    pub fn wr_zmod(inner: GroupExpr, m: u64) -> Self {
        GroupExpr::WrZmod(Box::new(inner), m)
    }

    pub fn wr_zmod2(inner: GroupExpr, m: u64, n: u64) -> Self {
        GroupExpr::WrZmod2(Box::new(inner), m, n)
    }

    /// Free abelian group of rank `k`, already normalized.
    pub fn free_abelian(k: usize) -> Self {
        normalize(&GroupExpr::Prod(vec![GroupExpr::Z; k]))
    }

    /// `k` copies of `self` as a product, normalized.
    pub fn power(&self, k: u64) -> Self {
        normalize(&GroupExpr::Prod(vec![self.clone(); k as usize]))
    }

    pub fn parse(text: &str) -> Result<Self, GroupError> {
        Parser::new(text)?.parse_all()
    }

    pub fn is_unit(&self) -> bool {
        matches!(normalize(self), GroupExpr::Unit)
    }

    /// Number of constructor nestings, counting `Z` and `Z_m` as one.
    pub fn depth(&self) -> usize {
        match self {
            GroupExpr::Unit => 0,
            GroupExpr::Z | GroupExpr::Zmod(_) => 1,
            GroupExpr::Prod(fs) => 1 + fs.iter().map(GroupExpr::depth).max().unwrap_or(0),
            GroupExpr::WrZ(a, _)
            | GroupExpr::WrZ2(a, _, _)
            | GroupExpr::WrZmod(a, _)
            | GroupExpr::WrZmod2(a, _, _) => 1 + a.depth(),
            GroupExpr::DiagQuot(es) => 2 + es.iter().map(|(b, _)| b.depth()).max().unwrap_or(0),
        }
    }

    fn validate_params(&self) -> Result<(), GroupError> {
        let bad = |m: u64| if m == 0 { Err(GroupError::ZeroParameter) } else { Ok(()) };
        match self {
            GroupExpr::Unit | GroupExpr::Z => Ok(()),
            GroupExpr::Zmod(m) => bad(*m),
            GroupExpr::Prod(fs) => fs.iter().try_for_each(GroupExpr::validate_params),
            GroupExpr::WrZ(a, m) | GroupExpr::WrZmod(a, m) => {
                bad(*m)?;
                a.validate_params()
            }
            GroupExpr::WrZ2(a, m, n) | GroupExpr::WrZmod2(a, m, n) => {
                bad(*m)?;
                bad(*n)?;
                a.validate_params()
            }
            GroupExpr::DiagQuot(es) => es.iter().try_for_each(|(b, m)| {
                bad(*m)?;
                b.validate_params()
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Normal form

pub fn normalize(e: &GroupExpr) -> GroupExpr {
    match e {
        GroupExpr::Unit | GroupExpr::Z => e.clone(),
        GroupExpr::Zmod(m) => {
            if *m <= 1 {
                GroupExpr::Unit
            } else {
                e.clone()
            }
        }
        GroupExpr::Prod(fs) => normalize_prod(fs.iter().map(normalize).collect()),
        GroupExpr::WrZ(a, m) => {
            let a = normalize(a);
            match (a, *m) {
                (GroupExpr::Unit, _) => GroupExpr::Z,
                (a, 1) => normalize_prod(vec![a, GroupExpr::Z]),
                (a, m) => GroupExpr::WrZ(Box::new(a), m),
            }
        }
        GroupExpr::WrZ2(a, m, n) => {
            let a = normalize(a);
            match (a, *m, *n) {
                (GroupExpr::Unit, _, _) => GroupExpr::Prod(vec![GroupExpr::Z, GroupExpr::Z]),
                (a, 1, 1) => normalize_prod(vec![a, GroupExpr::Z, GroupExpr::Z]),
                (a, m, n) => GroupExpr::WrZ2(Box::new(a), m, n),
            }
        }
        GroupExpr::WrZmod(a, m) => {
            let a = normalize(a);
            match (a, *m) {
                (GroupExpr::Unit, m) => normalize(&GroupExpr::Zmod(m)),
                (a, 1) => a,
                (a, m) => GroupExpr::WrZmod(Box::new(a), m),
            }
        }
        GroupExpr::WrZmod2(a, m, n) => {
            let a = normalize(a);
            match (a, *m, *n) {
                (GroupExpr::Unit, m, n) => {
                    normalize(&GroupExpr::Prod(vec![GroupExpr::Zmod(m), GroupExpr::Zmod(n)]))
                }
                (a, 1, 1) => a,
                (a, 1, k) | (a, k, 1) => GroupExpr::WrZmod(Box::new(a), k),
                (a, m, n) => GroupExpr::WrZmod2(Box::new(a), m, n),
            }
        }
        GroupExpr::DiagQuot(es) => normalize_diag(es),
    }
}

fn normalize_prod(factors: Vec<GroupExpr>) -> GroupExpr {
    let mut flat = Vec::with_capacity(factors.len());
    for f in factors {
        match f {
            GroupExpr::Unit => {}
            GroupExpr::Prod(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    match flat.len() {
        0 => GroupExpr::Unit,
        1 => flat.pop().expect("one factor"),
        _ => {
            let mut keyed: Vec<(String, GroupExpr)> =
                flat.into_iter().map(|f| (f.to_string(), f)).collect();
            keyed.sort_by(|a, b| a.0.cmp(&b.0));
            GroupExpr::Prod(keyed.into_iter().map(|(_, f)| f).collect())
        }
    }
}

fn normalize_diag(entries: &[(GroupExpr, u64)]) -> GroupExpr {
    let mut es: Vec<(GroupExpr, u64)> = entries.iter().map(|(b, m)| (normalize(b), *m)).collect();
    match es.len() {
        0 => GroupExpr::Unit,
        1 => {
            let (b, m) = es.pop().expect("one entry");
            normalize(&GroupExpr::wr_zmod(b, m))
        }
        k => {
            if es.iter().all(|(_, m)| *m == 1) {
                // (Π Bᵢ × Z)/diag ≅ Π Bᵢ × Z^{k-1}
                let mut fs: Vec<GroupExpr> = es.into_iter().map(|(b, _)| b).collect();
                fs.extend(std::iter::repeat_n(GroupExpr::Z, k - 1));
                return normalize_prod(fs);
            }
            if es.iter().all(|(b, _)| *b == GroupExpr::Unit) {
                let g = es.iter().fold(0u64, |g, (_, m)| g.gcd(m));
                let mut fs = vec![GroupExpr::Z; k - 1];
                fs.push(GroupExpr::Zmod(g));
                return normalize(&GroupExpr::Prod(fs));
            }
            es.sort_by(|a, b| (a.0.to_string(), a.1).cmp(&(b.0.to_string(), b.1)));
            GroupExpr::DiagQuot(es)
        }
    }
}

// ---------------------------------------------------------------------------
// Invariants

/// First Betti number counted on the word: each `Z` symbol contributes one,
/// `wr_m Z` contributes one and `wr_{m,n} Z²` contributes two.
pub fn beta1(e: &GroupExpr) -> Result<u64, GroupError> {
    beta1_nf(&normalize(e))
}

fn beta1_nf(e: &GroupExpr) -> Result<u64, GroupError> {
    match e {
        GroupExpr::Unit => Ok(0),
        GroupExpr::Z => Ok(1),
        GroupExpr::Prod(fs) => fs.iter().map(beta1_nf).sum(),
        GroupExpr::WrZ(a, _) => Ok(beta1_nf(a)? + 1),
        GroupExpr::WrZ2(a, _, _) => Ok(beta1_nf(a)? + 2),
        GroupExpr::DiagQuot(es) if is_torsion_free_nf(e) => {
            let mut total = 0;
            for (b, _) in es {
                total += beta1_nf(b)? + 1;
            }
            Ok(total - 1)
        }
        _ => Err(GroupError::Torsion(e.to_string())),
    }
}

/// Rank of `H1(G; Q)`; defined for every expression, torsion or not.
pub fn rational_rank(e: &GroupExpr) -> u64 {
    rational_rank_nf(&normalize(e))
}

fn rational_rank_nf(e: &GroupExpr) -> u64 {
    match e {
        GroupExpr::Unit | GroupExpr::Zmod(_) => 0,
        GroupExpr::Z => 1,
        GroupExpr::Prod(fs) => fs.iter().map(rational_rank_nf).sum(),
        GroupExpr::WrZ(a, _) => rational_rank_nf(a) + 1,
        GroupExpr::WrZ2(a, _, _) => rational_rank_nf(a) + 2,
        GroupExpr::WrZmod(a, _) | GroupExpr::WrZmod2(a, _, _) => rational_rank_nf(a),
        GroupExpr::DiagQuot(es) => es.iter().map(|(b, _)| rational_rank_nf(b) + 1).sum::<u64>() - 1,
    }
}

/// Rank of the center, by the recursion `Z(G wr_m Z) ≅ Z(G) × Z`.
pub fn center_rank(e: &GroupExpr) -> Result<u64, GroupError> {
    center_rank_nf(&normalize(e))
}

fn center_rank_nf(e: &GroupExpr) -> Result<u64, GroupError> {
    match e {
        GroupExpr::Unit => Ok(0),
        GroupExpr::Z => Ok(1),
        GroupExpr::Prod(fs) => fs.iter().map(center_rank_nf).sum(),
        GroupExpr::WrZ(a, _) => Ok(center_rank_nf(a)? + 1),
        GroupExpr::WrZ2(a, _, _) => Ok(center_rank_nf(a)? + 2),
        GroupExpr::DiagQuot(es) if is_torsion_free_nf(e) => {
            // Π Z(Bᵢ wr Z) contains the diagonal Garside element; one rank is lost.
            let mut total = 0;
            for (b, _) in es {
                total += center_rank_nf(b)? + 1;
            }
            Ok(total - 1)
        }
        _ => Err(GroupError::Torsion(e.to_string())),
    }
}

/// Abelianization of a torsion-free word: `Z^{β₁}`, computed through the
/// `γ`/`δ` maps, i.e. `(G wr_m Z)^ab = G^ab × Z`.
pub fn abelianization(e: &GroupExpr) -> Result<GroupExpr, GroupError> {
    fn ab(e: &GroupExpr) -> Result<GroupExpr, GroupError> {
        match e {
            GroupExpr::Unit => Ok(GroupExpr::Unit),
            GroupExpr::Z => Ok(GroupExpr::Z),
            GroupExpr::Prod(fs) => Ok(GroupExpr::Prod(fs.iter().map(ab).collect::<Result<_, _>>()?)),
            GroupExpr::WrZ(a, _) => Ok(GroupExpr::prod([ab(a)?, GroupExpr::Z])),
            GroupExpr::WrZ2(a, _, _) => Ok(GroupExpr::prod([ab(a)?, GroupExpr::Z, GroupExpr::Z])),
            GroupExpr::DiagQuot(es) if is_torsion_free_nf(e) => {
                let mut fs = Vec::new();
                for (b, _) in es {
                    fs.push(ab(b)?);
                }
                fs.extend(std::iter::repeat_n(GroupExpr::Z, es.len() - 1));
                Ok(GroupExpr::Prod(fs))
            }
            _ => Err(GroupError::Torsion(e.to_string())),
        }
    }
    Ok(normalize(&ab(&normalize(e))?))
}

pub fn is_torsion_free(e: &GroupExpr) -> bool {
    is_torsion_free_nf(&normalize(e))
}

fn is_torsion_free_nf(e: &GroupExpr) -> bool {
    match e {
        GroupExpr::Unit | GroupExpr::Z => true,
        GroupExpr::Zmod(_) | GroupExpr::WrZmod(..) | GroupExpr::WrZmod2(..) => false,
        GroupExpr::Prod(fs) => fs.iter().all(is_torsion_free_nf),
        GroupExpr::WrZ(a, _) | GroupExpr::WrZ2(a, _, _) => is_torsion_free_nf(a),
        // x^n = γ̂^k forces n | k exactly when gcd(mᵢ) = 1.
        GroupExpr::DiagQuot(es) => {
            es.iter().fold(0u64, |g, (_, m)| g.gcd(m)) == 1
                && es.iter().all(|(b, _)| is_torsion_free_nf(b))
        }
    }
}

pub fn order(e: &GroupExpr) -> Order {
    use num_bigint::BigUint;
    fn go(e: &GroupExpr) -> Option<BigUint> {
        match e {
            GroupExpr::Unit => Some(BigUint::from(1u32)),
            GroupExpr::Zmod(m) => Some(BigUint::from(*m)),
            GroupExpr::Prod(fs) => fs.iter().try_fold(BigUint::from(1u32), |acc, f| Some(acc * go(f)?)),
            GroupExpr::WrZmod(c, m) => Some(go(c)?.pow(*m as u32) * BigUint::from(*m)),
            GroupExpr::WrZmod2(c, m, n) => {
                Some(go(c)?.pow((m * n) as u32) * BigUint::from(m * n))
            }
            GroupExpr::Z | GroupExpr::WrZ(..) | GroupExpr::WrZ2(..) | GroupExpr::DiagQuot(_) => None,
        }
    }
    match go(&normalize(e)) {
        Some(n) => Order::Finite(n),
        None => Order::Infinite,
    }
}

pub fn in_family(e: &GroupExpr, f: GroupFamily) -> bool {
    in_family_nf(&normalize(e), f)
}

fn in_family_nf(e: &GroupExpr, f: GroupFamily) -> bool {
    use GroupExpr as G;
    use GroupFamily as F;
    match f {
        F::CcZ => match e {
            G::Unit | G::Z => true,
            G::Prod(fs) => fs.iter().all(|x| *x == G::Z),
            _ => false,
        },
        F::CcB | F::ClsBt => match e {
            G::Unit | G::Z => true,
            G::Prod(fs) => fs.iter().all(|x| in_family_nf(x, f)),
            G::WrZ(a, m) => (f == F::CcB || *m == 2) && in_family_nf(a, f),
            _ => false,
        },
        F::CcP | F::ClsGt => match e {
            G::Unit => true,
            G::Zmod(m) => f == F::CcP || *m == 2,
            G::Prod(fs) => fs.iter().all(|x| in_family_nf(x, f)),
            G::WrZmod(a, m) => (f == F::CcP || *m == 2) && in_family_nf(a, f),
            _ => false,
        },
        // A wr_{1,1} Z² = A × Z² and 1 wr_{m,n} Z² = Z² are rewritten away,
        // so a ccB product with two free Z factors also belongs here.
        F::CcBprime => match e {
            G::WrZ2(a, _, _) => in_family_nf(a, F::CcB),
            G::Prod(fs) => {
                fs.iter().filter(|x| **x == G::Z).count() >= 2 && in_family_nf(e, F::CcB)
            }
            _ => false,
        },
    }
}

// ---------------------------------------------------------------------------
// Enumeration

/// Every normal form in `f` reachable with at most `max_depth` constructor
/// nestings, wreath parameters in `1..=max_param` and product arity at most
/// `max(2, max_param)`. Each normal form appears once, in sorted order.
pub fn enumerate_family(f: GroupFamily, max_depth: usize, max_param: u64) -> Vec<GroupExpr> {
    let arity = max_param.max(2) as usize;
    let base_family = match f {
        GroupFamily::CcBprime => GroupFamily::CcB,
        other => other,
    };
    let mut levels: Vec<BTreeSet<GroupExpr>> = Vec::new();
    let mut current: BTreeSet<GroupExpr> = BTreeSet::from([GroupExpr::Unit]);
    levels.push(current.clone());
    let inner_depth = if f == GroupFamily::CcBprime { max_depth.saturating_sub(1) } else { max_depth };
    for _ in 1..=inner_depth {
        let prev: Vec<GroupExpr> = current.iter().cloned().collect();
        let mut next = current.clone();
        for atom in atoms(base_family, max_param) {
            next.insert(atom);
        }
        for a in &prev {
            for m in 1..=max_param {
                let w = match base_family {
                    GroupFamily::CcB => Some(GroupExpr::wr_z(a.clone(), m)),
                    GroupFamily::ClsBt if m == 2 => Some(GroupExpr::wr_z(a.clone(), m)),
                    GroupFamily::CcP => Some(GroupExpr::wr_zmod(a.clone(), m)),
                    GroupFamily::ClsGt if m == 2 => Some(GroupExpr::wr_zmod(a.clone(), m)),
                    _ => None,
                };
                if let Some(w) = w {
                    next.insert(normalize(&w));
                }
            }
        }
        let nonunit: Vec<&GroupExpr> = prev.iter().filter(|x| **x != GroupExpr::Unit).collect();
        for k in 2..=arity {
            for combo in multisets(nonunit.len(), k) {
                let p = GroupExpr::Prod(combo.iter().map(|&i| nonunit[i].clone()).collect());
                next.insert(normalize(&p));
            }
        }
        next.retain(|x| in_family_nf(x, base_family));
        current = next;
        levels.push(current.clone());
    }
    if f == GroupFamily::CcBprime {
        let mut out = BTreeSet::new();
        if max_depth >= 1 {
            for a in &current {
                for m in 1..=max_param {
                    for n in 1..=max_param {
                        out.insert(normalize(&GroupExpr::wr_z2(a.clone(), m, n)));
                    }
                }
            }
        }
        for a in &current {
            if in_family_nf(a, GroupFamily::CcBprime) {
                out.insert(a.clone());
            }
        }
        out.retain(|x| in_family_nf(x, GroupFamily::CcBprime));
        return sort_by_text(out);
    }
    sort_by_text(current)
}

fn sort_by_text(set: BTreeSet<GroupExpr>) -> Vec<GroupExpr> {
    let mut v: Vec<(String, GroupExpr)> = set.into_iter().map(|e| (e.to_string(), e)).collect();
    v.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    v.into_iter().map(|(_, e)| e).collect()
}

fn atoms(f: GroupFamily, max_param: u64) -> Vec<GroupExpr> {
    match f {
        GroupFamily::CcZ | GroupFamily::CcB | GroupFamily::ClsBt | GroupFamily::CcBprime => {
            vec![GroupExpr::Z]
        }
        GroupFamily::CcP => (2..=max_param).map(GroupExpr::Zmod).collect(),
        GroupFamily::ClsGt if max_param >= 2 => vec![GroupExpr::Zmod(2)],
        GroupFamily::ClsGt => Vec::new(),
    }
}

/// Non-decreasing index sequences of length `k` over `0..n`.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Text form

impl fmt::Display for GroupExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupExpr::Unit => f.write_str("1"),
            GroupExpr::Z => f.write_str("Z"),
            GroupExpr::Zmod(m) => write!(f, "Z_{m}"),
            GroupExpr::Prod(fs) => {
                f.write_str("(")?;
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" x ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            GroupExpr::WrZ(a, m) => write!(f, "({a} wr[{m}] Z)"),
            GroupExpr::WrZ2(a, m, n) => write!(f, "({a} wr[{m},{n}] Z2)"),
            GroupExpr::WrZmod(a, m) => write!(f, "({a} wr Z_{m})"),
            GroupExpr::WrZmod2(a, m, n) => write!(f, "({a} wr (Z_{m} x Z_{n}))"),
            GroupExpr::DiagQuot(es) => {
                f.write_str("diag(")?;
                for (i, (b, m)) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "({b} wr[{m}] Z)")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for GroupExpr {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GroupExpr::parse(s)
    }
}

impl Serialize for GroupExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        GroupExpr::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Num(u64),
    Word(String),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, GroupError> {
        let mut toks = Vec::new();
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut i = 0;
        while i < chars.len() {
            let (at, c) = chars[i];
            match c {
                c if c.is_whitespace() => i += 1,
                '(' => {
                    toks.push((at, Tok::LParen));
                    i += 1;
                }
                ')' => {
                    toks.push((at, Tok::RParen));
                    i += 1;
                }
                '[' => {
                    toks.push((at, Tok::LBracket));
                    i += 1;
                }
                ']' => {
                    toks.push((at, Tok::RBracket));
                    i += 1;
                }
                ',' => {
                    toks.push((at, Tok::Comma));
                    i += 1;
                }
                '×' | '*' => {
                    toks.push((at, Tok::Word("x".into())));
                    i += 1;
                }
                c if c.is_ascii_digit() => {
                    let mut j = i;
                    while j < chars.len() && chars[j].1.is_ascii_digit() {
                        j += 1;
                    }
                    let s: String = chars[i..j].iter().map(|p| p.1).collect();
                    let n = s.parse().map_err(|_| GroupError::Parse {
                        pos: at,
                        msg: format!("number out of range: {s}"),
                    })?;
                    toks.push((at, Tok::Num(n)));
                    i = j;
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut j = i;
                    while j < chars.len() && (chars[j].1.is_ascii_alphanumeric() || chars[j].1 == '_') {
                        j += 1;
                    }
                    toks.push((at, Tok::Word(chars[i..j].iter().map(|p| p.1).collect())));
                    i = j;
                }
                other => {
                    return Err(GroupError::Parse { pos: at, msg: format!("unexpected character {other:?}") })
                }
            }
        }
        Ok(Parser { toks, pos: 0, len: text.len() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, GroupError> {
        Err(GroupError::Parse { pos: self.at(), msg: msg.into() })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), GroupError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected {want:?}")),
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(s)) if s == w)
    }

    fn number(&mut self) -> Result<u64, GroupError> {
        match self.peek() {
            Some(Tok::Num(0)) => self.err("parameters must be positive"),
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected a positive integer"),
        }
    }

    fn parse_all(mut self) -> Result<GroupExpr, GroupError> {
        let e = self.product()?;
        if self.pos < self.toks.len() {
            return self.err("trailing input");
        }
        e.validate_params()?;
        Ok(e)
    }

    fn product(&mut self) -> Result<GroupExpr, GroupError> {
        let first = self.wr_term()?;
        if !self.is_word("x") {
            return Ok(first);
        }
        let mut fs = vec![first];
        while self.is_word("x") {
            self.pos += 1;
            fs.push(self.wr_term()?);
        }
        Ok(GroupExpr::Prod(fs))
    }

    fn wr_term(&mut self) -> Result<GroupExpr, GroupError> {
        let mut e = self.primary()?;
        while self.is_word("wr") {
            self.pos += 1;
            e = self.wr_suffix(e)?;
        }
        Ok(e)
    }

    fn wr_suffix(&mut self, base: GroupExpr) -> Result<GroupExpr, GroupError> {
        match self.peek() {
            Some(Tok::LBracket) => {
                self.pos += 1;
                let m = self.number()?;
                if matches!(self.peek(), Some(Tok::Comma)) {
                    self.pos += 1;
                    let n = self.number()?;
                    self.expect(Tok::RBracket)?;
                    match self.next() {
                        Some(Tok::Word(w)) if w == "Z2" => Ok(GroupExpr::wr_z2(base, m, n)),
                        _ => self.err("expected Z2 after wr[m,n]"),
                    }
                } else {
                    self.expect(Tok::RBracket)?;
                    match self.next() {
                        Some(Tok::Word(w)) if w == "Z" => Ok(GroupExpr::wr_z(base, m)),
                        _ => self.err("expected Z after wr[m]"),
                    }
                }
            }
            Some(Tok::Word(w)) if w.starts_with("Z_") => {
                let m = self.zmod_word()?;
                Ok(GroupExpr::wr_zmod(base, m))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let m = self.zmod_word()?;
                if !self.is_word("x") {
                    return self.err("expected x in wr (Z_m x Z_n)");
                }
                self.pos += 1;
                let n = self.zmod_word()?;
                self.expect(Tok::RParen)?;
                Ok(GroupExpr::wr_zmod2(base, m, n))
            }
            _ => self.err("expected [m], Z_m or (Z_m x Z_n) after wr"),
        }
    }

    fn zmod_word(&mut self) -> Result<u64, GroupError> {
        match self.peek() {
            Some(Tok::Word(w)) if w.starts_with("Z_") => {
                let digits = &w[2..];
                if let Ok(m) = digits.parse::<u64>() {
                    self.pos += 1;
                    if m == 0 {
                        return self.err("parameters must be positive");
                    }
                    return Ok(m);
                }
                if digits.is_empty() {
                    self.pos += 1;
                    return self.number();
                }
                self.err(format!("bad cyclic group {w}"))
            }
            _ => self.err("expected Z_m"),
        }
    }

    fn primary(&mut self) -> Result<GroupExpr, GroupError> {
        match self.peek().cloned() {
            Some(Tok::Num(1)) => {
                self.pos += 1;
                Ok(GroupExpr::Unit)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.product()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Word(w)) if w == "Z" => {
                self.pos += 1;
                Ok(GroupExpr::Z)
            }
            Some(Tok::Word(w)) if w.starts_with("Z_") => Ok(GroupExpr::Zmod(self.zmod_word()?)),
            Some(Tok::Word(w)) if w == "diag" => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let mut entries = Vec::new();
                loop {
                    match self.wr_term()? {
                        GroupExpr::WrZ(b, m) => entries.push((*b, m)),
                        _ => return self.err("diag entries must have the form (B wr[m] Z)"),
                    }
                    if matches!(self.peek(), Some(Tok::Comma)) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(GroupExpr::DiagQuot(entries))
            }
            _ => self.err("expected 1, Z, Z_m, diag(...) or a parenthesized group"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> GroupExpr {
        normalize(&GroupExpr::parse(s).unwrap())
    }

    #[test]
    fn aliasing_rewrites() {
        assert_eq!(p("1 x Z"), GroupExpr::Z);
        assert_eq!(p("(1 wr[5] Z)"), GroupExpr::Z);
        assert_eq!(p("(Z x (Z x 1))"), GroupExpr::prod([GroupExpr::Z, GroupExpr::Z]));
        assert_eq!(p("Z_1"), GroupExpr::Unit);
        assert_eq!(p("(1 wr Z_3)"), GroupExpr::Zmod(3));
        assert_eq!(p("(Z wr[1] Z)"), p("(Z x Z)"));
    }

    #[test]
    fn parenthesised_wreath_inside_diag_is_kept_raw() {
        let e = p("diag((Z wr[2] Z), (1 wr[3] Z))");
        assert!(matches!(e, GroupExpr::DiagQuot(ref es) if es.len() == 2));
        assert_eq!(p(&e.to_string()), e);
    }

    #[test]
    fn diag_of_trivial_bases_is_abelian() {
        assert_eq!(p("diag((1 wr[2] Z), (1 wr[2] Z))"), p("Z x Z_2"));
        assert_eq!(p("diag((1 wr[2] Z), (1 wr[3] Z))"), GroupExpr::Z);
    }

    #[test]
    fn parse_errors_carry_position() {
        match GroupExpr::parse("(Z wr[0] Z)") {
            Err(GroupError::Parse { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        assert!(GroupExpr::parse("Z x").is_err());
        assert!(GroupExpr::parse("(Z wr[2] Q)").is_err());
    }
}
