//! Short exact sequences `A ↪ B ↠ C` of symbolic groups together with the
//! constructor history that produced them.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::SeqError;
use crate::groupexpr::{in_family, is_torsion_free, normalize, order, GroupExpr, GroupFamily};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeqExpr {
    pub kernel: GroupExpr,
    pub middle: GroupExpr,
    pub quotient: GroupExpr,
    pub build: Build,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Build {
    Triv,
    /// `mZ ↪ Z ↠ Z_m`
    Zseq { m: u64 },
    /// `mZ × nZ ↪ Z² ↠ Z_m × Z_n`
    Zseq2 { m: u64, n: u64 },
    Prod { factors: Vec<SeqExpr> },
    Wr { inner: Box<SeqExpr>, m: u64 },
    Wr2 { inner: Box<SeqExpr>, m: u64, n: u64 },
    GarsideQuot { of: Box<SeqExpr> },
    DiagGarside { of: Vec<SeqExpr> },
    /// Column `col` (0 kernels, 1 middles, 2 quotients) of the split diagram of `s` and `t`.
    Split { s: Box<SeqExpr>, t: Box<SeqExpr>, col: u8 },
    NaturalTop { of: Box<SeqExpr> },
    NaturalBottom { of: Box<SeqExpr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeqFamily {
    #[serde(rename = "ZZI")]
    Zzi,
    #[serde(rename = "ssZBtPt")]
    SsZBtPt,
    #[serde(rename = "ssZBP")]
    SsZBP,
    #[serde(rename = "gssZBP")]
    GssZBP,
}

impl SeqFamily {
    pub const ALL: [SeqFamily; 4] = [SeqFamily::Zzi, SeqFamily::SsZBtPt, SeqFamily::SsZBP, SeqFamily::GssZBP];

    pub fn name(self) -> &'static str {
        match self {
            SeqFamily::Zzi => "ZZI",
            SeqFamily::SsZBtPt => "ssZBtPt",
            SeqFamily::SsZBP => "ssZBP",
            SeqFamily::GssZBP => "gssZBP",
        }
    }
}

impl fmt::Display for SeqFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SeqFamily {
    type Err = SeqError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SeqFamily::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| SeqError::Script(format!("unknown sequence family `{s}`")))
    }
}

/// The 3×3 diagram of a split sequence: rows `s`, `s × t`, `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitRecord {
    pub top: SeqExpr,
    pub middle: SeqExpr,
    pub bottom: SeqExpr,
    pub columns: [SeqExpr; 3],
}

fn seq(kernel: GroupExpr, middle: GroupExpr, quotient: GroupExpr, build: Build) -> SeqExpr {
    SeqExpr { kernel: normalize(&kernel), middle: normalize(&middle), quotient: normalize(&quotient), build }
}

pub fn triv() -> SeqExpr {
    SeqExpr { kernel: GroupExpr::Unit, middle: GroupExpr::Unit, quotient: GroupExpr::Unit, build: Build::Triv }
}

/// `q_Z(m)`; `m = 0` is the trivial sequence.
pub fn z(m: u64) -> SeqExpr {
    if m == 0 {
        return triv();
    }
    seq(GroupExpr::Z, GroupExpr::Z, GroupExpr::Zmod(m), Build::Zseq { m })
}

pub fn z2(m: u64, n: u64) -> SeqExpr {
    assert!(m >= 1 && n >= 1, "q_Z(m,n) needs positive parameters");
    let zz = GroupExpr::prod([GroupExpr::Z, GroupExpr::Z]);
    seq(zz.clone(), zz, GroupExpr::prod([GroupExpr::Zmod(m), GroupExpr::Zmod(n)]), Build::Zseq2 { m, n })
}

/// Componentwise product; nested products are flattened and trivial factors dropped.
pub fn product(s: &SeqExpr, t: &SeqExpr) -> SeqExpr {
    product_all([s.clone(), t.clone()])
}

pub fn product_all(items: impl IntoIterator<Item = SeqExpr>) -> SeqExpr {
    let mut factors = Vec::new();
    for s in items {
        match s.build {
            Build::Triv => {}
            Build::Prod { factors: inner } => factors.extend(inner),
            _ => factors.push(s),
        }
    }
    match factors.len() {
        0 => triv(),
        1 => factors.pop().expect("one factor"),
        _ => seq(
            GroupExpr::Prod(factors.iter().map(|s| s.kernel.clone()).collect()),
            GroupExpr::Prod(factors.iter().map(|s| s.middle.clone()).collect()),
            GroupExpr::Prod(factors.iter().map(|s| s.quotient.clone()).collect()),
            Build::Prod { factors },
        ),
    }
}

/// `A^m × mZ ↪ B wr_m Z ↠ C wr Z_m`
pub fn wr(s: &SeqExpr, m: u64) -> SeqExpr {
    assert!(m >= 1, "wreath parameter must be positive");
    seq(
        GroupExpr::prod([s.kernel.power(m), GroupExpr::Z]),
        GroupExpr::wr_z(s.middle.clone(), m),
        GroupExpr::wr_zmod(s.quotient.clone(), m),
        Build::Wr { inner: Box::new(s.clone()), m },
    )
}

/// `A^{mn} × mZ × nZ ↪ B wr_{m,n} Z² ↠ C wr (Z_m × Z_n)`
pub fn wr2(s: &SeqExpr, m: u64, n: u64) -> SeqExpr {
    assert!(m >= 1 && n >= 1, "wreath parameters must be positive");
    seq(
        GroupExpr::prod([s.kernel.power(m * n), GroupExpr::Z, GroupExpr::Z]),
        GroupExpr::wr_z2(s.middle.clone(), m, n),
        GroupExpr::wr_zmod2(s.quotient.clone(), m, n),
        Build::Wr2 { inner: Box::new(s.clone()), m, n },
    )
}

/// Views `q_Z(m)` as `wr(triv, m)`; other builds are returned unchanged.
fn as_wreath(w: &SeqExpr) -> SeqExpr {
    match w.build {
        Build::Zseq { m } => wr(&triv(), m),
        _ => w.clone(),
    }
}

/// Bottom row of the Garside diagram: `A^m ↪ B wr Z_m ↠ C wr Z_m`
/// (and `A^{mn} ↪ B wr (Z_m×Z_n) ↠ C wr (Z_m×Z_n)` for the two-parameter case).
pub fn garside_quotient(w: &SeqExpr) -> Result<SeqExpr, SeqError> {
    let w = as_wreath(w);
    match &w.build {
        Build::Wr { inner, m } => Ok(seq(
            inner.kernel.power(*m),
            GroupExpr::wr_zmod(inner.middle.clone(), *m),
            GroupExpr::wr_zmod(inner.quotient.clone(), *m),
            Build::GarsideQuot { of: Box::new(w.clone()) },
        )),
        Build::Wr2 { inner, m, n } => Ok(seq(
            inner.kernel.power(m * n),
            GroupExpr::wr_zmod2(inner.middle.clone(), *m, *n),
            GroupExpr::wr_zmod2(inner.quotient.clone(), *m, *n),
            Build::GarsideQuot { of: Box::new(w.clone()) },
        )),
        other => Err(SeqError::Build(format!("Garside quotient needs a wreath build, got {}", BuildText(other)))),
    }
}

/// Quotient of `Π wᵢ` by the diagonal copy of the Garside elements.
pub fn diag_garside(ws: &[SeqExpr]) -> Result<SeqExpr, SeqError> {
    if ws.is_empty() {
        return Err(SeqError::Build("diagonal Garside quotient of an empty list".into()));
    }
    let ws: Vec<SeqExpr> = ws.iter().map(as_wreath).collect();
    let mut parts = Vec::new();
    for w in &ws {
        match &w.build {
            Build::Wr { inner, m } => parts.push(((**inner).clone(), *m)),
            other => {
                return Err(SeqError::Build(format!(
                    "diagonal Garside quotient needs wreath builds, got {}",
                    BuildText(other)
                )))
            }
        }
    }
    if ws.len() == 1 {
        let mut g = garside_quotient(&ws[0])?;
        g.build = Build::DiagGarside { of: ws };
        return Ok(g);
    }
    let mut kernel: Vec<GroupExpr> = parts.iter().map(|(s, m)| s.kernel.power(*m)).collect();
    kernel.extend(std::iter::repeat_n(GroupExpr::Z, parts.len() - 1));
    Ok(seq(
        GroupExpr::Prod(kernel),
        GroupExpr::DiagQuot(parts.iter().map(|(s, m)| (s.middle.clone(), *m)).collect()),
        GroupExpr::Prod(parts.iter().map(|(s, m)| GroupExpr::wr_zmod(s.quotient.clone(), *m)).collect()),
        Build::DiagGarside { of: ws },
    ))
}

pub fn split(s: &SeqExpr, t: &SeqExpr) -> SplitRecord {
    let col = |c: u8| {
        let pick = |x: &SeqExpr| match c {
            0 => x.kernel.clone(),
            1 => x.middle.clone(),
            _ => x.quotient.clone(),
        };
        seq(
            pick(s),
            GroupExpr::prod([pick(s), pick(t)]),
            pick(t),
            Build::Split { s: Box::new(s.clone()), t: Box::new(t.clone()), col: c },
        )
    };
    SplitRecord { top: s.clone(), middle: product(s, t), bottom: t.clone(), columns: [col(0), col(1), col(2)] }
}

/// `(A = A ↠ 1, 1 ↪ C = C)` for `u: A ↪ B ↠ C`.
pub fn natural(u: &SeqExpr) -> (SeqExpr, SeqExpr) {
    (
        seq(u.kernel.clone(), u.kernel.clone(), GroupExpr::Unit, Build::NaturalTop { of: Box::new(u.clone()) }),
        seq(GroupExpr::Unit, u.quotient.clone(), u.quotient.clone(), Build::NaturalBottom { of: Box::new(u.clone()) }),
    )
}

pub fn seq_in_family(s: &SeqExpr, f: SeqFamily) -> bool {
    match f {
        SeqFamily::Zzi => closure_member(s, &|m| m == 1),
        SeqFamily::SsZBtPt => closure_member(s, &|m| m == 1 || m == 2),
        SeqFamily::SsZBP => closure_member(s, &|_| true),
        SeqFamily::GssZBP => {
            in_family(&s.kernel, GroupFamily::CcZ)
                && in_family(&s.middle, GroupFamily::CcB)
                && in_family(&s.quotient, GroupFamily::CcP)
        }
    }
}

/// Closure of `triv` under products and `wr(·, m)` with `m` allowed by `ok`.
fn closure_member(s: &SeqExpr, ok: &dyn Fn(u64) -> bool) -> bool {
    match &s.build {
        Build::Triv => true,
        Build::Zseq { m } => ok(*m),
        Build::Zseq2 { m, n } => ok(*m) && ok(*n),
        Build::Prod { factors } => factors.iter().all(|x| closure_member(x, ok)),
        Build::Wr { inner, m } => ok(*m) && closure_member(inner, ok),
        _ => false,
    }
}

pub fn is_nearly_crystallographic(s: &SeqExpr) -> bool {
    in_family(&s.kernel, GroupFamily::CcZ) && order(&s.quotient).is_finite()
}

pub fn is_nearly_bieberbach(s: &SeqExpr) -> bool {
    is_nearly_crystallographic(s) && is_torsion_free(&s.middle)
}

impl SeqExpr {
    pub fn is_trivial(&self) -> bool {
        self.kernel == GroupExpr::Unit && self.middle == GroupExpr::Unit && self.quotient == GroupExpr::Unit
    }

    /// Same three groups, ignoring how they were built.
    pub fn same_groups(&self, other: &SeqExpr) -> bool {
        self.kernel == other.kernel && self.middle == other.middle && self.quotient == other.quotient
    }

    /// Nesting depth of wreath constructors in the build record.
    pub fn build_depth(&self) -> usize {
        match &self.build {
            Build::Triv => 0,
            Build::Zseq { .. } | Build::Zseq2 { .. } => 1,
            Build::Prod { factors } | Build::DiagGarside { of: factors } => {
                factors.iter().map(SeqExpr::build_depth).max().unwrap_or(0)
            }
            Build::Wr { inner, .. } | Build::Wr2 { inner, .. } => 1 + inner.build_depth(),
            Build::GarsideQuot { of } | Build::NaturalTop { of } | Build::NaturalBottom { of } => of.build_depth(),
            Build::Split { s, t, .. } => s.build_depth().max(t.build_depth()),
        }
    }

    pub fn parse(text: &str) -> Result<SeqExpr, SeqError> {
        parse_seq(text)
    }
}

/// Orders of the three groups after every `Z` is replaced by `Z_N`, with a
/// kernel copy `mZ` becoming `Z_{N/m}`. Returns `None` when a parameter does
/// not divide `n`. Exactness makes `|kernel|·|quotient| = |middle|`.
pub fn finite_shadow(s: &SeqExpr, n: u64) -> Option<(BigUint, BigUint, BigUint)> {
    let big = |x: u64| BigUint::from(x);
    let div = |m: u64| if m > 0 && n % m == 0 { Some(n / m) } else { None };
    Some(match &s.build {
        Build::Triv => (big(1), big(1), big(1)),
        Build::Zseq { m } => (big(div(*m)?), big(n), big(*m)),
        Build::Zseq2 { m, n: k } => (big(div(*m)? * div(*k)?), big(n * n), big(m * k)),
        Build::Prod { factors } => {
            let mut acc = (big(1), big(1), big(1));
            for f in factors {
                let (a, b, c) = finite_shadow(f, n)?;
                acc = (acc.0 * a, acc.1 * b, acc.2 * c);
            }
            acc
        }
        Build::Wr { inner, m } => {
            let (a, b, c) = finite_shadow(inner, n)?;
            let e = *m as u32;
            (a.pow(e) * big(div(*m)?), b.pow(e) * big(n), c.pow(e) * big(*m))
        }
        Build::Wr2 { inner, m, n: k } => {
            let (a, b, c) = finite_shadow(inner, n)?;
            let e = (m * k) as u32;
            (a.pow(e) * big(div(*m)? * div(*k)?), b.pow(e) * big(n * n), c.pow(e) * big(m * k))
        }
        Build::GarsideQuot { of } => match &of.build {
            Build::Wr { inner, m } => {
                let (a, b, c) = finite_shadow(inner, n)?;
                let e = *m as u32;
                (a.pow(e), b.pow(e) * big(*m), c.pow(e) * big(*m))
            }
            Build::Wr2 { inner, m, n: k } => {
                let (a, b, c) = finite_shadow(inner, n)?;
                let e = (m * k) as u32;
                (a.pow(e), b.pow(e) * big(m * k), c.pow(e) * big(m * k))
            }
            _ => return None,
        },
        Build::DiagGarside { of } => {
            // the diagonal Garside element has order N / gcd(mᵢ) in the shadow
            let mut acc = (big(1), big(1), big(1));
            let mut g = 0u64;
            for w in of {
                let Build::Wr { inner, m } = &w.build else { return None };
                let (a, b, c) = finite_shadow(inner, n)?;
                let e = *m as u32;
                acc = (acc.0 * a.pow(e) * big(div(*m)?), acc.1 * b.pow(e) * big(n), acc.2 * c.pow(e) * big(*m));
                g = g.gcd(m);
            }
            let diag = big(n / g);
            (acc.0 / diag.clone(), acc.1 / diag, acc.2)
        }
        Build::Split { s, t, col } => {
            let (x, y) = (finite_shadow(s, n)?, finite_shadow(t, n)?);
            let pick = |p: &(BigUint, BigUint, BigUint)| match col {
                0 => p.0.clone(),
                1 => p.1.clone(),
                _ => p.2.clone(),
            };
            let (a, c) = (pick(&x), pick(&y));
            (a.clone(), a * c.clone(), c)
        }
        Build::NaturalTop { of } => {
            let (a, _, _) = finite_shadow(of, n)?;
            (a.clone(), a, big(1))
        }
        Build::NaturalBottom { of } => {
            let (_, _, c) = finite_shadow(of, n)?;
            (big(1), c.clone(), c)
        }
    })
}

// ---------------------------------------------------------------------------
// Text form

struct BuildText<'a>(&'a Build);

impl fmt::Display for BuildText<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, xs: &[SeqExpr]| -> fmt::Result {
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", BuildText(&x.build))?;
            }
            Ok(())
        };
        match self.0 {
            Build::Triv => f.write_str("triv"),
            Build::Zseq { m } => write!(f, "z({m})"),
            Build::Zseq2 { m, n } => write!(f, "z({m},{n})"),
            Build::Prod { factors } => {
                f.write_str("prod(")?;
                list(f, factors)?;
                f.write_str(")")
            }
            Build::Wr { inner, m } => write!(f, "wr({}, {m})", BuildText(&inner.build)),
            Build::Wr2 { inner, m, n } => write!(f, "wr2({}, {m}, {n})", BuildText(&inner.build)),
            Build::GarsideQuot { of } => write!(f, "garside({})", BuildText(&of.build)),
            Build::DiagGarside { of } => {
                f.write_str("diag(")?;
                list(f, of)?;
                f.write_str(")")
            }
            Build::Split { s, t, col } => write!(f, "split({}, {}, {col})", BuildText(&s.build), BuildText(&t.build)),
            Build::NaturalTop { of } => write!(f, "top({})", BuildText(&of.build)),
            Build::NaturalBottom { of } => write!(f, "bottom({})", BuildText(&of.build)),
        }
    }
}

impl fmt::Display for Build {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        BuildText(self).fmt(f)
    }
}

impl fmt::Display for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} ->> {} [build: {}]", self.kernel, self.middle, self.quotient, BuildText(&self.build))
    }
}

/// Accepts either a bare build script such as `wr(prod(z(2), triv), 3)` or the
/// full text form `A -> B ->> C [build: ...]`, whose groups must agree with
/// the evaluated build.
pub fn parse_seq(text: &str) -> Result<SeqExpr, SeqError> {
    let text = text.trim();
    if let Some(start) = text.find("[build:") {
        let end = text.rfind(']').filter(|&e| e > start).ok_or_else(|| SeqError::Script("missing ]".into()))?;
        let s = eval_build(&text[start + 7..end])?;
        let groups: Vec<&str> = text[..start].split("->").map(str::trim).collect();
        if groups.len() != 3 {
            return Err(SeqError::Script("expected A -> B ->> C".into()));
        }
        let quotient_text = groups[2].trim_start_matches('>').trim();
        let parse = |t: &str| {
            GroupExpr::parse(t).map(|g| normalize(&g)).map_err(|e| SeqError::Script(e.to_string()))
        };
        let (k, m, q) = (parse(groups[0])?, parse(groups[1])?, parse(quotient_text)?);
        if k != s.kernel || m != s.middle || q != s.quotient {
            return Err(SeqError::Script(format!("groups do not match the build; the build gives {s}")));
        }
        return Ok(s);
    }
    eval_build(text)
}

pub fn eval_build(script: &str) -> Result<SeqExpr, SeqError> {
    let mut p = ScriptParser { s: script.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 };
    let out = p.term()?;
    if p.pos != p.s.len() {
        return Err(SeqError::Script(format!("trailing input at {}", p.pos)));
    }
    Ok(out)
}

enum Arg {
    Seq(SeqExpr),
    Num(u64),
}

struct ScriptParser {
    s: Vec<char>,
    pos: usize,
}

impl ScriptParser {
    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == '_') {
            self.pos += 1;
        }
        self.s[start..self.pos].iter().collect()
    }

    fn args(&mut self) -> Result<Vec<Arg>, SeqError> {
        if self.s.get(self.pos) != Some(&'(') {
            return Ok(Vec::new());
        }
        self.pos += 1;
        let mut out = Vec::new();
        loop {
            let word = self.ident();
            if word.is_empty() {
                return Err(SeqError::Script(format!("expected an argument at {}", self.pos)));
            }
            if let Ok(n) = word.parse::<u64>() {
                out.push(Arg::Num(n));
            } else {
                self.pos -= word.len();
                out.push(Arg::Seq(self.term()?));
            }
            match self.s.get(self.pos) {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(SeqError::Script(format!("expected , or ) at {}", self.pos))),
            }
        }
    }

    fn term(&mut self) -> Result<SeqExpr, SeqError> {
        let name = self.ident();
        let args = self.args()?;
        let mut seqs = Vec::new();
        let mut nums = Vec::new();
        for a in args {
            match a {
                Arg::Seq(s) => seqs.push(s),
                Arg::Num(n) => nums.push(n),
            }
        }
        let bad = || SeqError::Script(format!("bad arguments for {name}"));
        let pos_nums = nums.iter().all(|&n| n >= 1);
        match (name.as_str(), seqs.len(), nums.len()) {
            ("triv", 0, 0) => Ok(triv()),
            ("z", 0, 1) => Ok(z(nums[0])),
            ("z1", 0, 0) => Ok(z(1)),
            ("z", 0, 2) if pos_nums => Ok(z2(nums[0], nums[1])),
            ("prod", _, 0) if !seqs.is_empty() => Ok(product_all(seqs)),
            ("wr", 1, 1) if pos_nums => Ok(wr(&seqs[0], nums[0])),
            ("wr2", 1, 2) if pos_nums => Ok(wr2(&seqs[0], nums[0], nums[1])),
            ("garside", 1, 0) => garside_quotient(&seqs[0]),
            ("diag", _, 0) => diag_garside(&seqs),
            ("split", 2, 1) if nums[0] <= 2 => Ok(split(&seqs[0], &seqs[1]).columns[nums[0] as usize].clone()),
            ("split", 2, 0) => Ok(split(&seqs[0], &seqs[1]).middle),
            ("top", 1, 0) => Ok(natural(&seqs[0]).0),
            ("bottom", 1, 0) => Ok(natural(&seqs[0]).1),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GroupExpr {
        normalize(&GroupExpr::parse(s).unwrap())
    }

    #[test]
    fn text_round_trip_for_each_constructor() {
        let samples = [
            triv(),
            z(3),
            z2(2, 3),
            product(&z(2), &z(3)),
            wr(&z(2), 3),
            wr2(&triv(), 2, 2),
            garside_quotient(&wr(&z(1), 2)).unwrap(),
            diag_garside(&[wr(&triv(), 2), wr(&z(1), 3)]).unwrap(),
            split(&z(2), &z(1)).columns[1].clone(),
            natural(&z(4)).0,
            natural(&z(4)).1,
        ];
        for s in samples {
            let back = parse_seq(&s.to_string()).unwrap();
            assert_eq!(back, s, "{s}");
        }
    }

    #[test]
    fn mismatching_text_is_rejected() {
        assert!(parse_seq("Z -> Z ->> Z_3 [build: z(2)]").is_err());
        assert!(parse_seq("Z -> Z ->> Z_2 [build: z(2)]").is_ok());
    }

    #[test]
    fn two_parameter_garside_quotient() {
        let s = garside_quotient(&wr2(&z(1), 2, 2)).unwrap();
        assert_eq!(s.kernel, g("Z x Z x Z x Z"));
        assert_eq!(s.middle, g("(Z wr (Z_2 x Z_2))"));
        assert_eq!(s.quotient, g("Z_2 x Z_2"));
    }

    #[test]
    fn garside_of_non_wreath_is_a_build_error() {
        assert!(matches!(garside_quotient(&product(&z(1), &z(2))), Err(SeqError::Build(_))));
        assert!(matches!(diag_garside(&[]), Err(SeqError::Build(_))));
    }
}
