//! Exact element arithmetic in iterated wreath and semidirect products over
//! finite table groups and the integers.
//!
//! In `G wr_m Z` the element `(g_0,…,g_{m-1}; a)` multiplies as
//! `(g; a)(h; b) = (g_i h_{i+a}; a+b)` with indices mod `m`. The matrix version
//! `G wr_{m,n} Z²` shifts rows by the first and columns by the second coordinate.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::WreathError;

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    names: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
    generators: Vec<usize>,
    center: Vec<bool>,
    derived: Vec<bool>,
    coset: Vec<usize>,
    ab_table: Vec<Vec<usize>>,
}

impl FiniteGroup {
    /// Validates associativity, identity and inverses, then precomputes the
    /// center, the derived subgroup and the abelianization table.
    pub fn from_table(
        names: Vec<String>,
        table: Vec<Vec<usize>>,
        generators: Option<Vec<usize>>,
    ) -> Result<Self, WreathError> {
        let n = names.len();
        if n == 0 {
            return Err(WreathError::Table("empty group".into()));
        }
        if table.len() != n || table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(WreathError::Table(format!("table must be {n}x{n} with entries < {n}")));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| WreathError::Table("no two-sided identity".into()))?;
        let mut inverse = vec![usize::MAX; n];
        for a in 0..n {
            inverse[a] = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| WreathError::Table(format!("{} has no inverse", names[a])))?;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(WreathError::Table(format!(
                            "not associative at ({}, {}, {})",
                            names[a], names[b], names[c]
                        )));
                    }
                }
            }
        }
        let generators = match generators {
            Some(g) if g.iter().all(|&x| x < n) => g,
            Some(_) => return Err(WreathError::Table("generator index out of range".into())),
            None => (0..n).filter(|&x| x != identity).collect(),
        };
        let center: Vec<bool> = (0..n).map(|a| (0..n).all(|b| table[a][b] == table[b][a])).collect();

        let commutators: Vec<usize> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .map(|(a, b)| table[table[a][b]][table[inverse[a]][inverse[b]]])
            .collect();
        let derived_set = closure_of(&table, identity, &commutators);
        let mut derived = vec![false; n];
        for &d in &derived_set {
            derived[d] = true;
        }
        let mut coset = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for a in 0..n {
            if coset[a] == usize::MAX {
                let id = reps.len();
                reps.push(a);
                for &d in &derived_set {
                    coset[table[a][d]] = id;
                }
            }
        }
        let ab_table = reps
            .iter()
            .map(|&x| reps.iter().map(|&y| coset[table[x][y]]).collect())
            .collect();

        let group = FiniteGroup { names, table, identity, inverse, generators, center, derived, coset, ab_table };
        if closure_of(&group.table, identity, &group.generators).len() != n {
            return Err(WreathError::Table("marked generators do not generate the group".into()));
        }
        Ok(group)
    }

    /// Cyclic group `Z_k` with elements named `0..k-1`.
    pub fn cyclic(k: usize) -> Self {
        let k = k.max(1);
        let names = (0..k).map(|i| i.to_string()).collect();
        let table = (0..k).map(|a| (0..k).map(|b| (a + b) % k).collect()).collect();
        let gens = if k > 1 { vec![1] } else { vec![] };
        FiniteGroup::from_table(names, table, Some(gens)).expect("cyclic table is a group")
    }

    /// The symmetric group on three letters; `r` is a 3-cycle and `s` a transposition.
    pub fn s3() -> Self {
        // element r^i s^j stored at index i + 3j, with s r s = r^{-1}
        let names = ["e", "r", "r2", "s", "rs", "r2s"].iter().map(|s| s.to_string()).collect();
        let decode = |x: usize| (x % 3, x / 3);
        let encode = |i: usize, j: usize| i % 3 + 3 * (j % 2);
        let table = (0..6)
            .map(|a| {
                (0..6)
                    .map(|b| {
                        let (i1, j1) = decode(a);
                        let (i2, j2) = decode(b);
                        // r^i1 s^j1 r^i2 s^j2 = r^(i1 ± i2) s^(j1+j2)
                        let i = if j1 == 0 { i1 + i2 } else { i1 + 3 - i2 };
                        encode(i, j1 + j2)
                    })
                    .collect()
            })
            .collect();
        FiniteGroup::from_table(names, table, Some(vec![1, 3])).expect("S3 table is a group")
    }

    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let (na, nb) = (a.order(), b.order());
        let names = (0..na * nb).map(|x| format!("{}.{}", a.names[x / nb], b.names[x % nb])).collect();
        let table = (0..na * nb)
            .map(|x| (0..na * nb).map(|y| a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb)).collect())
            .collect();
        FiniteGroup::from_table(names, table, None).expect("product of groups is a group")
    }

    /// Loads a table whose first row lists element names and whose body rows
    /// hold the product names `row · column`, all comma separated. A body row
    /// may start with its own element name (which must match the header).
    pub fn from_csv(text: &str) -> Result<Self, WreathError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| WreathError::Table("missing header".into()))?
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        for name in &header {
            if name.chars().any(|c| ",;()[] ".contains(c)) {
                return Err(WreathError::Table(format!("bad element name {name:?}")));
            }
        }
        let index: HashMap<&str, usize> = header.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        if index.len() != header.len() {
            return Err(WreathError::Table("duplicate element names".into()));
        }
        let n = header.len();
        let mut table = Vec::with_capacity(n);
        for (r, line) in lines.enumerate() {
            let mut cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() == n + 1 {
                if cells[0] != header.get(r).map(String::as_str).unwrap_or("") {
                    return Err(WreathError::Table(format!("row {r} label {:?} out of order", cells[0])));
                }
                cells.remove(0);
            }
            if cells.len() != n {
                return Err(WreathError::Table(format!("row {r} has {} entries, expected {n}", cells.len())));
            }
            let row = cells
                .iter()
                .map(|c| index.get(c).copied().ok_or_else(|| WreathError::Table(format!("unknown element {c:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            table.push(row);
        }
        FiniteGroup::from_table(header, table, None)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.names.join(",");
        out.push('\n');
        for row in &self.table {
            let cells: Vec<&str> = row.iter().map(|&x| self.names[x].as_str()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn is_central(&self, a: usize) -> bool {
        self.center[a]
    }

    pub fn in_derived(&self, a: usize) -> bool {
        self.derived[a]
    }

    pub fn derived_subgroup(&self) -> Vec<usize> {
        (0..self.order()).filter(|&a| self.derived[a]).collect()
    }

    /// Class of `a` in `G/G′`.
    pub fn ab(&self, a: usize) -> usize {
        self.coset[a]
    }

    pub fn ab_mul(&self, x: usize, y: usize) -> usize {
        self.ab_table[x][y]
    }

    pub fn ab_order(&self) -> usize {
        self.ab_table.len()
    }

    pub fn pow(&self, a: usize, k: &BigInt) -> usize {
        let (mut base, mut e) = if k.is_negative() { (self.inv(a), -k) } else { (a, k.clone()) };
        let mut acc = self.identity;
        while !e.is_zero() {
            if e.is_odd() {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn is_subgroup(&self, subset: &[usize]) -> bool {
        if subset.is_empty() || subset.iter().any(|&x| x >= self.order()) {
            return false;
        }
        let set: BTreeSet<usize> = subset.iter().copied().collect();
        set.contains(&self.identity)
            && set.iter().all(|&a| set.contains(&self.inv(a)) && set.iter().all(|&b| set.contains(&self.mul(a, b))))
    }

    pub fn closure(&self, gens: &[usize]) -> BTreeSet<usize> {
        closure_of(&self.table, self.identity, gens)
    }
}

fn closure_of(table: &[Vec<usize>], identity: usize, gens: &[usize]) -> BTreeSet<usize> {
    let mut set = BTreeSet::from([identity]);
    let mut frontier = vec![identity];
    while let Some(x) = frontier.pop() {
        for &g in gens {
            for y in [table[x][g], table[g][x]] {
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
    }
    set
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseGroup {
    Integers,
    Finite(Arc<FiniteGroup>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Actor {
    Z,
    Zmod(u64),
}

/// `A ⋊_φ Z` or `A ⋊_φ Z_k` with `A` finite and `φ(1)` a verified automorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Semidirect {
    normal: Arc<FiniteGroup>,
    actor: Actor,
    action: Vec<usize>,
    action_order: u64,
}

impl Semidirect {
    pub fn new(normal: Arc<FiniteGroup>, actor: Actor, action: Vec<usize>) -> Result<Self, WreathError> {
        let n = normal.order();
        if action.len() != n {
            return Err(WreathError::Action(format!("action must permute all {n} elements")));
        }
        let image: BTreeSet<usize> = action.iter().copied().collect();
        if image.len() != n || image.iter().any(|&x| x >= n) {
            return Err(WreathError::Action("action is not a bijection".into()));
        }
        for a in 0..n {
            for b in 0..n {
                if action[normal.mul(a, b)] != normal.mul(action[a], action[b]) {
                    return Err(WreathError::Action("action is not a homomorphism".into()));
                }
            }
        }
        let mut action_order = 1u64;
        let mut cur = action.clone();
        while cur.iter().enumerate().any(|(i, &x)| i != x) {
            cur = cur.iter().map(|&x| action[x]).collect();
            action_order += 1;
        }
        if let Actor::Zmod(k) = actor {
            if k == 0 || k % action_order != 0 {
                return Err(WreathError::Action(format!(
                    "action of order {action_order} does not factor through Z_{k}"
                )));
            }
        }
        Ok(Semidirect { normal, actor, action, action_order })
    }

    fn act(&self, x: &BigInt, a: usize) -> usize {
        let k = x.mod_floor(&BigInt::from(self.action_order)).to_u64().unwrap_or(0);
        (0..k).fold(a, |acc, _| self.action[acc])
    }

    fn reduce(&self, x: BigInt) -> BigInt {
        match self.actor {
            Actor::Z => x,
            Actor::Zmod(k) => x.mod_floor(&BigInt::from(k)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WreathShape {
    Base(BaseGroup),
    Prod(Vec<WreathShape>),
    WrZ { inner: Box<WreathShape>, m: usize },
    WrZ2 { inner: Box<WreathShape>, m: usize, n: usize },
    Semidirect(Box<Semidirect>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WreathElement {
    Fin(usize),
    Int(BigInt),
    Tuple(Vec<WreathElement>),
    Wr { coords: Vec<WreathElement>, shift: BigInt },
    /// Coordinates in row-major order, index `i·n + j`.
    Wr2 { coords: Vec<WreathElement>, shift: [BigInt; 2] },
    Semi { normal: usize, actor: BigInt },
}

/// Image under the abelianization maps `γ` and `δ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AbelianImage {
    Fin(usize),
    Int(BigInt),
    Tuple(Vec<AbelianImage>),
    Wr { base: Box<AbelianImage>, shift: BigInt },
    Wr2 { base: Box<AbelianImage>, shift: [BigInt; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderOf {
    Finite(u64),
    ExceedsBound,
}

fn idx(k: &BigInt, m: usize) -> usize {
    k.mod_floor(&BigInt::from(m)).to_usize().expect("residue fits usize")
}

impl WreathShape {
    pub fn integers() -> Self {
        WreathShape::Base(BaseGroup::Integers)
    }

    pub fn finite(g: FiniteGroup) -> Self {
        WreathShape::Base(BaseGroup::Finite(Arc::new(g)))
    }

    pub fn wr_z(inner: WreathShape, m: usize) -> Self {
        assert!(m >= 1, "wreath parameter must be positive");
        WreathShape::WrZ { inner: Box::new(inner), m }
    }

    pub fn wr_z2(inner: WreathShape, m: usize, n: usize) -> Self {
        assert!(m >= 1 && n >= 1, "wreath parameters must be positive");
        WreathShape::WrZ2 { inner: Box::new(inner), m, n }
    }

    pub fn semidirect(s: Semidirect) -> Self {
        WreathShape::Semidirect(Box::new(s))
    }

    pub fn conforms(&self, x: &WreathElement) -> bool {
        match (self, x) {
            (WreathShape::Base(BaseGroup::Integers), WreathElement::Int(_)) => true,
            (WreathShape::Base(BaseGroup::Finite(g)), WreathElement::Fin(a)) => *a < g.order(),
            (WreathShape::Prod(ss), WreathElement::Tuple(xs)) => {
                ss.len() == xs.len() && ss.iter().zip(xs).all(|(s, x)| s.conforms(x))
            }
            (WreathShape::WrZ { inner, m }, WreathElement::Wr { coords, .. }) => {
                coords.len() == *m && coords.iter().all(|c| inner.conforms(c))
            }
            (WreathShape::WrZ2 { inner, m, n }, WreathElement::Wr2 { coords, .. }) => {
                coords.len() == m * n && coords.iter().all(|c| inner.conforms(c))
            }
            (WreathShape::Semidirect(s), WreathElement::Semi { normal, actor }) => {
                *normal < s.normal.order()
                    && match s.actor {
                        Actor::Z => true,
                        Actor::Zmod(k) => !actor.is_negative() && *actor < BigInt::from(k),
                    }
            }
            _ => false,
        }
    }

    fn check(&self, x: &WreathElement) -> Result<(), WreathError> {
        if self.conforms(x) {
            Ok(())
        } else {
            Err(WreathError::Shape(format!("{} does not fit {}", self.display(x), self.describe())))
        }
    }

    pub fn identity(&self) -> WreathElement {
        match self {
            WreathShape::Base(BaseGroup::Integers) => WreathElement::Int(BigInt::zero()),
            WreathShape::Base(BaseGroup::Finite(g)) => WreathElement::Fin(g.identity()),
            WreathShape::Prod(ss) => WreathElement::Tuple(ss.iter().map(WreathShape::identity).collect()),
            WreathShape::WrZ { inner, m } => {
                WreathElement::Wr { coords: vec![inner.identity(); *m], shift: BigInt::zero() }
            }
            WreathShape::WrZ2 { inner, m, n } => WreathElement::Wr2 {
                coords: vec![inner.identity(); m * n],
                shift: [BigInt::zero(), BigInt::zero()],
            },
            WreathShape::Semidirect(s) => WreathElement::Semi { normal: s.normal.identity(), actor: BigInt::zero() },
        }
    }

    pub fn mul(&self, x: &WreathElement, y: &WreathElement) -> Result<WreathElement, WreathError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.mul_unchecked(x, y))
    }

    fn mul_unchecked(&self, x: &WreathElement, y: &WreathElement) -> WreathElement {
        use WreathElement as E;
        match (self, x, y) {
            (WreathShape::Base(BaseGroup::Integers), E::Int(a), E::Int(b)) => E::Int(a + b),
            (WreathShape::Base(BaseGroup::Finite(g)), E::Fin(a), E::Fin(b)) => E::Fin(g.mul(*a, *b)),
            (WreathShape::Prod(ss), E::Tuple(xs), E::Tuple(ys)) => {
                E::Tuple(ss.iter().zip(xs.iter().zip(ys)).map(|(s, (a, b))| s.mul_unchecked(a, b)).collect())
            }
            (WreathShape::WrZ { inner, m }, E::Wr { coords: g, shift: a }, E::Wr { coords: h, shift: b }) => {
                let off = idx(a, *m);
                let coords = (0..*m).map(|i| inner.mul_unchecked(&g[i], &h[(i + off) % m])).collect();
                E::Wr { coords, shift: a + b }
            }
            (
                WreathShape::WrZ2 { inner, m, n },
                E::Wr2 { coords: g, shift: [a1, a2] },
                E::Wr2 { coords: h, shift: [b1, b2] },
            ) => {
                let (o1, o2) = (idx(a1, *m), idx(a2, *n));
                let coords = (0..m * n)
                    .map(|k| {
                        let (i, j) = (k / n, k % n);
                        inner.mul_unchecked(&g[k], &h[((i + o1) % m) * n + (j + o2) % n])
                    })
                    .collect();
                E::Wr2 { coords, shift: [a1 + b1, a2 + b2] }
            }
            (WreathShape::Semidirect(s), E::Semi { normal: a, actor: x }, E::Semi { normal: b, actor: y }) => {
                E::Semi { normal: s.normal.mul(*a, s.act(x, *b)), actor: s.reduce(x + y) }
            }
            _ => unreachable!("shape checked by caller"),
        }
    }

    pub fn inv(&self, x: &WreathElement) -> Result<WreathElement, WreathError> {
        self.check(x)?;
        Ok(self.inv_unchecked(x))
    }

    fn inv_unchecked(&self, x: &WreathElement) -> WreathElement {
        use WreathElement as E;
        match (self, x) {
            (WreathShape::Base(BaseGroup::Integers), E::Int(a)) => E::Int(-a),
            (WreathShape::Base(BaseGroup::Finite(g)), E::Fin(a)) => E::Fin(g.inv(*a)),
            (WreathShape::Prod(ss), E::Tuple(xs)) => {
                E::Tuple(ss.iter().zip(xs).map(|(s, a)| s.inv_unchecked(a)).collect())
            }
            (WreathShape::WrZ { inner, m }, E::Wr { coords: g, shift: k }) => {
                // h_j = (g_{j-k})^{-1}
                let off = idx(k, *m);
                let coords = (0..*m).map(|j| inner.inv_unchecked(&g[(j + m - off) % m])).collect();
                E::Wr { coords, shift: -k }
            }
            (WreathShape::WrZ2 { inner, m, n }, E::Wr2 { coords: g, shift: [k, l] }) => {
                let (o1, o2) = (idx(k, *m), idx(l, *n));
                let coords = (0..m * n)
                    .map(|q| {
                        let (i, j) = (q / n, q % n);
                        inner.inv_unchecked(&g[((i + m - o1) % m) * n + (j + n - o2) % n])
                    })
                    .collect();
                E::Wr2 { coords, shift: [-k, -l] }
            }
            (WreathShape::Semidirect(s), E::Semi { normal: a, actor: x }) => {
                let nx = -x;
                E::Semi { normal: s.act(&nx, s.normal.inv(*a)), actor: s.reduce(nx) }
            }
            _ => unreachable!("shape checked by caller"),
        }
    }

    pub fn pow(&self, x: &WreathElement, n: &BigInt) -> Result<WreathElement, WreathError> {
        self.check(x)?;
        let (mut base, mut e) = if n.is_negative() { (self.inv_unchecked(x), -n) } else { (x.clone(), n.clone()) };
        let mut acc = self.identity();
        while !e.is_zero() {
            if e.is_odd() {
                acc = self.mul_unchecked(&acc, &base);
            }
            e >>= 1;
            if !e.is_zero() {
                base = self.mul_unchecked(&base, &base);
            }
        }
        Ok(acc)
    }

    pub fn order_of(&self, x: &WreathElement, bound: u64) -> Result<OrderOf, WreathError> {
        self.check(x)?;
        let e = self.identity();
        let mut y = x.clone();
        for k in 1..=bound {
            if y == e {
                return Ok(OrderOf::Finite(k));
            }
            y = self.mul_unchecked(&y, x);
        }
        Ok(OrderOf::ExceedsBound)
    }

    /// The Garside element `(e,…,e; m)`; for `wr_{m,n} Z²` the pair
    /// `(e,…,e; m,0)` and `(e,…,e; 0,n)`.
    pub fn garside(&self) -> Result<Vec<WreathElement>, WreathError> {
        match self {
            WreathShape::WrZ { inner, m } => {
                Ok(vec![WreathElement::Wr { coords: vec![inner.identity(); *m], shift: BigInt::from(*m) }])
            }
            WreathShape::WrZ2 { inner, m, n } => {
                let coords = vec![inner.identity(); m * n];
                Ok(vec![
                    WreathElement::Wr2 { coords: coords.clone(), shift: [BigInt::from(*m), BigInt::zero()] },
                    WreathElement::Wr2 { coords, shift: [BigInt::zero(), BigInt::from(*n)] },
                ])
            }
            _ => Err(WreathError::Shape(format!("{} has no Garside element", self.describe()))),
        }
    }

    /// A finite generating set: base generators embedded in every coordinate
    /// together with the unit shifts.
    pub fn generators(&self) -> Vec<WreathElement> {
        use WreathElement as E;
        match self {
            WreathShape::Base(BaseGroup::Integers) => vec![E::Int(BigInt::one())],
            WreathShape::Base(BaseGroup::Finite(g)) => g.generators().iter().map(|&a| E::Fin(a)).collect(),
            WreathShape::Prod(ss) => {
                let id: Vec<E> = ss.iter().map(WreathShape::identity).collect();
                let mut out = Vec::new();
                for (i, s) in ss.iter().enumerate() {
                    for g in s.generators() {
                        let mut t = id.clone();
                        t[i] = g;
                        out.push(E::Tuple(t));
                    }
                }
                out
            }
            WreathShape::WrZ { inner, m } => {
                let mut out = Vec::new();
                for g in inner.generators() {
                    for i in 0..*m {
                        let mut coords = vec![inner.identity(); *m];
                        coords[i] = g.clone();
                        out.push(E::Wr { coords, shift: BigInt::zero() });
                    }
                }
                out.push(E::Wr { coords: vec![inner.identity(); *m], shift: BigInt::one() });
                out
            }
            WreathShape::WrZ2 { inner, m, n } => {
                let mut out = Vec::new();
                for g in inner.generators() {
                    for q in 0..m * n {
                        let mut coords = vec![inner.identity(); m * n];
                        coords[q] = g.clone();
                        out.push(E::Wr2 { coords, shift: [BigInt::zero(), BigInt::zero()] });
                    }
                }
                let e = vec![inner.identity(); m * n];
                out.push(E::Wr2 { coords: e.clone(), shift: [BigInt::one(), BigInt::zero()] });
                out.push(E::Wr2 { coords: e, shift: [BigInt::zero(), BigInt::one()] });
                out
            }
            WreathShape::Semidirect(s) => {
                let mut out: Vec<E> = s
                    .normal
                    .generators()
                    .iter()
                    .map(|&a| E::Semi { normal: a, actor: BigInt::zero() })
                    .collect();
                out.push(E::Semi { normal: s.normal.identity(), actor: s.reduce(BigInt::one()) });
                out
            }
        }
    }

    /// Centrality certified by commutation with [`generators`](Self::generators).
    pub fn is_central(&self, x: &WreathElement) -> Result<bool, WreathError> {
        self.check(x)?;
        Ok(self
            .generators()
            .iter()
            .all(|g| self.mul_unchecked(x, g) == self.mul_unchecked(g, x)))
    }

    /// Closed form of the center: all coordinates equal to one central value
    /// and every shift divisible by its wreath parameter.
    pub fn is_central_closed_form(&self, x: &WreathElement) -> Result<bool, WreathError> {
        self.check(x)?;
        Ok(self.closed_central(x))
    }

    fn closed_central(&self, x: &WreathElement) -> bool {
        use WreathElement as E;
        match (self, x) {
            (WreathShape::Base(BaseGroup::Integers), _) => true,
            (WreathShape::Base(BaseGroup::Finite(g)), E::Fin(a)) => g.is_central(*a),
            (WreathShape::Prod(ss), E::Tuple(xs)) => ss.iter().zip(xs).all(|(s, a)| s.closed_central(a)),
            (WreathShape::WrZ { inner, m }, E::Wr { coords, shift }) => {
                coords.iter().all(|c| *c == coords[0])
                    && inner.closed_central(&coords[0])
                    && idx(shift, *m) == 0
            }
            (WreathShape::WrZ2 { inner, m, n }, E::Wr2 { coords, shift: [k, l] }) => {
                coords.iter().all(|c| *c == coords[0])
                    && inner.closed_central(&coords[0])
                    && idx(k, *m) == 0
                    && idx(l, *n) == 0
            }
            (WreathShape::Semidirect(_), _) => self
                .generators()
                .iter()
                .all(|g| self.mul_unchecked(x, g) == self.mul_unchecked(g, x)),
            _ => false,
        }
    }

    /// `γ(g; k) = (ab(g_0⋯g_{m-1}), k)`, recursively through nested shapes.
    pub fn abelianize(&self, x: &WreathElement) -> Result<AbelianImage, WreathError> {
        self.check(x)?;
        self.ab_unchecked(x)
    }

    fn ab_unchecked(&self, x: &WreathElement) -> Result<AbelianImage, WreathError> {
        use WreathElement as E;
        match (self, x) {
            (WreathShape::Base(BaseGroup::Integers), E::Int(a)) => Ok(AbelianImage::Int(a.clone())),
            (WreathShape::Base(BaseGroup::Finite(g)), E::Fin(a)) => Ok(AbelianImage::Fin(g.ab(*a))),
            (WreathShape::Prod(ss), E::Tuple(xs)) => Ok(AbelianImage::Tuple(
                ss.iter().zip(xs).map(|(s, a)| s.ab_unchecked(a)).collect::<Result<_, _>>()?,
            )),
            (WreathShape::WrZ { inner, .. }, E::Wr { coords, shift }) => {
                let prod = coords.iter().fold(inner.identity(), |acc, c| inner.mul_unchecked(&acc, c));
                Ok(AbelianImage::Wr { base: Box::new(inner.ab_unchecked(&prod)?), shift: shift.clone() })
            }
            (WreathShape::WrZ2 { inner, .. }, E::Wr2 { coords, shift }) => {
                let prod = coords.iter().fold(inner.identity(), |acc, c| inner.mul_unchecked(&acc, c));
                Ok(AbelianImage::Wr2 { base: Box::new(inner.ab_unchecked(&prod)?), shift: shift.clone() })
            }
            (WreathShape::Semidirect(_), _) => {
                Err(WreathError::Shape("abelianization of semidirect shapes is not supported".into()))
            }
            _ => unreachable!("shape checked by caller"),
        }
    }

    pub fn ab_identity(&self) -> Result<AbelianImage, WreathError> {
        self.ab_unchecked(&self.identity())
    }

    /// Group law on the abelianization.
    pub fn ab_add(&self, a: &AbelianImage, b: &AbelianImage) -> Result<AbelianImage, WreathError> {
        use AbelianImage as A;
        match (self, a, b) {
            (WreathShape::Base(BaseGroup::Integers), A::Int(x), A::Int(y)) => Ok(A::Int(x + y)),
            (WreathShape::Base(BaseGroup::Finite(g)), A::Fin(x), A::Fin(y)) => Ok(A::Fin(g.ab_mul(*x, *y))),
            (WreathShape::Prod(ss), A::Tuple(xs), A::Tuple(ys)) if xs.len() == ss.len() && ys.len() == ss.len() => {
                Ok(A::Tuple(ss.iter().zip(xs.iter().zip(ys)).map(|(s, (x, y))| s.ab_add(x, y)).collect::<Result<_, _>>()?))
            }
            (WreathShape::WrZ { inner, .. }, A::Wr { base: x, shift: k }, A::Wr { base: y, shift: l }) => {
                Ok(A::Wr { base: Box::new(inner.ab_add(x, y)?), shift: k + l })
            }
            (WreathShape::WrZ2 { inner, .. }, A::Wr2 { base: x, shift: [k1, k2] }, A::Wr2 { base: y, shift: [l1, l2] }) => {
                Ok(A::Wr2 { base: Box::new(inner.ab_add(x, y)?), shift: [k1 + l1, k2 + l2] })
            }
            _ => Err(WreathError::Shape("abelian images do not fit the shape".into())),
        }
    }

    /// Membership in the derived subgroup: zero shifts and product of
    /// coordinates in the derived subgroup of the base.
    pub fn in_derived(&self, x: &WreathElement) -> Result<bool, WreathError> {
        self.check(x)?;
        self.derived_unchecked(x)
    }

    fn derived_unchecked(&self, x: &WreathElement) -> Result<bool, WreathError> {
        use WreathElement as E;
        match (self, x) {
            (WreathShape::Base(BaseGroup::Integers), E::Int(a)) => Ok(a.is_zero()),
            (WreathShape::Base(BaseGroup::Finite(g)), E::Fin(a)) => Ok(g.in_derived(*a)),
            (WreathShape::Prod(ss), E::Tuple(xs)) => {
                for (s, a) in ss.iter().zip(xs) {
                    if !s.derived_unchecked(a)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (WreathShape::WrZ { inner, .. }, E::Wr { coords, shift }) => {
                if !shift.is_zero() {
                    return Ok(false);
                }
                let prod = coords.iter().fold(inner.identity(), |acc, c| inner.mul_unchecked(&acc, c));
                inner.derived_unchecked(&prod)
            }
            (WreathShape::WrZ2 { inner, .. }, E::Wr2 { coords, shift }) => {
                if !shift[0].is_zero() || !shift[1].is_zero() {
                    return Ok(false);
                }
                let prod = coords.iter().fold(inner.identity(), |acc, c| inner.mul_unchecked(&acc, c));
                inner.derived_unchecked(&prod)
            }
            (WreathShape::Semidirect(_), _) => {
                Err(WreathError::Shape("derived subgroup of semidirect shapes is not supported".into()))
            }
            _ => unreachable!("shape checked by caller"),
        }
    }

    /// Projection onto the shift coordinates (empty for shapes without shifts).
    pub fn shift_of(&self, x: &WreathElement) -> Vec<BigInt> {
        match x {
            WreathElement::Wr { shift, .. } => vec![shift.clone()],
            WreathElement::Wr2 { shift, .. } => shift.to_vec(),
            WreathElement::Semi { actor, .. } => vec![actor.clone()],
            _ => Vec::new(),
        }
    }

    /// Uniform random element; integers and shifts are drawn from `[-range, range]`.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, range: i64) -> WreathElement {
        use WreathElement as E;
        let int = |rng: &mut R| BigInt::from(rng.gen_range(-range..=range));
        match self {
            WreathShape::Base(BaseGroup::Integers) => E::Int(int(rng)),
            WreathShape::Base(BaseGroup::Finite(g)) => E::Fin(rng.gen_range(0..g.order())),
            WreathShape::Prod(ss) => E::Tuple(ss.iter().map(|s| s.random_element(rng, range)).collect()),
            WreathShape::WrZ { inner, m } => E::Wr {
                coords: (0..*m).map(|_| inner.random_element(rng, range)).collect(),
                shift: int(rng),
            },
            WreathShape::WrZ2 { inner, m, n } => E::Wr2 {
                coords: (0..m * n).map(|_| inner.random_element(rng, range)).collect(),
                shift: [int(rng), int(rng)],
            },
            WreathShape::Semidirect(s) => E::Semi {
                normal: rng.gen_range(0..s.normal.order()),
                actor: s.reduce(int(rng)),
            },
        }
    }

    pub fn describe(&self) -> String {
        match self {
            WreathShape::Base(BaseGroup::Integers) => "Z".into(),
            WreathShape::Base(BaseGroup::Finite(g)) => format!("G{}", g.order()),
            WreathShape::Prod(ss) => {
                format!("({})", ss.iter().map(WreathShape::describe).collect::<Vec<_>>().join(" x "))
            }
            WreathShape::WrZ { inner, m } => format!("({} wr[{m}] Z)", inner.describe()),
            WreathShape::WrZ2 { inner, m, n } => format!("({} wr[{m},{n}] Z2)", inner.describe()),
            WreathShape::Semidirect(s) => match s.actor {
                Actor::Z => format!("(G{} : Z)", s.normal.order()),
                Actor::Zmod(k) => format!("(G{} : Z_{k})", s.normal.order()),
            },
        }
    }

    /// Text form `(g0,…,g{m-1}; k)`; product tuples print as `[a, b]`.
    pub fn display(&self, x: &WreathElement) -> String {
        use WreathElement as E;
        let join = |s: &WreathShape, xs: &[E]| xs.iter().map(|c| s.display(c)).collect::<Vec<_>>().join(",");
        match (self, x) {
            (WreathShape::Base(BaseGroup::Finite(g)), E::Fin(a)) if *a < g.order() => g.name(*a).to_string(),
            (_, E::Fin(a)) => format!("#{a}"),
            (_, E::Int(a)) => a.to_string(),
            (WreathShape::Prod(ss), E::Tuple(xs)) => {
                let parts: Vec<String> = ss.iter().zip(xs).map(|(s, c)| s.display(c)).collect();
                format!("[{}]", parts.join(", "))
            }
            (WreathShape::WrZ { inner, .. }, E::Wr { coords, shift }) => format!("({}; {shift})", join(inner, coords)),
            (WreathShape::WrZ2 { inner, .. }, E::Wr2 { coords, shift: [k, l] }) => {
                format!("({}; {k},{l})", join(inner, coords))
            }
            (WreathShape::Semidirect(s), E::Semi { normal, actor }) => {
                format!("({}; {actor})", s.normal.name(*normal))
            }
            (_, other) => format!("{other:?}"),
        }
    }

    pub fn parse_element(&self, text: &str) -> Result<WreathElement, WreathError> {
        let mut p = ElemParser { chars: text.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 };
        let x = p.element(self)?;
        if p.pos != p.chars.len() {
            return Err(WreathError::Parse(format!("trailing input at {}", p.pos)));
        }
        self.check(&x)?;
        Ok(x)
    }
}

struct ElemParser {
    chars: Vec<char>,
    pos: usize,
}

impl ElemParser {
    fn eat(&mut self, c: char) -> Result<(), WreathError> {
        if self.chars.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(WreathError::Parse(format!("expected {c:?} at {}", self.pos)))
        }
    }

    fn word(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.chars.len() && !",;()[]".contains(self.chars[self.pos]) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn int(&mut self) -> Result<BigInt, WreathError> {
        let w = self.word();
        w.parse().map_err(|_| WreathError::Parse(format!("expected an integer, found {w:?}")))
    }

    fn list(&mut self, shape: &WreathShape, close: char) -> Result<Vec<WreathElement>, WreathError> {
        let mut out = vec![self.element(shape)?];
        while self.chars.get(self.pos) == Some(&',') {
            self.pos += 1;
            out.push(self.element(shape)?);
        }
        if self.chars.get(self.pos) != Some(&close) {
            return Err(WreathError::Parse(format!("expected {close:?} at {}", self.pos)));
        }
        self.pos += 1;
        Ok(out)
    }

    fn element(&mut self, shape: &WreathShape) -> Result<WreathElement, WreathError> {
        match shape {
            WreathShape::Base(BaseGroup::Integers) => Ok(WreathElement::Int(self.int()?)),
            WreathShape::Base(BaseGroup::Finite(g)) => {
                let w = self.word();
                g.index_of(&w)
                    .map(WreathElement::Fin)
                    .ok_or_else(|| WreathError::Parse(format!("unknown element {w:?}")))
            }
            WreathShape::Prod(ss) => {
                self.eat('[')?;
                let mut out = Vec::new();
                for (i, s) in ss.iter().enumerate() {
                    if i > 0 {
                        self.eat(',')?;
                    }
                    out.push(self.element(s)?);
                }
                self.eat(']')?;
                Ok(WreathElement::Tuple(out))
            }
            WreathShape::WrZ { inner, .. } => {
                self.eat('(')?;
                let coords = self.list(inner, ';')?;
                let shift = self.int()?;
                self.eat(')')?;
                Ok(WreathElement::Wr { coords, shift })
            }
            WreathShape::WrZ2 { inner, .. } => {
                self.eat('(')?;
                let coords = self.list(inner, ';')?;
                let k = self.int()?;
                self.eat(',')?;
                let l = self.int()?;
                self.eat(')')?;
                Ok(WreathElement::Wr2 { coords, shift: [k, l] })
            }
            WreathShape::Semidirect(s) => {
                self.eat('(')?;
                let w = self.word();
                let normal = s.normal.index_of(&w).ok_or_else(|| WreathError::Parse(format!("unknown element {w:?}")))?;
                self.eat(';')?;
                let actor = s.reduce(self.int()?);
                self.eat(')')?;
                Ok(WreathElement::Semi { normal, actor })
            }
        }
    }
}

impl fmt::Display for AbelianImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbelianImage::Fin(c) => write!(f, "[{c}]"),
            AbelianImage::Int(a) => write!(f, "{a}"),
            AbelianImage::Tuple(xs) => {
                let parts: Vec<String> = xs.iter().map(ToString::to_string).collect();
                write!(f, "[{}]", parts.join(", "))
            }
            AbelianImage::Wr { base, shift } => write!(f, "({base}, {shift})"),
            AbelianImage::Wr2 { base, shift: [k, l] } => write!(f, "({base}, {k}, {l})"),
        }
    }
}

/// Checks whether `(g_1,…,g_k) ↦ g_1⋯g_k` is an isomorphism from the product
/// of the given subgroups onto `g`.
pub fn splits_as_direct_product(g: &FiniteGroup, subgroups: &[Vec<usize>]) -> Result<bool, WreathError> {
    for (i, h) in subgroups.iter().enumerate() {
        if !g.is_subgroup(h) {
            return Err(WreathError::Subgroup(format!("subset #{i} is not closed under products and inverses")));
        }
    }
    let sets: Vec<BTreeSet<usize>> = subgroups.iter().map(|h| h.iter().copied().collect()).collect();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            for &a in &sets[i] {
                for &b in &sets[j] {
                    if g.mul(a, b) != g.mul(b, a) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    let all: Vec<usize> = sets.iter().flatten().copied().collect();
    if g.closure(&all).len() != g.order() {
        return Ok(false);
    }
    // Commuting subgroups that generate give a surjective homomorphism; it is
    // injective exactly when the orders multiply up.
    let product: usize = sets.iter().map(BTreeSet::len).product();
    Ok(product == g.order())
}

/// Outcome of rebuilding a group from a split epimorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionReport {
    /// Elements of `ker p` in `g`.
    pub kernel: Vec<usize>,
    /// `action[z][i]` is the kernel position of `s(z)·kernel[i]·s(z)⁻¹`.
    pub action: Vec<Vec<usize>>,
    pub bijective: bool,
    pub homomorphism: bool,
}

impl SectionReport {
    pub fn is_isomorphism(&self) -> bool {
        self.bijective && self.homomorphism
    }
}

/// Given an epimorphism `p: G → Z` (as an element map) and a section `s`,
/// builds `ker p ⋊_φ Z` with `φ(z)(a) = s(z)·a·s(z)⁻¹` and checks by
/// exhaustion that `ψ(a, z) = a·s(z)` is an isomorphism onto `G`.
pub fn semidirect_from_section(
    g: &FiniteGroup,
    z: &FiniteGroup,
    p: &[usize],
    s: &[usize],
) -> Result<SectionReport, WreathError> {
    if p.len() != g.order() || p.iter().any(|&x| x >= z.order()) {
        return Err(WreathError::Section("p must map every element of G into Z".into()));
    }
    if s.len() != z.order() || s.iter().any(|&x| x >= g.order()) {
        return Err(WreathError::Section("s must map every element of Z into G".into()));
    }
    for a in 0..g.order() {
        for b in 0..g.order() {
            if p[g.mul(a, b)] != z.mul(p[a], p[b]) {
                return Err(WreathError::Section("p is not a homomorphism".into()));
            }
        }
    }
    for x in 0..z.order() {
        for y in 0..z.order() {
            if s[z.mul(x, y)] != g.mul(s[x], s[y]) {
                return Err(WreathError::Section(format!(
                    "s is not a homomorphism: s({}·{}) ≠ s({})·s({})",
                    z.name(x),
                    z.name(y),
                    z.name(x),
                    z.name(y)
                )));
            }
        }
        if p[s[x]] != x {
            return Err(WreathError::Section(format!("p(s({})) ≠ {}", z.name(x), z.name(x))));
        }
    }
    let kernel: Vec<usize> = (0..g.order()).filter(|&a| p[a] == z.identity()).collect();
    let pos: HashMap<usize, usize> = kernel.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let mut action = Vec::with_capacity(z.order());
    for x in 0..z.order() {
        let sx = s[x];
        let row = kernel
            .iter()
            .map(|&a| {
                let c = g.mul(g.mul(sx, a), g.inv(sx));
                pos.get(&c).copied().ok_or_else(|| WreathError::Section("conjugation leaves the kernel".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        action.push(row);
    }
    let psi = |i: usize, x: usize| g.mul(kernel[i], s[x]);
    let mut seen = BTreeSet::new();
    for i in 0..kernel.len() {
        for x in 0..z.order() {
            seen.insert(psi(i, x));
        }
    }
    let bijective = seen.len() == g.order() && kernel.len() * z.order() == g.order();
    let mut homomorphism = true;
    'outer: for i in 0..kernel.len() {
        for x in 0..z.order() {
            for j in 0..kernel.len() {
                for y in 0..z.order() {
                    // (a, x)(b, y) = (a · φ(x)(b), xy)
                    let prod_k = pos[&g.mul(kernel[i], kernel[action[x][j]])];
                    let lhs = psi(prod_k, z.mul(x, y));
                    let rhs = g.mul(psi(i, x), psi(j, y));
                    if lhs != rhs {
                        homomorphism = false;
                        break 'outer;
                    }
                }
            }
        }
    }
    Ok(SectionReport { kernel, action, bijective, homomorphism })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zwr(m: usize) -> WreathShape {
        WreathShape::wr_z(WreathShape::integers(), m)
    }

    #[test]
    fn s3_is_nonabelian_with_trivial_center() {
        let g = FiniteGroup::s3();
        assert_eq!(g.order(), 6);
        let r = g.index_of("r").unwrap();
        let s = g.index_of("s").unwrap();
        assert_ne!(g.mul(r, s), g.mul(s, r));
        assert_eq!((0..6).filter(|&a| g.is_central(a)).count(), 1);
        assert_eq!(g.derived_subgroup().len(), 3);
        assert_eq!(g.ab_order(), 2);
    }

    #[test]
    fn csv_round_trip() {
        let g = FiniteGroup::s3();
        let h = FiniteGroup::from_csv(&g.to_csv()).unwrap();
        assert_eq!(g.table, h.table);
        assert!(FiniteGroup::from_csv("a,b\na,a\na,b\n").is_err());
    }

    #[test]
    fn element_text_round_trip() {
        let s = zwr(2);
        let x = s.parse_element("(1, 2; -3)").unwrap();
        assert_eq!(s.display(&x), "(1,2; -3)");
        assert!(s.parse_element("(1; 0)").is_err());
        let t = WreathShape::wr_z2(WreathShape::integers(), 2, 2);
        let y = t.parse_element("(1,2,3,4; 1,0)").unwrap();
        assert_eq!(t.parse_element(&t.display(&y)).unwrap(), y);
    }

    #[test]
    fn semidirect_shape_multiplies_with_twist() {
        let z3 = Arc::new(FiniteGroup::cyclic(3));
        let neg = vec![0, 2, 1];
        let s = WreathShape::semidirect(Semidirect::new(z3, Actor::Zmod(2), neg).unwrap());
        let a = WreathElement::Semi { normal: 1, actor: BigInt::zero() };
        let t = WreathElement::Semi { normal: 0, actor: BigInt::one() };
        let ta = s.mul(&t, &a).unwrap();
        assert_eq!(ta, WreathElement::Semi { normal: 2, actor: BigInt::one() });
        assert_eq!(s.mul(&ta, &s.inv(&ta).unwrap()).unwrap(), s.identity());
        assert!(Semidirect::new(Arc::new(FiniteGroup::cyclic(3)), Actor::Zmod(3), vec![0, 2, 1]).is_err());
    }
}
