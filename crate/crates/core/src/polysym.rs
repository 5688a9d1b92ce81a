//! Critical points of homogeneous polynomials in two variables: real factor
//! counts, the type of the critical point at the origin and the linear
//! symmetry group in the given coordinates.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::PolyError;

/// `Σ a_k x^k y^{d-k}` with rational coefficients; `coeffs[k] = a_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomogPoly {
    coeffs: Vec<BigRational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CritType {
    NonDegExtreme,
    DegExtreme,
    QuasiSaddle,
    NonDegSaddle,
    Saddle,
    NoCriticalPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rotation {
    ContinuousSO2,
    Cyclic { m: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinStab {
    pub rotation: Rotation,
    pub dihedral: bool,
}

impl LinStab {
    /// Size of an orbit of framing vectors: `2m` with reflections, `m` otherwise.
    pub fn framing_orbit_size(&self) -> Option<u64> {
        match self.rotation {
            Rotation::ContinuousSO2 => None,
            Rotation::Cyclic { m } => Some(if self.dihedral { 2 * m } else { m }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub degree: usize,
    pub p: usize,
    pub q: usize,
    pub crit_type: CritType,
    /// Number of rays of the zero level set at the origin, `2p`.
    pub rays: usize,
}

impl HomogPoly {
    pub fn new(coeffs: Vec<BigRational>) -> Result<Self, PolyError> {
        if coeffs.iter().all(Zero::is_zero) || coeffs.is_empty() {
            return Err(PolyError::Zero);
        }
        Ok(HomogPoly { coeffs })
    }

    pub fn from_ints(coeffs: &[i64]) -> Result<Self, PolyError> {
        HomogPoly::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn parse(text: &str) -> Result<Self, PolyError> {
        let poly = PolyParser::new(text).parse()?;
        let mut degrees = poly.keys().map(|(i, j)| i + j);
        let d = degrees.next().ok_or(PolyError::Zero)?;
        if let Some(other) = degrees.find(|&e| e != d) {
            return Err(PolyError::NotHomogeneous(d, other));
        }
        let mut coeffs = vec![BigRational::zero(); d as usize + 1];
        for ((i, _), c) in poly {
            coeffs[i as usize] = c;
        }
        HomogPoly::new(coeffs)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a.to_f64().unwrap_or(0.0) * x.powi(k as i32) * y.powi((self.degree() - k) as i32))
            .sum()
    }

    /// `g(t, 1)`, low degree first.
    fn dehomogenized(&self) -> UPoly {
        UPoly::new(self.coeffs.clone())
    }

    pub fn is_square_free(&self) -> bool {
        let d = self.degree();
        if d >= 2 && self.coeffs[d].is_zero() && self.coeffs[d - 1].is_zero() {
            return false;
        }
        let p = self.dehomogenized();
        p.deg() <= 0 || p.gcd(&p.derivative()).deg() == 0
    }

    /// Converts to `Σ c_j z^j z̄^{d-j}` via `x = (z+z̄)/2`, `y = (z-z̄)/(2i)`.
    pub fn z_basis(&self) -> Vec<Gq> {
        let d = self.degree();
        let half = Gq::real(BigRational::new(1.into(), 2.into()));
        let x_lin = vec![half.clone(), half.clone()]; // coefficient of z̄^1 z^0 then z^1
        let minus_half_i = Gq::new(BigRational::zero(), BigRational::new((-1).into(), 2.into()));
        // y = (z - z̄)/(2i) = -i/2 z + i/2 z̄
        let y_lin = vec![-minus_half_i.clone(), minus_half_i];
        let mut out = vec![Gq::zero(); d + 1];
        for (k, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let mut term = vec![Gq::real(a.clone())];
            for _ in 0..k {
                term = conv(&term, &x_lin);
            }
            for _ in 0..d - k {
                term = conv(&term, &y_lin);
            }
            for (j, c) in term.into_iter().enumerate() {
                out[j] = out[j].clone() + c;
            }
        }
        out
    }

    /// Inverse of [`z_basis`](Self::z_basis); fails unless the coefficients
    /// describe a real polynomial (`c_{d-j} = conj(c_j)`).
    pub fn from_z_basis(c: &[Gq]) -> Result<Self, PolyError> {
        let d = c.len().checked_sub(1).ok_or(PolyError::Zero)?;
        // z = x + i y and z̄ = x - i y as polynomials in x with y = 1, indexed by x power
        let z_lin = vec![Gq::new(BigRational::zero(), BigRational::one()), Gq::one()];
        let zb_lin = vec![Gq::new(BigRational::zero(), -BigRational::one()), Gq::one()];
        let mut out = vec![Gq::zero(); d + 1];
        for (j, cj) in c.iter().enumerate() {
            if cj.is_zero() {
                continue;
            }
            let mut term = vec![cj.clone()];
            for _ in 0..j {
                term = conv(&term, &z_lin);
            }
            for _ in 0..d - j {
                term = conv(&term, &zb_lin);
            }
            for (k, t) in term.into_iter().enumerate() {
                out[k] = out[k].clone() + t;
            }
        }
        if out.iter().any(|g| !g.im.is_zero()) {
            return Err(PolyError::Parse("z-basis coefficients do not describe a real polynomial".into()));
        }
        HomogPoly::new(out.into_iter().map(|g| g.re).collect())
    }
}

impl fmt::Display for HomogPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let mut first = true;
        for k in (0..=d).rev() {
            let a = &self.coeffs[k];
            if a.is_zero() {
                continue;
            }
            let neg = a.is_negative();
            let abs = a.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let mono = monomial(k, d - k);
            if abs.is_one() && !mono.is_empty() {
                f.write_str(&mono)?;
            } else if abs.is_integer() {
                write!(f, "{}{}", abs.numer(), mono)?;
            } else {
                write!(f, "({}/{}){}", abs.numer(), abs.denom(), mono)?;
            }
        }
        Ok(())
    }
}

fn monomial(i: usize, j: usize) -> String {
    let part = |v: &str, e: usize| match e {
        0 => String::new(),
        1 => v.to_string(),
        e => format!("{v}^{e}"),
    };
    format!("{}{}", part("x", i), part("y", j))
}

/// Number of real linear factors `p` (distinct, counted through Sturm
/// sequences on `g(t,1)` plus the factor `y`) and quadratic factors `q`.
pub fn factor_counts(g: &HomogPoly) -> Result<(usize, usize), PolyError> {
    if !g.is_square_free() {
        return Err(PolyError::SquareFree);
    }
    let d = g.degree();
    let p = g.dehomogenized();
    let mut real = if p.deg() > 0 { p.count_real_roots() } else { 0 };
    if g.coeffs[d].is_zero() {
        real += 1;
    }
    Ok((real, (d - real) / 2))
}

pub fn classify(g: &HomogPoly) -> Result<Classification, PolyError> {
    let d = g.degree();
    let (p, q) = factor_counts(g)?;
    let crit_type = match (d, p, q) {
        (1, _, _) => CritType::NoCriticalPoint,
        (_, 0, 1) => CritType::NonDegExtreme,
        (_, 0, _) => CritType::DegExtreme,
        (_, 1, _) => CritType::QuasiSaddle,
        (_, 2, 0) => CritType::NonDegSaddle,
        _ => CritType::Saddle,
    };
    Ok(Classification { degree: d, p, q, crit_type, rays: 2 * p })
}

/// Rotations and reflections of the plane fixing `g`. Rotation by `θ`
/// multiplies `z^j z̄^{d-j}` by `e^{iθ(2j-d)}`, so the rotation order is the
/// gcd of the exponents `|2j-d|` on the support. A reflection exists iff some
/// `w` satisfies `w^{2j-d} = conj(c_j)/c_j` on the support; the candidates are
/// pinned down through a Bezout combination of the exponents.
pub fn symmetry_index(g: &HomogPoly) -> Result<LinStab, PolyError> {
    if !g.is_square_free() {
        return Err(PolyError::SquareFree);
    }
    let d = g.degree() as i64;
    let c = g.z_basis();
    let support: Vec<(i64, &Gq)> =
        c.iter().enumerate().filter(|(_, cj)| !cj.is_zero()).map(|(j, cj)| (2 * j as i64 - d, cj)).collect();
    let m = support.iter().fold(0i64, |acc, (n, _)| acc.gcd(n));
    if m == 0 {
        return Ok(LinStab { rotation: Rotation::ContinuousSO2, dihedral: true });
    }
    let constraints: Vec<(i64, Gq)> = support
        .iter()
        .filter(|(n, _)| *n != 0)
        .map(|(n, cj)| (*n, cj.conj().div(cj)))
        .collect();
    // Bezout: Σ a_k n_k = m, then w^m = R := Π ρ_k^{a_k}.
    let mut acc_gcd = 0i64;
    let mut coeffs: Vec<i64> = Vec::new();
    for (n, _) in &constraints {
        if acc_gcd == 0 {
            acc_gcd = *n;
            coeffs.push(1);
            continue;
        }
        let ext = acc_gcd.extended_gcd(n);
        for a in coeffs.iter_mut() {
            *a *= ext.x;
        }
        coeffs.push(ext.y);
        acc_gcd = ext.gcd;
    }
    if acc_gcd < 0 {
        acc_gcd = -acc_gcd;
        for a in coeffs.iter_mut() {
            *a = -*a;
        }
    }
    debug_assert_eq!(acc_gcd, m);
    let mut r = Gq::one();
    for ((_, rho), a) in constraints.iter().zip(&coeffs) {
        r = r.times(&rho.unit_pow(*a));
    }
    let dihedral = constraints.iter().all(|(n, rho)| r.unit_pow(n / m) == *rho);
    Ok(LinStab { rotation: Rotation::Cyclic { m: m as u64 }, dihedral })
}

/// Largest `|g(R v) - g(v)|` over `samples` random unit vectors `v`, with `R`
/// the rotation by `2π/m`.
pub fn check_rotation_numeric<R: Rng + ?Sized>(g: &HomogPoly, m: u64, samples: usize, rng: &mut R) -> f64 {
    let theta = std::f64::consts::TAU / m as f64;
    let (s, c) = theta.sin_cos();
    (0..samples)
        .map(|_| {
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let (x, y) = (phi.cos(), phi.sin());
            (g.eval(c * x - s * y, s * x + c * y) - g.eval(x, y)).abs()
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Gaussian rationals

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gq {
    pub re: BigRational,
    pub im: BigRational,
}

impl Gq {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Gq { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Gq { re, im: BigRational::zero() }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Gq::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
    }

    pub fn zero() -> Self {
        Gq::real(BigRational::zero())
    }

    pub fn one() -> Self {
        Gq::real(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Gq { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn times(&self, o: &Gq) -> Gq {
        Gq { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }

    pub fn div(&self, o: &Gq) -> Gq {
        let n = o.norm();
        let t = self.times(&o.conj());
        Gq { re: t.re / n.clone(), im: t.im / n }
    }

    /// Integer power of a unit-modulus number; negative exponents use the conjugate.
    fn unit_pow(&self, e: i64) -> Gq {
        let base = if e < 0 { self.conj() } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = Gq::one();
        let mut b = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.times(&b);
            }
            b = b.times(&b);
            k >>= 1;
        }
        acc
    }
}

impl Add for Gq {
    type Output = Gq;
    fn add(self, o: Gq) -> Gq {
        Gq { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for Gq {
    type Output = Gq;
    fn sub(self, o: Gq) -> Gq {
        Gq { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Neg for Gq {
    type Output = Gq;
    fn neg(self) -> Gq {
        Gq { re: -self.re, im: -self.im }
    }
}

impl Mul for Gq {
    type Output = Gq;
    fn mul(self, o: Gq) -> Gq {
        self.times(&o)
    }
}

fn conv(a: &[Gq], b: &[Gq]) -> Vec<Gq> {
    let mut out = vec![Gq::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.times(y);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Univariate rational polynomials and Sturm sequences

#[derive(Debug, Clone, PartialEq, Eq)]
struct UPoly(Vec<BigRational>);

impl UPoly {
    fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        UPoly(c)
    }

    /// Degree, with `-1` for the zero polynomial.
    fn deg(&self) -> i64 {
        self.0.len() as i64 - 1
    }

    fn lead(&self) -> &BigRational {
        self.0.last().expect("nonzero polynomial")
    }

    fn derivative(&self) -> UPoly {
        UPoly::new(
            self.0.iter().enumerate().skip(1).map(|(k, a)| a * BigRational::from_integer(BigInt::from(k))).collect(),
        )
    }

    fn rem(&self, d: &UPoly) -> UPoly {
        let mut r = self.0.clone();
        let dd = d.deg() as usize;
        let lead = d.lead().clone();
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let factor = r.last().expect("nonempty").clone() / lead.clone();
            for (k, c) in d.0.iter().enumerate() {
                r[shift + k] = r[shift + k].clone() - factor.clone() * c;
            }
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        UPoly::new(r)
    }

    fn gcd(&self, o: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while b.deg() >= 0 {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    fn count_real_roots(&self) -> usize {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].deg() < 0 {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]);
            if r.deg() < 0 {
                break;
            }
            chain.push(UPoly::new(r.0.into_iter().map(|c| -c).collect()));
        }
        let changes = |signs: Vec<bool>| signs.windows(2).filter(|w| w[0] != w[1]).count();
        let at_pos: Vec<bool> = chain.iter().map(|p| p.lead().is_positive()).collect();
        let at_neg: Vec<bool> = chain.iter().map(|p| p.lead().is_positive() == (p.deg() % 2 == 0)).collect();
        changes(at_neg) - changes(at_pos)
    }
}

// ---------------------------------------------------------------------------
// Text input

type Sparse = BTreeMap<(u32, u32), BigRational>;

fn sparse_mul(a: &Sparse, b: &Sparse) -> Sparse {
    let mut out = Sparse::new();
    for ((i1, j1), x) in a {
        for ((i2, j2), y) in b {
            let e = out.entry((i1 + i2, j1 + j2)).or_insert_with(BigRational::zero);
            *e += x * y;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn sparse_add(mut a: Sparse, b: &Sparse, sign: i32) -> Sparse {
    for (k, c) in b {
        let e = a.entry(*k).or_insert_with(BigRational::zero);
        if sign < 0 {
            *e -= c;
        } else {
            *e += c;
        }
    }
    a.retain(|_, c| !c.is_zero());
    a
}

fn constant(c: BigRational) -> Sparse {
    let mut s = Sparse::new();
    if !c.is_zero() {
        s.insert((0, 0), c);
    }
    s
}

struct PolyParser {
    s: Vec<char>,
    pos: usize,
}

impl PolyParser {
    fn new(text: &str) -> Self {
        PolyParser { s: text.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 }
    }

    fn err<T>(&self, msg: &str) -> Result<T, PolyError> {
        Err(PolyError::Parse(format!("{msg} at position {}", self.pos)))
    }

    fn parse(mut self) -> Result<Sparse, PolyError> {
        if self.s.is_empty() {
            return self.err("empty input");
        }
        let p = self.expr()?;
        if self.pos != self.s.len() {
            return self.err("unexpected character");
        }
        Ok(p)
    }

    fn peek(&self) -> Option<char> {
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Sparse, PolyError> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            if c != '+' && c != '-' {
                break;
            }
            self.pos += 1;
            let t = self.term()?;
            acc = sparse_add(acc, &t, if c == '-' { -1 } else { 1 });
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Sparse, PolyError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = sparse_mul(&acc, &self.unary()?);
                }
                Some('/') => {
                    self.pos += 1;
                    let d = self.unary()?;
                    let c = match d.get(&(0, 0)) {
                        Some(c) if d.len() == 1 => c.clone(),
                        _ => return self.err("division only by nonzero constants"),
                    };
                    acc = sparse_mul(&acc, &constant(c.recip()));
                }
                Some(c) if c.is_ascii_digit() || c == 'x' || c == 'y' || c == '(' => {
                    acc = sparse_mul(&acc, &self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Sparse, PolyError> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                let inner = self.unary()?;
                Ok(sparse_mul(&constant(-BigRational::one()), &inner))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Sparse, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let e: u32 = self.s[start..self.pos]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| PolyError::Parse(format!("bad exponent at position {start}")))?;
            let mut acc = constant(BigRational::one());
            for _ in 0..e {
                acc = sparse_mul(&acc, &base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Sparse, PolyError> {
        match self.peek() {
            Some('x') => {
                self.pos += 1;
                Ok(Sparse::from([((1, 0), BigRational::one())]))
            }
            Some('y') => {
                self.pos += 1;
                Ok(Sparse::from([((0, 1), BigRational::one())]))
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return self.err("expected )");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                let text: String = self.s[start..self.pos].iter().collect();
                let value = match text.split_once('.') {
                    None => BigRational::from_integer(text.parse::<BigInt>().map_err(|e| PolyError::Parse(e.to_string()))?),
                    Some((int, frac)) => {
                        let digits = format!("{int}{frac}");
                        let n: BigInt = digits.parse().map_err(|_| PolyError::Parse(format!("bad number {text}")))?;
                        BigRational::new(n, BigInt::from(10).pow(frac.len() as u32))
                    }
                };
                Ok(constant(value))
            }
            _ => self.err("expected x, y, a number or ("),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_products_and_implicit_multiplication() {
        let g = HomogPoly::parse("(x^2+y^2)(x^2+2y^2)").unwrap();
        assert_eq!(g, HomogPoly::from_ints(&[2, 0, 3, 0, 1]).unwrap());
        assert_eq!(HomogPoly::parse("3xy - y^2").unwrap(), HomogPoly::from_ints(&[-1, 3, 0]).unwrap());
        assert!(matches!(HomogPoly::parse("x^2 + y"), Err(PolyError::NotHomogeneous(..))));
        assert_eq!(HomogPoly::parse("x^2/2 + 0.5y^2").unwrap().to_string(), "(1/2)x^2 + (1/2)y^2");
    }

    #[test]
    fn display_round_trip() {
        let g = HomogPoly::from_ints(&[-3, 0, 1, 7]).unwrap();
        assert_eq!(HomogPoly::parse(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn sturm_counts_distinct_roots() {
        // (t-1)^2 (t+2) has two distinct roots
        let p = UPoly::new([2, -3, 0, 1].iter().map(|&c| BigRational::from_integer(c.into())).collect());
        assert_eq!(p.count_real_roots(), 2);
    }

    #[test]
    fn z_basis_round_trip() {
        let g = HomogPoly::from_ints(&[5, -1, 2, 0, 3]).unwrap();
        assert_eq!(HomogPoly::from_z_basis(&g.z_basis()).unwrap(), g);
    }
}
