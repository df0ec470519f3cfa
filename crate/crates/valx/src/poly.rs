//! Dense polynomial arithmetic over tower levels, characteristic-safe
//! Taylor expansion, and Q-expansion.

use std::fmt;

use crate::tower::{FieldElement, Tower};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolyError {
    NonMonicQ,
    NonMonicDivisor,
    ZeroDivisor,
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonMonicQ => write!(f, "Q-expansion requires a monic Q"),
            Self::NonMonicDivisor => write!(f, "division requires a monic divisor"),
            Self::ZeroDivisor => write!(f, "division by the zero polynomial"),
        }
    }
}

impl std::error::Error for PolyError {}

/// A dense polynomial with tower-element coefficients in ascending order.
/// No trailing zeros; the zero polynomial is the empty vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<FieldElement>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<FieldElement>) -> Poly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: FieldElement) -> Poly {
        Poly::new(vec![c])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` is the degree of the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }

    pub fn is_monic(&self, tower: &Tower) -> bool {
        self.leading() == Some(&tower.one())
    }

    /// Maximum tower level among the coefficients.
    pub fn level(&self) -> usize {
        self.coeffs.iter().map(|c| c.level()).max().unwrap_or(0)
    }
}

pub fn add(tower: &Tower, f: &Poly, g: &Poly) -> Poly {
    let n = f.coeffs.len().max(g.coeffs.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a = f.coeffs.get(i).cloned().unwrap_or_else(|| tower.zero());
        let b = g.coeffs.get(i).cloned().unwrap_or_else(|| tower.zero());
        out.push(tower.add(&a, &b));
    }
    Poly::new(out)
}

pub fn neg(tower: &Tower, f: &Poly) -> Poly {
    Poly::new(f.coeffs.iter().map(|c| tower.neg(c)).collect())
}

pub fn sub(tower: &Tower, f: &Poly, g: &Poly) -> Poly {
    add(tower, f, &neg(tower, g))
}

pub fn mul(tower: &Tower, f: &Poly, g: &Poly) -> Poly {
    if f.is_zero() || g.is_zero() {
        return Poly::zero();
    }
    let mut out = vec![tower.zero(); f.coeffs.len() + g.coeffs.len() - 1];
    for (i, a) in f.coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in g.coeffs.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            let p = tower.mul(a, b);
            out[i + j] = tower.add(&out[i + j], &p);
        }
    }
    Poly::new(out)
}

pub fn scale(tower: &Tower, f: &Poly, c: &FieldElement) -> Poly {
    Poly::new(f.coeffs.iter().map(|x| tower.mul(x, c)).collect())
}

pub fn eval(tower: &Tower, f: &Poly, x: &FieldElement) -> FieldElement {
    let mut acc = tower.zero();
    for c in f.coeffs.iter().rev() {
        acc = tower.add(&tower.mul(&acc, x), c);
    }
    acc
}

/// Exact division with remainder by a monic divisor.
pub fn divmod(tower: &Tower, f: &Poly, g: &Poly) -> Result<(Poly, Poly), PolyError> {
    if g.is_zero() {
        return Err(PolyError::ZeroDivisor);
    }
    if !g.is_monic(tower) {
        return Err(PolyError::NonMonicDivisor);
    }
    let (q, r) = divmod_unchecked(tower, f, g);
    Ok((q, r))
}

/// Division by an arbitrary nonzero divisor, normalizing internally by the
/// leading-coefficient inverse. Used by gcd.
fn divmod_unchecked(tower: &Tower, f: &Poly, g: &Poly) -> (Poly, Poly) {
    let dg = g.degree().expect("nonzero divisor");
    let mut rem = f.coeffs.clone();
    let linv = tower
        .inv(g.leading().unwrap())
        .expect("nonzero leading coefficient");
    let mut quot = vec![tower.zero(); rem.len().saturating_sub(dg)];
    while rem.len() > dg {
        let c = tower.mul(rem.last().unwrap(), &linv);
        let shift = rem.len() - 1 - dg;
        if !c.is_zero() {
            for (i, gc) in g.coeffs.iter().enumerate() {
                let t = tower.mul(&c, gc);
                rem[shift + i] = tower.sub(&rem[shift + i], &t);
            }
            quot[shift] = c;
        }
        rem.pop();
        while rem.last().is_some_and(|c| c.is_zero()) {
            rem.pop();
        }
        if rem.len() <= dg {
            break;
        }
    }
    (Poly::new(quot), Poly::new(rem))
}

/// Taylor coefficients `[c_0..c_n]` of `f` about `a`, by iterated synthetic
/// division by `(x - a)`. No factorials, so this is valid in every
/// characteristic; the reconstruction `sum c_i (x-a)^i` is exact.
pub fn taylor_expand(tower: &Tower, f: &Poly, a: &FieldElement) -> Vec<FieldElement> {
    let mut out = Vec::with_capacity(f.coeffs.len());
    let mut cur = f.coeffs.clone();
    while !cur.is_empty() {
        // synthetic division by (x - a): cur becomes the quotient and the
        // remainder cur(a) is the next Taylor coefficient
        let mut quot = vec![tower.zero(); cur.len() - 1];
        let mut carry = tower.zero();
        for i in (0..cur.len()).rev() {
            let v = tower.add(&cur[i], &tower.mul(&carry, a));
            if i == 0 {
                out.push(v);
            } else {
                quot[i - 1] = v.clone();
                carry = v;
            }
        }
        cur = quot;
    }
    out
}

/// The unique expansion `f = f_0 + f_1 Q + ... + f_r Q^r` with
/// `deg f_i < deg Q`, by iterated Euclidean division.
pub fn q_expand(tower: &Tower, f: &Poly, q: &Poly) -> Result<Vec<Poly>, PolyError> {
    if q.is_zero() || q.degree() == Some(0) {
        return Err(PolyError::NonMonicQ);
    }
    if !q.is_monic(tower) {
        return Err(PolyError::NonMonicQ);
    }
    let mut out = Vec::new();
    let mut cur = f.clone();
    loop {
        let (quot, rem) = divmod(tower, &cur, q)?;
        out.push(rem);
        if quot.is_zero() {
            break;
        }
        cur = quot;
    }
    Ok(out)
}

/// Formal derivative; coefficient multipliers pass through the base field,
/// so characteristic-p collapse is automatic.
pub fn derivative(tower: &Tower, f: &Poly) -> Poly {
    let mut out = Vec::new();
    for (i, c) in f.coeffs.iter().enumerate().skip(1) {
        out.push(tower.mul(&tower.int_elem(i as i64), c));
    }
    Poly::new(out)
}

/// Monic gcd over the tower field.
pub fn gcd(tower: &Tower, f: &Poly, g: &Poly) -> Poly {
    let mut a = f.clone();
    let mut b = g.clone();
    while !b.is_zero() {
        let (_, r) = divmod_unchecked(tower, &a, &b);
        a = b;
        b = r;
    }
    if let Some(lead) = a.leading() {
        let linv = tower.inv(lead).expect("nonzero leading coefficient");
        return scale(tower, &a, &linv);
    }
    a
}

/// Separability: gcd(f, f') is constant. The convention that `f' = 0`
/// reports inseparable is automatic (gcd(f, 0) = f, nonconstant).
pub fn is_separable(tower: &Tower, f: &Poly) -> bool {
    if f.degree().is_none_or(|d| d == 0) {
        return false;
    }
    let d = derivative(tower, f);
    gcd(tower, f, &d).degree() == Some(0)
}
