//! Sparse multivariate polynomials over `F_p` or `Q`, and reduced fractions
//! of them. The lex-minimal exponent of a polynomial is its monomial
//! valuation, so the `BTreeMap` keying doubles as the value computation.

use std::collections::BTreeMap;
use std::fmt;

use super::scalar::{CoefField, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MPoly {
    pub field: CoefField,
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, Scalar>,
}

impl MPoly {
    pub fn zero(field: CoefField, nvars: usize) -> Self {
        MPoly { field, nvars, terms: BTreeMap::new() }
    }

    pub fn constant(field: CoefField, nvars: usize, c: Scalar) -> Self {
        let mut p = Self::zero(field, nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(field: CoefField, nvars: usize) -> Self {
        Self::constant(field, nvars, field.one())
    }

    pub fn var(field: CoefField, nvars: usize, i: usize) -> Self {
        let mut exp = vec![0; nvars];
        exp[i] = 1;
        let mut p = Self::zero(field, nvars);
        p.terms.insert(exp, field.one());
        p
    }

    pub fn monomial(field: CoefField, exp: Vec<u32>, c: Scalar) -> Self {
        let nvars = exp.len();
        let mut p = Self::zero(field, nvars);
        if !c.is_zero() {
            p.terms.insert(exp, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        if self.is_zero() {
            return Some(self.field.zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    fn insert_term(&mut self, exp: Vec<u32>, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(existing) => {
                *existing = existing.add(&c);
                if existing.is_zero() {
                    self.terms.remove(&exp);
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        let mut out = MPoly::zero(self.field, self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exp: Vec<u32> = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                out.insert_term(exp, ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(self.field, self.nvars);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.mul(c);
        }
        out
    }

    /// Lex-minimal exponent: the monomial valuation of a nonzero polynomial.
    pub fn min_exp(&self) -> Option<&Vec<u32>> {
        self.terms.keys().next()
    }

    pub fn min_coeff(&self) -> Option<&Scalar> {
        self.terms.values().next()
    }

    fn lex_max(&self) -> Option<(&Vec<u32>, &Scalar)> {
        self.terms.iter().next_back()
    }

    /// Componentwise minimum exponent over all terms (the monomial content).
    fn exp_floor(&self) -> Vec<u32> {
        let mut floor = vec![u32::MAX; self.nvars];
        for e in self.terms.keys() {
            for (f, x) in floor.iter_mut().zip(e.iter()) {
                *f = (*f).min(*x);
            }
        }
        floor
    }

    fn shift_down(&self, by: &[u32]) -> MPoly {
        let mut out = MPoly::zero(self.field, self.nvars);
        for (e, c) in &self.terms {
            let exp = e.iter().zip(by.iter()).map(|(x, y)| x - y).collect();
            out.terms.insert(exp, c.clone());
        }
        out
    }

    /// Exact division; `None` when the division does not come out even.
    pub fn div_exact(&self, other: &MPoly) -> Option<MPoly> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(MPoly::zero(self.field, self.nvars));
        }
        if let Some(c) = other.as_constant() {
            return Some(self.scale(&c.inv()?));
        }
        let (le, lc) = other.lex_max().unwrap();
        let (le, lc) = (le.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quot = MPoly::zero(self.field, self.nvars);
        while !rem.is_zero() {
            let (re, rc) = rem.lex_max().unwrap();
            let mut exp = Vec::with_capacity(self.nvars);
            for (x, y) in re.iter().zip(le.iter()) {
                if x < y {
                    return None;
                }
                exp.push(x - y);
            }
            let c = rc.div(&lc).unwrap();
            let t = MPoly::monomial(self.field, exp, c);
            rem = rem.sub(&t.mul(other));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    /// Normalize so the lex-minimal coefficient is 1.
    pub fn normalized(&self) -> MPoly {
        match self.min_coeff() {
            Some(c) => self.scale(&c.inv().unwrap()),
            None => self.clone(),
        }
    }

    /// GCD up to scalars, returned with lex-minimal coefficient 1.
    pub fn gcd(&self, other: &MPoly) -> MPoly {
        if self.is_zero() {
            return other.normalized();
        }
        if other.is_zero() {
            return self.normalized();
        }
        let fa = self.exp_floor();
        let fb = other.exp_floor();
        let common: Vec<u32> = fa.iter().zip(fb.iter()).map(|(x, y)| *x.min(y)).collect();
        let a = self.shift_down(&fa);
        let b = other.shift_down(&fb);
        let core = if self.nvars <= 1 {
            gcd_uni_field(&a, &b)
        } else {
            gcd_recursive(&a, &b)
        };
        let mono = MPoly::monomial(self.field, common, self.field.one());
        core.mul(&mono).normalized()
    }
}

/// Dense view in the last variable with coefficients in the remaining ones.
fn split_last(p: &MPoly) -> Vec<MPoly> {
    let nv = p.nvars - 1;
    let deg = p.terms.keys().map(|e| e[nv]).max().unwrap_or(0) as usize;
    let mut coeffs = vec![MPoly::zero(p.field, nv); deg + 1];
    for (e, c) in &p.terms {
        let i = e[nv] as usize;
        coeffs[i].terms.insert(e[..nv].to_vec(), c.clone());
    }
    coeffs
}

fn join_last(field: CoefField, nvars: usize, coeffs: &[MPoly]) -> MPoly {
    let mut out = MPoly::zero(field, nvars);
    for (i, c) in coeffs.iter().enumerate() {
        for (e, s) in &c.terms {
            let mut exp = e.clone();
            exp.push(i as u32);
            out.terms.insert(exp, s.clone());
        }
    }
    out
}

fn trim(v: &mut Vec<MPoly>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

fn content(coeffs: &[MPoly]) -> MPoly {
    let mut g = coeffs[0].clone();
    for c in &coeffs[1..] {
        g = g.gcd(c);
        if g.is_constant() && !g.is_zero() {
            break;
        }
    }
    g.normalized()
}

fn divide_coeffs(coeffs: &[MPoly], d: &MPoly) -> Vec<MPoly> {
    coeffs
        .iter()
        .map(|c| c.div_exact(d).expect("content divides"))
        .collect()
}

/// Univariate GCD over a coefficient field: plain Euclid on dense vectors.
fn gcd_uni_field(a: &MPoly, b: &MPoly) -> MPoly {
    let field = a.field;
    let to_vec = |p: &MPoly| -> Vec<Scalar> {
        let deg = p.terms.keys().map(|e| e[0]).max().unwrap_or(0) as usize;
        let mut v = vec![field.zero(); deg + 1];
        for (e, c) in &p.terms {
            v[e[0] as usize] = c.clone();
        }
        v
    };
    let trim_s = |v: &mut Vec<Scalar>| {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
    };
    let mut f = to_vec(a);
    let mut g = to_vec(b);
    trim_s(&mut f);
    trim_s(&mut g);
    while !g.is_empty() {
        // f mod g
        let lg = g.last().unwrap().clone();
        while f.len() >= g.len() {
            let lf = f.last().unwrap().clone();
            let c = lf.div(&lg).unwrap();
            let shift = f.len() - g.len();
            for (i, gc) in g.iter().enumerate() {
                let delta = gc.mul(&c);
                f[shift + i] = f[shift + i].sub(&delta);
            }
            trim_s(&mut f);
            if f.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut f, &mut g);
    }
    let mut out = MPoly::zero(field, 1);
    for (i, c) in f.into_iter().enumerate() {
        if !c.is_zero() {
            out.terms.insert(vec![i as u32], c);
        }
    }
    out
}

/// Multivariate GCD by the primitive Euclidean algorithm in the last variable.
fn gcd_recursive(a: &MPoly, b: &MPoly) -> MPoly {
    let field = a.field;
    let nvars = a.nvars;
    let mut fa = split_last(a);
    let mut fb = split_last(b);
    trim(&mut fa);
    trim(&mut fb);
    if fa.len() == 1 && fb.len() == 1 {
        return join_last(field, nvars, &[fa[0].gcd(&fb[0])]);
    }
    let ca = content(&fa);
    let cb = content(&fb);
    let cg = ca.gcd(&cb);
    let mut f = divide_coeffs(&fa, &ca);
    let mut g = divide_coeffs(&fb, &cb);
    if f.len() < g.len() {
        std::mem::swap(&mut f, &mut g);
    }
    while !g.is_empty() {
        if g.len() == 1 {
            // a primitive constant-in-last-variable polynomial divides only content
            let gg = content(&f).gcd(&g[0]);
            let lifted = join_last(field, nvars, &[gg]);
            return lifted.mul(&join_last(field, nvars, &[cg]));
        }
        // pseudo-remainder of f by g
        let lg = g.last().unwrap().clone();
        let mut r = f.clone();
        while r.len() >= g.len() {
            let lr = r.last().unwrap().clone();
            let shift = r.len() - g.len();
            let mut next: Vec<MPoly> = r.iter().map(|c| c.mul(&lg)).collect();
            for (i, gc) in g.iter().enumerate() {
                next[shift + i] = next[shift + i].sub(&gc.mul(&lr));
            }
            r = next;
            trim(&mut r);
        }
        f = g;
        if r.is_empty() {
            g = r;
        } else {
            let cr = content(&r);
            g = divide_coeffs(&r, &cr);
        }
    }
    let cf = content(&f);
    let pp = divide_coeffs(&f, &cf);
    join_last(field, nvars, &pp).mul(&join_last(field, nvars, &[cg]))
}

/// A reduced fraction of multivariate polynomials. The denominator is
/// nonzero, coprime to the numerator, and scaled so its lex-minimal
/// coefficient is 1; this makes the representation unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFun {
    pub num: MPoly,
    pub den: MPoly,
}

impl RatFun {
    pub fn new(num: MPoly, den: MPoly) -> Option<RatFun> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(RatFun { den: MPoly::one(num.field, num.nvars), num });
        }
        let g = num.gcd(&den);
        let num = num.div_exact(&g).expect("gcd divides");
        let den = den.div_exact(&g).expect("gcd divides");
        let c = den.min_coeff().unwrap().inv().unwrap();
        Some(RatFun { num: num.scale(&c), den: den.scale(&c) })
    }

    pub fn from_poly(p: MPoly) -> RatFun {
        let one = MPoly::one(p.field, p.nvars);
        RatFun { num: p, den: one }
    }

    pub fn zero(field: CoefField, nvars: usize) -> RatFun {
        Self::from_poly(MPoly::zero(field, nvars))
    }

    pub fn one(field: CoefField, nvars: usize) -> RatFun {
        Self::from_poly(MPoly::one(field, nvars))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, other: &RatFun) -> RatFun {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        RatFun::new(num, den).unwrap()
    }

    pub fn sub(&self, other: &RatFun) -> RatFun {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatFun {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &RatFun) -> RatFun {
        RatFun::new(self.num.mul(&other.num), self.den.mul(&other.den)).unwrap()
    }

    pub fn inv(&self) -> Option<RatFun> {
        RatFun::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &RatFun) -> Option<RatFun> {
        Some(self.mul(&other.inv()?))
    }

    /// Monomial valuation: lex-min exponent of the numerator minus the
    /// denominator's. `None` for the zero fraction.
    pub fn valuation(&self) -> Option<Vec<i64>> {
        let en = self.num.min_exp()?;
        let ed = self.den.min_exp().expect("nonzero denominator");
        Some(en.iter().zip(ed.iter()).map(|(a, b)| *a as i64 - *b as i64).collect())
    }

    /// Residue of a valuation-zero fraction: ratio of the lex-minimal
    /// coefficients.
    pub fn residue(&self) -> Option<Scalar> {
        match self.valuation() {
            Some(v) if v.iter().all(|&x| x == 0) => {
                self.num.min_coeff().unwrap().div(self.den.min_coeff().unwrap())
            }
            _ => None,
        }
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e.iter().all(|&x| x == 0) {
                write!(f, "{}", c)?;
                continue;
            }
            if !c.is_one() {
                write!(f, "{}*", c)?;
            }
            let mut first_var = true;
            for (i, &x) in e.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                if !first_var {
                    write!(f, "*")?;
                }
                first_var = false;
                write!(f, "v{}", i)?;
                if x > 1 {
                    write!(f, "^{}", x)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().is_some_and(|c| c.is_one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
