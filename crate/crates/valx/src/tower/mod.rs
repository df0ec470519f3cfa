//! Base valued fields and towers of simple extensions with certified
//! monomial valuations.
//!
//! A tower starts from `(Q, nu_p)` or a rational function field with the lex
//! monomial valuation, and grows by totally ramified steps: each new
//! generator comes with a user-certified root value which is validated
//! against the Newton polygon of its minimal polynomial and against the
//! torsion order in the previous value group. Total ramification makes the
//! monomial rule `nu(sum c_i a^i) = min(nu c_i + i nu a)` provably correct
//! and forces uniqueness of the extended valuation.

mod mpoly;
mod scalar;

pub use mpoly::{MPoly, RatFun};
pub use scalar::{CoefField, Scalar};

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::hull::lower_hull;
use crate::valgroup::{rat_int, GroupValue, Rat, SubgroupDesc};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TowerError {
    NonMonic,
    InvalidDegree,
    NotTotallyRamified { torsion: Option<u64>, degree: u64 },
    InconsistentRootValue,
    NonzeroValue,
    NonNegativeValue,
    CharZero,
    NotPowerOfCharExponent,
    DivisionByZero,
    RankMismatch,
    /// A construction-time guarantee failed at run time.
    InternalInvariant(&'static str),
}

impl fmt::Display for TowerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonMonic => write!(f, "minimal polynomial must be monic"),
            Self::InvalidDegree => write!(f, "extension degree must be at least 2"),
            Self::NotTotallyRamified { torsion, degree } => write!(
                f,
                "certified value has torsion order {:?} but the degree is {}",
                torsion, degree
            ),
            Self::InconsistentRootValue => {
                write!(f, "certified value is not a Newton polygon slope of the minimal polynomial")
            }
            Self::NonzeroValue => write!(f, "residue requires a value-zero element"),
            Self::NonNegativeValue => write!(f, "requires an element of negative value"),
            Self::CharZero => write!(f, "requires positive characteristic"),
            Self::NotPowerOfCharExponent => {
                write!(f, "degree over e*f is not a power of the characteristic exponent")
            }
            Self::DivisionByZero => write!(f, "division by zero"),
            Self::RankMismatch => write!(f, "value rank does not match the base field"),
            Self::InternalInvariant(msg) => write!(f, "internal invariant breached: {}", msg),
        }
    }
}

impl std::error::Error for TowerError {}

impl From<crate::valgroup::ValGroupError> for TowerError {
    fn from(_: crate::valgroup::ValGroupError) -> Self {
        TowerError::RankMismatch
    }
}

/// The supported base valued fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseFieldSpec {
    /// `(Q, nu_p)` with `nu p = 1`; residue field `F_p`.
    PAdic { p: u64 },
    /// `k(vars)` with the lex monomial valuation; residue field `k`.
    RatFun { field: CoefField, vars: Vec<String> },
}

impl BaseFieldSpec {
    pub fn rank(&self) -> usize {
        match self {
            BaseFieldSpec::PAdic { .. } => 1,
            BaseFieldSpec::RatFun { vars, .. } => vars.len(),
        }
    }

    /// Field characteristic of the base field itself.
    pub fn characteristic(&self) -> u64 {
        match self {
            BaseFieldSpec::PAdic { .. } => 0,
            BaseFieldSpec::RatFun { field, .. } => field.characteristic(),
        }
    }

    /// Characteristic exponent of the residue field: `p` when positive, 1 otherwise.
    pub fn residue_char_exponent(&self) -> u64 {
        match self {
            BaseFieldSpec::PAdic { p } => *p,
            BaseFieldSpec::RatFun { field, .. } => match field {
                CoefField::Fp(p) => *p,
                CoefField::Q => 1,
            },
        }
    }

    pub fn residue_field_name(&self) -> String {
        match self {
            BaseFieldSpec::PAdic { p } => format!("F{}", p),
            BaseFieldSpec::RatFun { field, .. } => match field {
                CoefField::Fp(p) => format!("F{}", p),
                CoefField::Q => "Q".to_string(),
            },
        }
    }
}

/// An element of the base field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseElem {
    Q(Rat),
    Fun(RatFun),
}

impl BaseElem {
    fn is_zero(&self) -> bool {
        match self {
            BaseElem::Q(q) => q.is_zero(),
            BaseElem::Fun(r) => r.is_zero(),
        }
    }
}

/// A tower element in canonical form: either a base element, or a proper
/// coefficient vector over the previous level (some coefficient of index
/// >= 1 nonzero, all coefficients canonical).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldElement {
    Base(BaseElem),
    Ext { level: usize, coeffs: Vec<FieldElement> },
}

impl FieldElement {
    /// The least tower level containing this element (0 = base field).
    pub fn level(&self) -> usize {
        match self {
            FieldElement::Base(_) => 0,
            FieldElement::Ext { level, .. } => *level,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElement::Base(b) => b.is_zero(),
            FieldElement::Ext { .. } => false,
        }
    }
}

/// One totally ramified extension step.
#[derive(Debug, Clone)]
pub struct Level {
    pub name: String,
    /// Monic minimal polynomial over the previous level, ascending coefficients.
    pub min_poly: Vec<FieldElement>,
    /// Certified (and validated) value of the generator.
    pub root_value: Vec<Rat>,
}

impl Level {
    pub fn degree(&self) -> usize {
        self.min_poly.len() - 1
    }
}

#[derive(Debug, Clone)]
pub struct Tower {
    pub base: BaseFieldSpec,
    pub henselian: bool,
    levels: Vec<Level>,
}

type BezoutTriple = (Vec<FieldElement>, Vec<FieldElement>, Vec<FieldElement>);

fn lex_cmp(a: &[Rat], b: &[Rat]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}

impl Tower {
    pub fn new(base: BaseFieldSpec, henselian: bool) -> Tower {
        Tower { base, henselian, levels: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.base.rank()
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, k: usize) -> &Level {
        &self.levels[k - 1]
    }

    pub fn level_by_name(&self, name: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.name == name).map(|i| i + 1)
    }

    /// Degree of level `k` over the base: the product of the step degrees.
    pub fn degree_over_base(&self, k: usize) -> u64 {
        self.levels[..k].iter().map(|l| l.degree() as u64).product()
    }

    /// Value group of level `k` (0 = base) as a generated subgroup of `Q^r`.
    pub fn value_group(&self, k: usize) -> SubgroupDesc {
        let mut g = SubgroupDesc::standard(self.rank());
        for l in &self.levels[..k] {
            g = g.with_generator(l.root_value.clone());
        }
        g
    }

    // ---- element constructors ----

    pub fn zero(&self) -> FieldElement {
        match &self.base {
            BaseFieldSpec::PAdic { .. } => FieldElement::Base(BaseElem::Q(Rat::zero())),
            BaseFieldSpec::RatFun { field, vars } => {
                FieldElement::Base(BaseElem::Fun(RatFun::zero(*field, vars.len())))
            }
        }
    }

    pub fn one(&self) -> FieldElement {
        self.int_elem(1)
    }

    pub fn int_elem(&self, n: i64) -> FieldElement {
        match &self.base {
            BaseFieldSpec::PAdic { .. } => FieldElement::Base(BaseElem::Q(rat_int(n))),
            BaseFieldSpec::RatFun { field, vars } => FieldElement::Base(BaseElem::Fun(
                RatFun::from_poly(MPoly::constant(*field, vars.len(), field.from_int(n))),
            )),
        }
    }

    /// Embed an exact rational constant; over `F_p` the denominator must be
    /// a unit.
    pub fn rat_elem(&self, q: &Rat) -> Result<FieldElement, TowerError> {
        match &self.base {
            BaseFieldSpec::PAdic { .. } => Ok(FieldElement::Base(BaseElem::Q(q.clone()))),
            BaseFieldSpec::RatFun { field, vars } => {
                let s = field.from_rat(q).ok_or(TowerError::DivisionByZero)?;
                Ok(FieldElement::Base(BaseElem::Fun(RatFun::from_poly(MPoly::constant(
                    *field,
                    vars.len(),
                    s,
                )))))
            }
        }
    }

    /// The i-th base variable of a rational function base field.
    pub fn base_var(&self, i: usize) -> FieldElement {
        match &self.base {
            BaseFieldSpec::RatFun { field, vars } => {
                FieldElement::Base(BaseElem::Fun(RatFun::from_poly(MPoly::var(*field, vars.len(), i))))
            }
            _ => panic!("base_var on a p-adic base"),
        }
    }

    /// The generator of level `k` as an element.
    pub fn generator(&self, k: usize) -> FieldElement {
        let n = self.level(k).degree();
        let mut coeffs = vec![self.zero(); n];
        coeffs[1] = self.one();
        FieldElement::Ext { level: k, coeffs }
    }

    /// Is this element exactly the generator of some level?
    pub fn generator_level(&self, e: &FieldElement) -> Option<usize> {
        (1..=self.num_levels()).find(|&k| &self.generator(k) == e)
    }

    fn make_ext(&self, level: usize, mut coeffs: Vec<FieldElement>) -> FieldElement {
        let n = self.level(level).degree();
        coeffs.resize(n, self.zero());
        if coeffs[1..].iter().all(|c| c.is_zero()) {
            coeffs.swap_remove(0)
        } else {
            FieldElement::Ext { level, coeffs }
        }
    }

    fn coeffs_at(&self, e: &FieldElement, level: usize) -> Vec<FieldElement> {
        let n = self.level(level).degree();
        if e.level() == level {
            match e {
                FieldElement::Ext { coeffs, .. } => coeffs.clone(),
                _ => unreachable!(),
            }
        } else {
            let mut v = vec![self.zero(); n];
            v[0] = e.clone();
            v
        }
    }

    // ---- field arithmetic ----

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let lv = a.level().max(b.level());
        if lv == 0 {
            let (FieldElement::Base(x), FieldElement::Base(y)) = (a, b) else { unreachable!() };
            return FieldElement::Base(match (x, y) {
                (BaseElem::Q(p), BaseElem::Q(q)) => BaseElem::Q(p + q),
                (BaseElem::Fun(p), BaseElem::Fun(q)) => BaseElem::Fun(p.add(q)),
                _ => panic!("mixed base elements"),
            });
        }
        let av = self.coeffs_at(a, lv);
        let bv = self.coeffs_at(b, lv);
        let coeffs = av.iter().zip(bv.iter()).map(|(x, y)| self.add(x, y)).collect();
        self.make_ext(lv, coeffs)
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        match a {
            FieldElement::Base(BaseElem::Q(q)) => FieldElement::Base(BaseElem::Q(-q)),
            FieldElement::Base(BaseElem::Fun(r)) => FieldElement::Base(BaseElem::Fun(r.neg())),
            FieldElement::Ext { level, coeffs } => FieldElement::Ext {
                level: *level,
                coeffs: coeffs.iter().map(|c| self.neg(c)).collect(),
            },
        }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let lv = a.level().max(b.level());
        if lv == 0 {
            let (FieldElement::Base(x), FieldElement::Base(y)) = (a, b) else { unreachable!() };
            return FieldElement::Base(match (x, y) {
                (BaseElem::Q(p), BaseElem::Q(q)) => BaseElem::Q(p * q),
                (BaseElem::Fun(p), BaseElem::Fun(q)) => BaseElem::Fun(p.mul(q)),
                _ => panic!("mixed base elements"),
            });
        }
        if a.is_zero() || b.is_zero() {
            return self.zero();
        }
        let av = self.coeffs_at(a, lv);
        let bv = self.coeffs_at(b, lv);
        let n = self.level(lv).degree();
        let mut conv = vec![self.zero(); 2 * n - 1];
        for (i, x) in av.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in bv.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let prod = self.mul(x, y);
                conv[i + j] = self.add(&conv[i + j], &prod);
            }
        }
        // reduce modulo the monic minimal polynomial
        let mp = &self.level(lv).min_poly;
        for i in (n..conv.len()).rev() {
            if conv[i].is_zero() {
                continue;
            }
            let lead = conv[i].clone();
            conv[i] = self.zero();
            for j in 0..n {
                let t = self.mul(&lead, &mp[j]);
                conv[i - n + j] = self.sub(&conv[i - n + j], &t);
            }
        }
        conv.truncate(n);
        self.make_ext(lv, conv)
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, TowerError> {
        if a.is_zero() {
            return Err(TowerError::DivisionByZero);
        }
        match a {
            FieldElement::Base(BaseElem::Q(q)) => Ok(FieldElement::Base(BaseElem::Q(q.recip()))),
            FieldElement::Base(BaseElem::Fun(r)) => Ok(FieldElement::Base(BaseElem::Fun(
                r.inv().ok_or(TowerError::DivisionByZero)?,
            ))),
            FieldElement::Ext { level, coeffs } => {
                // extended Euclid against the minimal polynomial over level-1
                let lv = *level;
                let modulus = self.level(lv).min_poly.clone();
                let (g, _, t) = self.ext_gcd_vec(&modulus, coeffs)?;
                // g is a nonzero constant (the minimal polynomial is irreducible)
                if g.len() != 1 {
                    return Err(TowerError::InternalInvariant(
                        "minimal polynomial shares a factor with a nonzero element",
                    ));
                }
                let ginv = self.inv(&g[0])?;
                let coeffs = t.iter().map(|c| self.mul(c, &ginv)).collect();
                Ok(self.make_ext(lv, coeffs))
            }
        }
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, TowerError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &FieldElement, n: i64) -> Result<FieldElement, TowerError> {
        if n < 0 {
            return self.pow(&self.inv(a)?, -n);
        }
        let mut out = self.one();
        let mut b = a.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                out = self.mul(&out, &b);
            }
            k >>= 1;
            if k > 0 {
                b = self.mul(&b, &b);
            }
        }
        Ok(out)
    }

    /// Extended gcd of two coefficient vectors (polynomials over some level),
    /// returning `(g, s, t)` with `s*a + t*b = g`.
    fn ext_gcd_vec(
        &self,
        a: &[FieldElement],
        b: &[FieldElement],
    ) -> Result<BezoutTriple, TowerError> {
        let trim = |v: &mut Vec<FieldElement>| {
            while v.last().is_some_and(|c| c.is_zero()) {
                v.pop();
            }
        };
        let mut r0 = a.to_vec();
        let mut r1 = b.to_vec();
        trim(&mut r0);
        trim(&mut r1);
        let mut s0 = vec![self.one()];
        let mut s1: Vec<FieldElement> = vec![];
        let mut t0: Vec<FieldElement> = vec![];
        let mut t1 = vec![self.one()];
        while !r1.is_empty() {
            // r0 = q*r1 + r; long division with leading-coefficient inversion
            let mut q: Vec<FieldElement> = vec![self.zero(); r0.len().saturating_sub(r1.len()) + 1];
            let linv = self.inv(r1.last().unwrap())?;
            while r0.len() >= r1.len() && !r0.is_empty() {
                let c = self.mul(r0.last().unwrap(), &linv);
                let shift = r0.len() - r1.len();
                for (i, rc) in r1.iter().enumerate() {
                    let t = self.mul(&c, rc);
                    r0[shift + i] = self.sub(&r0[shift + i], &t);
                }
                q[shift] = c;
                trim(&mut r0);
            }
            let sub_mul = |x0: &[FieldElement], x1: &[FieldElement], q: &[FieldElement]| {
                // x0 - q*x1
                let mut out = x0.to_vec();
                out.resize(out.len().max(q.len() + x1.len()), self.zero());
                for (i, qc) in q.iter().enumerate() {
                    if qc.is_zero() {
                        continue;
                    }
                    for (j, xc) in x1.iter().enumerate() {
                        let t = self.mul(qc, xc);
                        out[i + j] = self.sub(&out[i + j], &t);
                    }
                }
                while out.last().is_some_and(|c| c.is_zero()) {
                    out.pop();
                }
                out
            };
            let s2 = sub_mul(&s0, &s1, &q);
            let t2 = sub_mul(&t0, &t1, &q);
            std::mem::swap(&mut r0, &mut r1);
            s0 = std::mem::replace(&mut s1, s2);
            t0 = std::mem::replace(&mut t1, t2);
        }
        Ok((r0, s0, t0))
    }

    // ---- valuation ----

    /// Exact value of an element; `inf` for zero. The minimum in the
    /// monomial rule is attained at a unique index (total ramification).
    pub fn value(&self, e: &FieldElement) -> GroupValue {
        match self.value_vec(e) {
            Some(v) => GroupValue::rational(v),
            None => GroupValue::Infinity,
        }
    }

    fn value_vec(&self, e: &FieldElement) -> Option<Vec<Rat>> {
        match e {
            FieldElement::Base(BaseElem::Q(q)) => {
                if q.is_zero() {
                    return None;
                }
                let BaseFieldSpec::PAdic { p } = &self.base else {
                    panic!("rational base element in a function-field tower")
                };
                let v = padic_val(q.numer(), *p) - padic_val(q.denom(), *p);
                Some(vec![rat_int(v)])
            }
            FieldElement::Base(BaseElem::Fun(r)) => {
                r.valuation().map(|v| v.into_iter().map(rat_int).collect())
            }
            FieldElement::Ext { level, coeffs } => {
                let rv = &self.level(*level).root_value;
                let mut best: Option<Vec<Rat>> = None;
                let mut unique = true;
                for (i, c) in coeffs.iter().enumerate() {
                    let Some(cv) = self.value_vec(c) else { continue };
                    let k = rat_int(i as i64);
                    let cand: Vec<Rat> =
                        cv.iter().zip(rv.iter()).map(|(x, y)| x + y * &k).collect();
                    match &best {
                        None => best = Some(cand),
                        Some(b) => match lex_cmp(&cand, b) {
                            Ordering::Less => {
                                best = Some(cand);
                                unique = true;
                            }
                            Ordering::Equal => unique = false,
                            Ordering::Greater => {}
                        },
                    }
                }
                assert!(
                    unique,
                    "monomial values collided; the total ramification certificate is broken"
                );
                best
            }
        }
    }

    /// Residue of a value-zero element, in the common residue field of the
    /// whole tower (total ramification: no residue extension).
    pub fn residue(&self, e: &FieldElement) -> Result<Scalar, TowerError> {
        match self.value(e) {
            GroupValue::Finite(fv) if fv.vec.iter().all(|q| q.is_zero()) => {}
            _ => return Err(TowerError::NonzeroValue),
        }
        self.residue_inner(e)
    }

    fn residue_inner(&self, e: &FieldElement) -> Result<Scalar, TowerError> {
        match e {
            FieldElement::Base(BaseElem::Q(q)) => {
                let BaseFieldSpec::PAdic { p } = &self.base else { unreachable!() };
                let f = CoefField::Fp(*p);
                f.from_rat(q).ok_or(TowerError::NonzeroValue)
            }
            FieldElement::Base(BaseElem::Fun(r)) => {
                r.residue().ok_or(TowerError::NonzeroValue)
            }
            // only the constant monomial can have value zero
            FieldElement::Ext { coeffs, .. } => self.residue_inner(&coeffs[0]),
        }
    }

    // ---- construction ----

    /// Adjoin a root of a monic polynomial with a certified value. The
    /// certificate is validated against the Newton polygon and the torsion
    /// order in the current value group; on success the extension is totally
    /// ramified and the extended valuation is unique.
    pub fn construct_extension(
        &mut self,
        name: &str,
        min_poly: Vec<FieldElement>,
        root_value: Vec<Rat>,
    ) -> Result<(), TowerError> {
        if min_poly.len() < 3 {
            return Err(TowerError::InvalidDegree);
        }
        if min_poly.last().unwrap() != &self.one() {
            return Err(TowerError::NonMonic);
        }
        if root_value.len() != self.rank() {
            return Err(TowerError::RankMismatch);
        }
        let degree = (min_poly.len() - 1) as u64;
        // the certified value must be a Newton polygon slope
        let points: Vec<(usize, Vec<Rat>)> = min_poly
            .iter()
            .enumerate()
            .filter_map(|(i, c)| self.value_vec(c).map(|v| (i, v)))
            .collect();
        let segments = lower_hull(&points);
        let is_slope = segments.iter().any(|(slope, _)| slope == &root_value);
        if !is_slope {
            return Err(TowerError::InconsistentRootValue);
        }
        // total ramification certificate
        let group = self.value_group(self.num_levels());
        let spec = crate::valgroup::GammaSpec::AboveAll { rank: self.rank() };
        let v = GroupValue::rational(root_value.clone());
        let torsion = crate::valgroup::torsion_order(&v, &group, &spec)?;
        if torsion != Some(degree) {
            return Err(TowerError::NotTotallyRamified { torsion, degree });
        }
        self.levels.push(Level { name: name.to_string(), min_poly, root_value });
        Ok(())
    }

    // ---- characteristic-p helpers ----

    /// Root value of an Artin-Schreier polynomial `x^p - x - c` when
    /// `nu c < 0`: exactly `nu c / p`.
    pub fn artin_schreier_root_value(&self, c: &FieldElement) -> Result<GroupValue, TowerError> {
        let p = self.base.characteristic();
        if p == 0 {
            return Err(TowerError::CharZero);
        }
        match self.value(c) {
            GroupValue::Finite(fv) if lex_cmp(&fv.vec, &vec![Rat::zero(); fv.vec.len()]) == Ordering::Less => {
                Ok(GroupValue::rational(
                    fv.vec.iter().map(|q| q / rat_int(p as i64)).collect(),
                ))
            }
            _ => Err(TowerError::NonNegativeValue),
        }
    }
}

/// Defect exponent `d` in `n = e*f*p^d`.
pub fn ostrowski_defect(n: u64, e: u64, f: u64, p: u64) -> Result<u64, TowerError> {
    assert!(n >= 1 && e >= 1 && f >= 1 && p >= 1);
    let ef = e * f;
    if !n.is_multiple_of(ef) {
        return Err(TowerError::NotPowerOfCharExponent);
    }
    let mut q = n / ef;
    if p == 1 {
        return if q == 1 { Ok(0) } else { Err(TowerError::NotPowerOfCharExponent) };
    }
    let mut d = 0;
    while q > 1 {
        if !q.is_multiple_of(p) {
            return Err(TowerError::NotPowerOfCharExponent);
        }
        q /= p;
        d += 1;
    }
    Ok(d)
}

fn padic_val(x: &num_bigint::BigInt, p: u64) -> i64 {
    assert!(!x.is_zero());
    let p = num_bigint::BigInt::from(p);
    let mut n = x.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if r.is_zero() {
            v += 1;
            n = q;
        } else {
            return v;
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::valgroup::rat;

    pub(crate) fn padic_tower(p: u64) -> Tower {
        Tower::new(BaseFieldSpec::PAdic { p }, false)
    }

    pub(crate) fn f3t_tower() -> Tower {
        Tower::new(
            BaseFieldSpec::RatFun { field: CoefField::Fp(3), vars: vec!["t".into()] },
            true,
        )
    }

    /// The tower of Example-type `x^p = 1/p` over `(Q, nu_p)`.
    pub(crate) fn root_of_inverse_p(p: u64) -> Tower {
        let mut t = padic_tower(p);
        let mut mp = vec![t.zero(); p as usize + 1];
        mp[0] = t.rat_elem(&rat(-1, p as i64)).unwrap();
        mp[p as usize] = t.one();
        t.construct_extension("a", mp, vec![rat(-1, p as i64)]).unwrap();
        t
    }

    #[test]
    fn padic_values_and_residues() {
        let t = padic_tower(3);
        let x = t.rat_elem(&rat(18, 5)).unwrap();
        assert_eq!(t.value(&x), GroupValue::scalar(rat_int(2)));
        assert_eq!(t.value(&t.zero()), GroupValue::Infinity);
        // residue(7/4) = 7 * 4^{-1} = 1 in F_3
        let y = t.rat_elem(&rat(7, 4)).unwrap();
        assert_eq!(t.residue(&y).unwrap(), CoefField::Fp(3).from_int(1));
        assert_eq!(t.residue(&x), Err(TowerError::NonzeroValue));
    }

    #[test]
    fn ratfun_values_and_residues() {
        let t = f3t_tower();
        let tt = t.base_var(0);
        let one = t.one();
        // (1+t)/(1-t) has value 0 and residue 1
        let e = t.div(&t.add(&one, &tt), &t.sub(&one, &tt)).unwrap();
        assert_eq!(t.value(&e), GroupValue::zero(1));
        assert_eq!(t.residue(&e).unwrap(), CoefField::Fp(3).from_int(1));
    }

    #[test]
    fn cube_root_tower() {
        let t = root_of_inverse_p(3);
        assert_eq!(t.degree_over_base(1), 3);
        let a = t.generator(1);
        assert_eq!(t.value(&a), GroupValue::scalar(rat(-1, 3)));
        // value(3*a^2) = 1 - 2/3 = 1/3 by the monomial rule
        let three = t.int_elem(3);
        let a2 = t.mul(&a, &a);
        assert_eq!(t.value(&t.mul(&three, &a2)), GroupValue::scalar(rat(1, 3)));
        // and a^2/3 has value -2/3 - 1 = -5/3
        let third = t.rat_elem(&rat(1, 3)).unwrap();
        assert_eq!(t.value(&t.mul(&a2, &third)), GroupValue::scalar(rat(-5, 3)));
        // residue(1 + 3a) = 1: the 3a term has value 2/3 > 0
        let e = t.add(&t.one(), &t.mul(&three, &a));
        assert_eq!(t.residue(&e).unwrap(), CoefField::Fp(3).from_int(1));
        // a * a^2 = 1/3 exactly
        let a3 = t.mul(&a, &a2);
        assert_eq!(a3, t.rat_elem(&rat(1, 3)).unwrap());
        // field inverse: a^{-1} = 3 a^2
        let ainv = t.inv(&a).unwrap();
        assert_eq!(ainv, t.mul(&three, &a2));
    }

    #[test]
    fn construction_rejects_bad_certificates() {
        let mut t = f3t_tower();
        let tt = t.base_var(0);
        let inv_t = t.inv(&tt).unwrap();
        // x^2 - 1/t with certified value -1/3: not a polygon slope
        let mp = vec![t.neg(&inv_t), t.zero(), t.one()];
        assert_eq!(
            t.construct_extension("a", mp.clone(), vec![rat(-1, 3)]),
            Err(TowerError::InconsistentRootValue)
        );
        // with the correct slope it succeeds
        t.construct_extension("a", mp, vec![rat(-1, 2)]).unwrap();
        assert_eq!(t.value(&t.generator(1)), GroupValue::scalar(rat(-1, 2)));
        assert_eq!(t.value_group(1).gens.last().unwrap(), &vec![rat(-1, 2)]);
    }

    #[test]
    fn construction_rejects_non_monic_and_unramified() {
        let mut t = padic_tower(3);
        let two = t.int_elem(2);
        let mp = vec![t.int_elem(-1), t.zero(), two];
        assert_eq!(t.construct_extension("a", mp, vec![rat_int(0)]), Err(TowerError::NonMonic));
        // x^2 - 9: slope 1 has torsion order 1 != 2
        let mp = vec![t.int_elem(-9), t.zero(), t.one()];
        assert_eq!(
            t.construct_extension("a", mp, vec![rat_int(1)]),
            Err(TowerError::NotTotallyRamified { torsion: Some(1), degree: 2 })
        );
    }

    #[test]
    fn two_step_tower_values() {
        // F_3(u,v), then b with x^3 + u x + v, then a with a^3 = b
        let mut t = Tower::new(
            BaseFieldSpec::RatFun {
                field: CoefField::Fp(3),
                vars: vec!["u".into(), "v".into()],
            },
            true,
        );
        let u = t.base_var(0);
        let v = t.base_var(1);
        t.construct_extension(
            "b",
            vec![v.clone(), u.clone(), t.zero(), t.one()],
            vec![rat_int(0), rat(1, 3)],
        )
        .unwrap();
        let b = t.generator(1);
        t.construct_extension(
            "a",
            vec![t.neg(&b), t.zero(), t.zero(), t.one()],
            vec![rat_int(0), rat(1, 9)],
        )
        .unwrap();
        let a = t.generator(2);
        assert_eq!(t.value(&a), GroupValue::rational(vec![rat_int(0), rat(1, 9)]));
        assert_eq!(t.degree_over_base(2), 9);
        // a^3 = b and a^9 = b^3 = -(u b + v)
        assert_eq!(t.pow(&a, 3).unwrap(), b);
        let b3 = t.pow(&b, 3).unwrap();
        assert_eq!(b3, t.neg(&t.add(&t.mul(&u, &b), &v)));
        // the minimal polynomial of a over the base vanishes: a^9 + u a^3 + v = 0
        let m = t.add(&t.add(&t.pow(&a, 9).unwrap(), &t.mul(&u, &t.pow(&a, 3).unwrap())), &v);
        assert!(m.is_zero());
    }

    #[test]
    fn valuation_axioms_fuzz() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let t = root_of_inverse_p(3);
        let a = t.generator(1);
        let spec = crate::valgroup::GammaSpec::AboveAll { rank: 1 };
        let sample = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut e = t.zero();
            for i in 0..3 {
                let c = t.rat_elem(&rat(rng.gen_range(-6..7), rng.gen_range(1..5))).unwrap();
                let m = t.mul(&c, &t.pow(&a, i).unwrap());
                e = t.add(&e, &m);
            }
            e
        };
        for _ in 0..400 {
            let x = sample(&mut rng);
            let y = sample(&mut rng);
            let vx = t.value(&x);
            let vy = t.value(&y);
            // multiplicativity
            assert_eq!(t.value(&t.mul(&x, &y)), vx.add(&vy).unwrap());
            // ultrametric inequality, with equality on distinct values
            let vsum = t.value(&t.add(&x, &y));
            let min = spec.min(&vx, &vy).unwrap().clone();
            let c = spec.cmp(&vsum, &min).unwrap();
            assert_ne!(c, Ordering::Less);
            if spec.cmp(&vx, &vy).unwrap() != Ordering::Equal {
                assert_eq!(c, Ordering::Equal);
            }
        }
    }

    #[test]
    fn valuation_axioms_at_level_two_rank_two() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        let mut t = Tower::new(
            BaseFieldSpec::RatFun {
                field: CoefField::Fp(3),
                vars: vec!["u".into(), "v".into()],
            },
            false,
        );
        let u = t.base_var(0);
        let v = t.base_var(1);
        t.construct_extension(
            "b",
            vec![v.clone(), u.clone(), t.zero(), t.one()],
            vec![rat_int(0), rat(1, 3)],
        )
        .unwrap();
        let b = t.generator(1);
        t.construct_extension(
            "a",
            vec![t.neg(&b), t.zero(), t.zero(), t.one()],
            vec![rat_int(0), rat(1, 9)],
        )
        .unwrap();
        let a = t.generator(2);
        let spec = crate::valgroup::GammaSpec::AboveAll { rank: 2 };
        let sample = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut e = t.zero();
            for i in 0..3 {
                let c = t.int_elem(rng.gen_range(0..3));
                let m = t.mul(&c, &t.pow(&u, rng.gen_range(-1..2)).unwrap());
                let m = t.mul(&m, &t.pow(&v, rng.gen_range(0..2)).unwrap());
                let m = t.mul(&m, &t.pow(&b, rng.gen_range(0..2)).unwrap());
                let m = t.mul(&m, &t.pow(&a, i).unwrap());
                e = t.add(&e, &m);
            }
            e
        };
        for _ in 0..150 {
            let x = sample(&mut rng);
            let y = sample(&mut rng);
            let vx = t.value(&x);
            let vy = t.value(&y);
            assert_eq!(t.value(&t.mul(&x, &y)), vx.add(&vy).unwrap());
            let vsum = t.value(&t.add(&x, &y));
            let min = spec.min(&vx, &vy).unwrap().clone();
            let c = spec.cmp(&vsum, &min).unwrap();
            assert_ne!(c, Ordering::Less);
            if spec.cmp(&vx, &vy).unwrap() != Ordering::Equal {
                assert_eq!(c, Ordering::Equal);
            }
        }
    }

    #[test]
    fn artin_schreier_values() {
        let t = f3t_tower();
        let tt = t.base_var(0);
        let c = t.inv(&tt).unwrap();
        assert_eq!(
            t.artin_schreier_root_value(&c).unwrap(),
            GroupValue::scalar(rat(-1, 3))
        );
        let c2 = t.inv(&t.mul(&tt, &tt)).unwrap();
        assert_eq!(
            t.artin_schreier_root_value(&c2).unwrap(),
            GroupValue::scalar(rat(-2, 3))
        );
        assert_eq!(t.artin_schreier_root_value(&tt), Err(TowerError::NonNegativeValue));
        let q = padic_tower(3);
        let e = q.rat_elem(&rat(1, 3)).unwrap();
        assert_eq!(q.artin_schreier_root_value(&e), Err(TowerError::CharZero));
        // scaling back by p recovers the value exactly
        let v = t.artin_schreier_root_value(&c).unwrap();
        assert_eq!(v.int_scale(3), t.value(&c));
    }

    #[test]
    fn ostrowski_table() {
        for p in [2u64, 3, 5] {
            assert_eq!(ostrowski_defect(p, p, 1, p).unwrap(), 0);
            assert_eq!(ostrowski_defect(p, 1, 1, p).unwrap(), 1);
        }
        assert_eq!(ostrowski_defect(6, 2, 3, 5).unwrap(), 0);
        assert_eq!(ostrowski_defect(12, 2, 3, 2).unwrap(), 1);
        assert_eq!(
            ostrowski_defect(6, 1, 1, 5),
            Err(TowerError::NotPowerOfCharExponent)
        );
        assert_eq!(
            ostrowski_defect(6, 2, 3, 1).unwrap(), 0
        );
        assert_eq!(
            ostrowski_defect(12, 2, 3, 1),
            Err(TowerError::NotPowerOfCharExponent)
        );
    }

    #[test]
    fn residue_is_multiplicative() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let t = root_of_inverse_p(5);
        for _ in 0..100 {
            let unit = |rng: &mut rand_chacha::ChaCha8Rng| {
                // value-zero elements: unit constant plus higher-value noise
                let c = t.int_elem(rng.gen_range(1..5));
                let a = t.generator(1);
                let noise = t.mul(&t.int_elem(5 * rng.gen_range(0..3)), &a);
                t.add(&c, &noise)
            };
            let x = unit(&mut rng);
            let y = unit(&mut rng);
            let lhs = t.residue(&t.mul(&x, &y)).unwrap();
            let rhs = t.residue(&x).unwrap().mul(&t.residue(&y).unwrap());
            assert_eq!(lhs, rhs);
            // additivity whenever the sum still has value zero
            let sum = t.add(&x, &y);
            if t.value(&sum) == GroupValue::zero(1) {
                let ladd = t.residue(&sum).unwrap();
                let radd = t.residue(&x).unwrap().add(&t.residue(&y).unwrap());
                assert_eq!(ladd, radd);
            }
        }
    }
}
