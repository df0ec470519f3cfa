//! Exact arithmetic and total order for value groups of the form
//! `(Q^r, lex)` augmented by one distinguished element `gamma`, together
//! with the formal value of zero.
//!
//! Every value carried around by the rest of the crate is a [`GroupValue`]:
//! either `inf` (the value of 0) or a rational vector plus an integer
//! multiple of `gamma`. How `gamma` sits relative to the rational vectors
//! is fixed by a [`GammaSpec`], and all comparisons go through
//! [`GammaSpec::cmp`].

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational scalar used throughout.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValGroupError {
    /// Two values (or a value and a spec/subgroup) disagree on the ambient rank.
    RankMismatch,
    /// Dividing the gamma coefficient by an integer that does not divide it:
    /// the group is `nu K + Z*gamma`, not its divisible hull.
    NonIntegralGammaDivision,
    /// An operation required a finite value but received `inf`.
    InfiniteValue,
}

impl fmt::Display for ValGroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RankMismatch => write!(f, "rank mismatch between values"),
            Self::NonIntegralGammaDivision => {
                write!(f, "gamma coefficient is not divisible by the requested integer")
            }
            Self::InfiniteValue => write!(f, "operation requires a finite value"),
        }
    }
}

impl std::error::Error for ValGroupError {}

/// Where `gamma` sits relative to the divisible hull of the rational lattice.
///
/// `RationalPoint` pins gamma to a rational position (the residue
/// transcendental regime); `QuadIrr` places it at `q0 + q1*sqrt(d)` in the
/// lex-leading coordinate, zero elsewhere; `AboveAll` makes it larger than
/// every rational vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GammaSpec {
    RationalPoint(Vec<Rat>),
    QuadIrr { q0: Rat, q1: Rat, d: u64 },
    AboveAll { rank: usize },
}

impl GammaSpec {
    pub fn rational_scalar(q: Rat) -> Self {
        GammaSpec::RationalPoint(vec![q])
    }

    /// QuadIrr with the discriminant reduced to squarefree form, so that
    /// structural equality of specs is equality of the gamma positions.
    pub fn quadirr(q0: Rat, mut q1: Rat, mut d: u64) -> Self {
        assert!(d > 0 && !q1.is_zero(), "quadirr needs d > 0 and q1 != 0");
        let mut f = 2u64;
        while f * f <= d {
            while d.is_multiple_of(f * f) {
                d /= f * f;
                q1 *= rat_int(f as i64);
            }
            f += 1;
        }
        assert!(d > 1, "discriminant must not be a perfect square");
        GammaSpec::QuadIrr { q0, q1, d }
    }

    /// The `gamma` element itself, in canonical form for this spec.
    pub fn gamma(&self, rank: usize) -> GroupValue {
        match self {
            GammaSpec::RationalPoint(pos) => GroupValue::finite(pos.clone(), 0),
            _ => GroupValue::finite(vec![Rat::zero(); rank], 1),
        }
    }

    pub fn rank_ok(&self, rank: usize) -> bool {
        match self {
            GammaSpec::RationalPoint(pos) => pos.len() == rank,
            GammaSpec::QuadIrr { .. } => rank >= 1,
            GammaSpec::AboveAll { rank: r } => *r == rank,
        }
    }

    /// Canonical form of a value under this spec: with gamma at a rational
    /// position the gamma coefficient folds into the vector part, so all
    /// residue-transcendental arithmetic is purely rational.
    pub fn normalize(&self, v: &GroupValue) -> GroupValue {
        match (self, v) {
            (GammaSpec::RationalPoint(pos), GroupValue::Finite(fv)) if fv.gcoef != 0 => {
                let k = rat_int(fv.gcoef);
                let vec = fv
                    .vec
                    .iter()
                    .zip(pos.iter())
                    .map(|(a, p)| a + p * &k)
                    .collect();
                GroupValue::finite(vec, 0)
            }
            _ => v.clone(),
        }
    }

    /// Total order on the value group. `inf` exceeds every finite value.
    pub fn cmp(&self, v: &GroupValue, w: &GroupValue) -> Result<Ordering, ValGroupError> {
        match (v, w) {
            (GroupValue::Infinity, GroupValue::Infinity) => Ok(Ordering::Equal),
            (GroupValue::Infinity, _) => Ok(Ordering::Greater),
            (_, GroupValue::Infinity) => Ok(Ordering::Less),
            (GroupValue::Finite(a), GroupValue::Finite(b)) => {
                if a.vec.len() != b.vec.len() || !self.rank_ok(a.vec.len()) {
                    return Err(ValGroupError::RankMismatch);
                }
                let dg = a.gcoef - b.gcoef;
                let dvec: Vec<Rat> = a.vec.iter().zip(b.vec.iter()).map(|(x, y)| x - y).collect();
                Ok(self.sign(&dvec, dg))
            }
        }
    }

    /// Sign of `dvec + dg*gamma` as an Ordering against zero.
    fn sign(&self, dvec: &[Rat], dg: i64) -> Ordering {
        match self {
            GammaSpec::RationalPoint(pos) => {
                let k = rat_int(dg);
                for (x, p) in dvec.iter().zip(pos.iter()) {
                    let c = x + p * &k;
                    match c.cmp(&Rat::zero()) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                Ordering::Equal
            }
            GammaSpec::QuadIrr { q0, q1, d } => {
                let k = rat_int(dg);
                let a = &dvec[0] + q0 * &k;
                let b = q1 * &k;
                match quad_sign(&a, &b, *d) {
                    Ordering::Equal => lex_sign(&dvec[1..]),
                    ord => ord,
                }
            }
            GammaSpec::AboveAll { .. } => match dg.cmp(&0) {
                Ordering::Equal => lex_sign(dvec),
                ord => ord,
            },
        }
    }

    pub fn min<'a>(
        &self,
        v: &'a GroupValue,
        w: &'a GroupValue,
    ) -> Result<&'a GroupValue, ValGroupError> {
        Ok(match self.cmp(v, w)? {
            Ordering::Greater => w,
            _ => v,
        })
    }

    pub fn max<'a>(
        &self,
        v: &'a GroupValue,
        w: &'a GroupValue,
    ) -> Result<&'a GroupValue, ValGroupError> {
        Ok(match self.cmp(v, w)? {
            Ordering::Less => w,
            _ => v,
        })
    }
}

/// Sign of `a + b*sqrt(d)` by exact rationalization: at most one squaring.
fn quad_sign(a: &Rat, b: &Rat, d: u64) -> Ordering {
    let zero = Rat::zero();
    let sa = a.cmp(&zero);
    let sb = b.cmp(&zero);
    match (sa, sb) {
        (Ordering::Equal, s) => s,
        (s, Ordering::Equal) => s,
        (x, y) if x == y => x,
        _ => {
            // opposite signs: compare a^2 against b^2*d
            let a2 = a * a;
            let b2d = b * b * rat_int(d as i64);
            match a2.cmp(&b2d) {
                Ordering::Greater => sa,
                Ordering::Less => sb,
                // equal would force sqrt(d) rational; d is required nonsquare
                Ordering::Equal => unreachable!("nonsquare discriminant"),
            }
        }
    }
}

fn lex_sign(v: &[Rat]) -> Ordering {
    for x in v {
        match x.cmp(&Rat::zero()) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}

/// A value: `inf` or a rational vector plus an integer multiple of gamma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupValue {
    Infinity,
    Finite(FiniteValue),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteValue {
    pub vec: Vec<Rat>,
    pub gcoef: i64,
}

impl GroupValue {
    pub fn finite(vec: Vec<Rat>, gcoef: i64) -> Self {
        GroupValue::Finite(FiniteValue { vec, gcoef })
    }

    pub fn rational(vec: Vec<Rat>) -> Self {
        Self::finite(vec, 0)
    }

    pub fn scalar(q: Rat) -> Self {
        Self::finite(vec![q], 0)
    }

    pub fn zero(rank: usize) -> Self {
        Self::finite(vec![Rat::zero(); rank], 0)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, GroupValue::Infinity)
    }

    pub fn as_finite(&self) -> Result<&FiniteValue, ValGroupError> {
        match self {
            GroupValue::Finite(fv) => Ok(fv),
            GroupValue::Infinity => Err(ValGroupError::InfiniteValue),
        }
    }

    pub fn rank(&self) -> Option<usize> {
        match self {
            GroupValue::Finite(fv) => Some(fv.vec.len()),
            GroupValue::Infinity => None,
        }
    }

    /// Componentwise exact addition; `inf` is absorbing.
    pub fn add(&self, other: &GroupValue) -> Result<GroupValue, ValGroupError> {
        match (self, other) {
            (GroupValue::Infinity, _) | (_, GroupValue::Infinity) => Ok(GroupValue::Infinity),
            (GroupValue::Finite(a), GroupValue::Finite(b)) => {
                if a.vec.len() != b.vec.len() {
                    return Err(ValGroupError::RankMismatch);
                }
                let vec = a.vec.iter().zip(b.vec.iter()).map(|(x, y)| x + y).collect();
                Ok(GroupValue::finite(vec, a.gcoef + b.gcoef))
            }
        }
    }

    pub fn sub(&self, other: &GroupValue) -> Result<GroupValue, ValGroupError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GroupValue {
        match self {
            GroupValue::Infinity => GroupValue::Infinity,
            GroupValue::Finite(a) => {
                GroupValue::finite(a.vec.iter().map(|x| -x).collect(), -a.gcoef)
            }
        }
    }

    pub fn int_scale(&self, n: i64) -> GroupValue {
        match self {
            GroupValue::Infinity => GroupValue::Infinity,
            GroupValue::Finite(a) => {
                let k = rat_int(n);
                GroupValue::finite(a.vec.iter().map(|x| x * &k).collect(), a.gcoef * n)
            }
        }
    }

    /// Exact division by a positive integer. The vector part always divides;
    /// the gamma coefficient must be divisible or the result would leave
    /// `nu K + Z*gamma`.
    pub fn div_int(&self, n: i64) -> Result<GroupValue, ValGroupError> {
        assert!(n > 0, "div_int by nonpositive integer");
        match self {
            GroupValue::Infinity => Ok(GroupValue::Infinity),
            GroupValue::Finite(a) => {
                if a.gcoef % n != 0 {
                    return Err(ValGroupError::NonIntegralGammaDivision);
                }
                let k = rat_int(n);
                Ok(GroupValue::finite(
                    a.vec.iter().map(|x| x / &k).collect(),
                    a.gcoef / n,
                ))
            }
        }
    }
}

impl fmt::Display for GroupValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupValue::Infinity => write!(f, "inf"),
            GroupValue::Finite(fv) => {
                if fv.vec.len() == 1 {
                    write!(f, "{}", fv.vec[0])?;
                } else {
                    write!(f, "(")?;
                    for (i, q) in fv.vec.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", q)?;
                    }
                    write!(f, ")")?;
                }
                match fv.gcoef.cmp(&0) {
                    Ordering::Equal => Ok(()),
                    Ordering::Greater => write!(f, "+{}*gamma", fv.gcoef),
                    Ordering::Less => write!(f, "-{}*gamma", -fv.gcoef),
                }
            }
        }
    }
}

/// Parse the textual rendering produced by `Display`: `inf`, `n/d`,
/// `(q1,...,qr)`, each optionally followed by `+k*gamma` or `-k*gamma`.
/// Whitespace-insensitive.
pub fn parse_group_value(s: &str) -> Result<GroupValue, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact == "inf" {
        return Ok(GroupValue::Infinity);
    }
    // strip a trailing "+k*gamma" / "-k*gamma" term; the coefficient is a
    // signed integer, so scan back over its digits to the sign
    let (vec_part, gcoef) = match compact.strip_suffix("*gamma") {
        Some(head) => {
            let bytes = head.as_bytes();
            let mut i = head.len();
            while i > 0 && bytes[i - 1].is_ascii_digit() {
                i -= 1;
            }
            if i == 0 || i == head.len() || !(bytes[i - 1] == b'+' || bytes[i - 1] == b'-') {
                return Err(format!("bad gamma term in '{}'", s));
            }
            let k: i64 = head[i - 1..]
                .parse()
                .map_err(|_| format!("bad gamma coefficient in '{}'", s))?;
            (head[..i - 1].to_string(), k)
        }
        None => (compact, 0),
    };
    let vec = if let Some(inner) = vec_part.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        inner
            .split(',')
            .map(parse_rat)
            .collect::<Result<Vec<_>, _>>()?
    } else {
        vec![parse_rat(&vec_part)?]
    };
    Ok(GroupValue::finite(vec, gcoef))
}

pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().map_err(|_| format!("bad rational '{}'", s))?;
            let d: BigInt = d.parse().map_err(|_| format!("bad rational '{}'", s))?;
            if d.is_zero() {
                return Err(format!("zero denominator in '{}'", s));
            }
            Ok(Rat::new(n, d))
        }
        None => {
            let n: BigInt = t.parse().map_err(|_| format!("bad rational '{}'", s))?;
            Ok(Rat::from_integer(n))
        }
    }
}

/// A finitely generated subgroup of `Q^r`, given by generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupDesc {
    pub rank: usize,
    pub gens: Vec<Vec<Rat>>,
}

impl SubgroupDesc {
    pub fn new(rank: usize, gens: Vec<Vec<Rat>>) -> Self {
        SubgroupDesc { rank, gens }
    }

    /// The standard lattice `Z^r`.
    pub fn standard(rank: usize) -> Self {
        let mut gens = Vec::new();
        for i in 0..rank {
            let mut g = vec![Rat::zero(); rank];
            g[i] = Rat::one();
            gens.push(g);
        }
        SubgroupDesc { rank, gens }
    }

    pub fn with_generator(&self, g: Vec<Rat>) -> Self {
        let mut gens = self.gens.clone();
        gens.push(g);
        SubgroupDesc { rank: self.rank, gens }
    }

    pub fn contains(&self, v: &[Rat]) -> Result<bool, ValGroupError> {
        Ok(matches!(self.coordinates_scaled(v)?, Some((_, e)) if e == 1))
    }

    /// Echelon basis of the integer lattice obtained by clearing denominators,
    /// together with the scaling factor used.
    fn integer_basis(&self) -> (BigInt, Vec<Vec<BigInt>>) {
        let mut denom = BigInt::one();
        for g in &self.gens {
            for q in g {
                denom = denom.lcm(q.denom());
            }
        }
        let cols: Vec<Vec<BigInt>> = self
            .gens
            .iter()
            .map(|g| {
                g.iter()
                    .map(|q| q.numer() * (&denom / q.denom()))
                    .collect()
            })
            .filter(|c: &Vec<BigInt>| c.iter().any(|x| !x.is_zero()))
            .collect();
        (denom, hermite_echelon(cols, self.rank))
    }

    /// A canonical generator set: echelon basis with positive leading
    /// entries and reduced off-pivot entries, scaled back to rationals.
    pub fn canonical_gens(&self) -> Vec<Vec<Rat>> {
        let (denom, mut basis) = self.integer_basis();
        for col in basis.iter_mut() {
            let lead = col.iter().find(|x| !x.is_zero()).cloned().unwrap();
            if lead < BigInt::zero() {
                for x in col.iter_mut() {
                    *x = -(x.clone());
                }
            }
        }
        // reduce entries of earlier columns at later pivot rows
        for i in 0..basis.len() {
            let prow = basis[i].iter().position(|x| !x.is_zero()).unwrap();
            let pivot = basis[i][prow].clone();
            let col = basis[i].clone();
            for other in basis.iter_mut().take(i) {
                let q = other[prow].div_floor(&pivot);
                if !q.is_zero() {
                    for (x, bi) in other.iter_mut().zip(col.iter()) {
                        *x -= &q * bi;
                    }
                }
            }
        }
        basis
            .iter()
            .map(|col| {
                col.iter()
                    .map(|x| Rat::new(x.clone(), denom.clone()))
                    .collect()
            })
            .collect()
    }

    /// Solve `sum y_i b_i = v` over `Q` against the lattice basis. Returns
    /// the rational coordinates and the least `e >= 1` clearing them to
    /// integers, or `None` when `v` is outside the `Q`-span.
    fn coordinates_scaled(&self, v: &[Rat]) -> Result<Option<(Vec<Rat>, u64)>, ValGroupError> {
        if v.len() != self.rank {
            return Err(ValGroupError::RankMismatch);
        }
        let (denom, basis) = self.integer_basis();
        let mut w: Vec<Rat> = v.iter().map(|q| q * Rat::from_integer(denom.clone())).collect();
        let mut coords = Vec::with_capacity(basis.len());
        for b in &basis {
            let lead = b.iter().position(|x| !x.is_zero()).expect("nonzero basis column");
            let y = &w[lead] / Rat::from_integer(b[lead].clone());
            for (wi, bi) in w.iter_mut().zip(b.iter()) {
                *wi -= &y * Rat::from_integer(bi.clone());
            }
            coords.push(y);
        }
        if w.iter().any(|q| !q.is_zero()) {
            return Ok(None);
        }
        let mut e = BigInt::one();
        for y in &coords {
            e = e.lcm(y.denom());
        }
        let e: u64 = e.try_into().expect("torsion order fits in u64");
        Ok(Some((coords, e)))
    }
}

/// Echelon form of an integer column lattice: gcd-reduce columns row by row.
fn hermite_echelon(mut cols: Vec<Vec<BigInt>>, rank: usize) -> Vec<Vec<BigInt>> {
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    for row in 0..rank {
        loop {
            let mut nz: Vec<usize> = (0..cols.len()).filter(|&j| !cols[j][row].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            if nz.len() == 1 {
                let col = cols.remove(nz[0]);
                basis.push(col);
                break;
            }
            // reduce all columns against the one with smallest pivot
            nz.sort_by(|&a, &b| cols[a][row].abs().cmp(&cols[b][row].abs()));
            let pivot = nz[0];
            let pcol = cols[pivot].clone();
            for &j in &nz[1..] {
                let q = &cols[j][row] / &pcol[row];
                for i in 0..rank {
                    let delta = &q * &pcol[i];
                    cols[j][i] -= delta;
                }
            }
        }
    }
    basis
}

/// Least `e >= 1` with `e*v` in the subgroup, or `None` when no such `e`
/// exists (irrational gamma coefficient, or `v` outside the rational span).
pub fn torsion_order(
    v: &GroupValue,
    h: &SubgroupDesc,
    spec: &GammaSpec,
) -> Result<Option<u64>, ValGroupError> {
    let v = spec.normalize(v);
    let fv = v.as_finite()?;
    if fv.gcoef != 0 {
        // gamma is non-torsion over any rational subgroup in these regimes
        return Ok(None);
    }
    if fv.vec.iter().all(|q| q.is_zero()) {
        return Ok(Some(1));
    }
    Ok(h.coordinates_scaled(&fv.vec)?.map(|(_, e)| e))
}
