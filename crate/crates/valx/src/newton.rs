//! Newton polygons over tower levels, multisets of conjugate-difference
//! values, and the Krasner constant.
//!
//! Slope convention: the reported slope of a hull segment from `(i1, v1)` to
//! `(i2, v2)` is `(v1 - v2)/(i2 - i1)`, so reported slopes ARE root values.

use std::cmp::Ordering;
use std::fmt;

use crate::hull;
use crate::poly::{self, Poly};
use crate::tower::{FieldElement, Tower};
use crate::valgroup::{GroupValue, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NewtonError {
    ZeroPolynomial,
    Inseparable,
    DegreeOne,
    /// The expansion point claimed as a root has a nonzero constant term.
    NotARoot,
}

impl fmt::Display for NewtonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroPolynomial => write!(f, "Newton polygon of the zero polynomial"),
            Self::Inseparable => write!(f, "requires a separable minimal polynomial"),
            Self::DegreeOne => write!(f, "requires degree at least 2"),
            Self::NotARoot => write!(f, "expansion point is not a root"),
        }
    }
}

impl std::error::Error for NewtonError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// Support points `(i, value(c_i))` with finite values.
    pub points: Vec<(usize, Vec<Rat>)>,
    /// Lower-hull vertices.
    pub vertices: Vec<(usize, Vec<Rat>)>,
    /// Segments as (root value, multiplicity), in decreasing value order.
    pub segments: Vec<(GroupValue, usize)>,
    /// Multiplicity of the root x = 0 (index of the lowest nonzero coefficient).
    pub ord_zero: usize,
}

impl NewtonPolygon {
    /// Segments sorted by increasing slope, for printing.
    pub fn segments_increasing(&self) -> Vec<(GroupValue, usize)> {
        let mut out = self.segments.clone();
        out.reverse();
        out
    }

    pub fn max_slope(&self) -> Option<&GroupValue> {
        self.segments.first().map(|(s, _)| s)
    }
}

pub fn newton_polygon(tower: &Tower, g: &Poly) -> Result<NewtonPolygon, NewtonError> {
    if g.is_zero() {
        return Err(NewtonError::ZeroPolynomial);
    }
    let ord_zero = g.coeffs.iter().position(|c| !c.is_zero()).unwrap();
    let points: Vec<(usize, Vec<Rat>)> = g
        .coeffs
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match tower.value(c) {
            GroupValue::Finite(fv) => Some((i, fv.vec)),
            GroupValue::Infinity => None,
        })
        .collect();
    let vertices = hull::lower_hull_vertices(&points);
    let segments = hull::lower_hull(&points)
        .into_iter()
        .map(|(slope, mult)| (GroupValue::rational(slope), mult))
        .collect();
    Ok(NewtonPolygon { points, vertices, segments, ord_zero })
}

/// The multiset of values `nu(a - a_i)` over the conjugates `a_i != a` of a
/// root `a` of a separable polynomial `f`: expand `f` about `a`, strip the
/// exact zero constant term, and read the polygon slopes of the quotient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjDiffs {
    /// All `deg f - 1` difference values, largest first.
    pub diffs: Vec<GroupValue>,
}

impl ConjDiffs {
    pub fn max(&self) -> &GroupValue {
        &self.diffs[0]
    }

    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }
}

/// Conjugate differences of an explicit root `a` of `f`.
pub fn conjugate_differences_of_root(
    tower: &Tower,
    f: &Poly,
    a: &FieldElement,
) -> Result<ConjDiffs, NewtonError> {
    if f.degree().is_none_or(|d| d < 2) {
        return Err(NewtonError::DegreeOne);
    }
    if !poly::is_separable(tower, f) {
        return Err(NewtonError::Inseparable);
    }
    let coeffs = poly::taylor_expand(tower, f, a);
    if !coeffs[0].is_zero() {
        return Err(NewtonError::NotARoot);
    }
    let quotient = Poly::new(coeffs[1..].to_vec());
    let polygon = newton_polygon(tower, &quotient)?;
    let mut diffs = Vec::new();
    for (slope, mult) in &polygon.segments {
        for _ in 0..*mult {
            diffs.push(slope.clone());
        }
    }
    // separability: no conjugate collides with a, so every difference is finite
    debug_assert_eq!(diffs.len(), f.degree().unwrap() - 1);
    Ok(ConjDiffs { diffs })
}

/// Conjugate differences of the generator of a tower level, relative to the
/// level's declaration field.
pub fn conjugate_differences(tower: &Tower, level: usize) -> Result<ConjDiffs, NewtonError> {
    let f = Poly::new(tower.level(level).min_poly.clone());
    let a = tower.generator(level);
    conjugate_differences_of_root(tower, &f, &a)
}

/// Krasner constant: the maximal value of a difference of distinct
/// conjugates. With a unique extension of the valuation this is
/// `max nu(a - a_i)` over the conjugates of `a`.
pub fn kras(tower: &Tower, level: usize) -> Result<GroupValue, NewtonError> {
    if tower.level(level).degree() < 2 {
        return Err(NewtonError::DegreeOne);
    }
    let diffs = conjugate_differences(tower, level)?;
    Ok(diffs.max().clone())
}

/// Krasner constant of an explicit root of `f` (used when the minimal
/// polynomial over the base is exhibited for a non-generator element).
pub fn kras_of_root(tower: &Tower, f: &Poly, a: &FieldElement) -> Result<GroupValue, NewtonError> {
    Ok(conjugate_differences_of_root(tower, f, a)?.max().clone())
}

pub(crate) fn rational_lex_cmp(a: &GroupValue, b: &GroupValue) -> Ordering {
    // both rational (gcoef 0): compare lex; inf greatest
    match (a, b) {
        (GroupValue::Infinity, GroupValue::Infinity) => Ordering::Equal,
        (GroupValue::Infinity, _) => Ordering::Greater,
        (_, GroupValue::Infinity) => Ordering::Less,
        (GroupValue::Finite(x), GroupValue::Finite(y)) => {
            for (p, q) in x.vec.iter().zip(y.vec.iter()) {
                match p.cmp(q) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            x.gcoef.cmp(&y.gcoef)
        }
    }
}
