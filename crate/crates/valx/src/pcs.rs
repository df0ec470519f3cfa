//! Finite-prefix analysis of pseudo-Cauchy sequences: verification, limit
//! tests, polynomial value tracking, and the pair/limit relations at prefix
//! scale. Everything here is evidence about the given prefix, never a claim
//! about an infinite sequence.

use std::cmp::Ordering;
use std::fmt;

use crate::extension::PairOfDefinition;
use crate::newton::rational_lex_cmp;
use crate::poly::{self, Poly};
use crate::tower::{FieldElement, Tower};
use crate::valgroup::GroupValue;

/// A prefix `z_0, ..., z_m` of a pseudo-Cauchy sequence.
#[derive(Debug, Clone)]
pub struct PcsPrefix {
    pub elems: Vec<FieldElement>,
}

impl PcsPrefix {
    pub fn new(elems: Vec<FieldElement>) -> PcsPrefix {
        PcsPrefix { elems }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Gap values `gamma_mu = nu(z_mu - z_{mu+1})`.
    pub fn gaps(&self, tower: &Tower) -> Vec<GroupValue> {
        self.elems
            .windows(2)
            .map(|w| tower.value(&tower.sub(&w[0], &w[1])))
            .collect()
    }
}

/// Strictly increasing gaps, plus the derived identity
/// `nu(z_mu - z_rho) = gamma_mu` for all `mu < rho` (redundant, but it
/// exercises the tower arithmetic end to end).
pub fn verify_prefix(tower: &Tower, p: &PcsPrefix) -> bool {
    if p.len() < 3 {
        return false;
    }
    let gaps = p.gaps(tower);
    if gaps.iter().any(|g| g.is_infinite()) {
        return false;
    }
    for w in gaps.windows(2) {
        if rational_lex_cmp(&w[0], &w[1]) != Ordering::Less {
            return false;
        }
    }
    for (mu, gap) in gaps.iter().enumerate() {
        for rho in mu + 1..p.len() {
            let d = tower.value(&tower.sub(&p.elems[mu], &p.elems[rho]));
            if d != *gap {
                return false;
            }
        }
    }
    true
}

/// `y` is a limit at this prefix iff `nu(y - z_mu) = gamma_mu` for every gap.
pub fn is_limit_at_prefix(tower: &Tower, y: &FieldElement, p: &PcsPrefix) -> bool {
    let gaps = p.gaps(tower);
    gaps.iter()
        .enumerate()
        .all(|(mu, g)| tower.value(&tower.sub(y, &p.elems[mu])) == *g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackVerdict {
    IncreasingOnTail,
    ConstantOnTail,
    Mixed,
}

impl fmt::Display for TrackVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IncreasingOnTail => write!(f, "IncreasingOnTail"),
            Self::ConstantOnTail => write!(f, "ConstantOnTail"),
            Self::Mixed => write!(f, "Mixed"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrackReport {
    pub verdict: TrackVerdict,
    pub values: Vec<GroupValue>,
    /// Length of the classified suffix.
    pub tail_len: usize,
}

/// Track `nu f(z_mu)` along the prefix and classify the longest suffix on
/// which the sequence is strictly increasing or constant.
pub fn poly_track(tower: &Tower, f: &Poly, p: &PcsPrefix) -> TrackReport {
    let values: Vec<GroupValue> =
        p.elems.iter().map(|z| tower.value(&poly::eval(tower, f, z))).collect();
    let n = values.len();
    if n < 2 {
        return TrackReport { verdict: TrackVerdict::ConstantOnTail, values, tail_len: n };
    }
    let last_step = rational_lex_cmp(&values[n - 2], &values[n - 1]);
    let (verdict, keep) = match last_step {
        Ordering::Less => {
            let mut k = n - 1;
            while k > 0 && rational_lex_cmp(&values[k - 1], &values[k]) == Ordering::Less {
                k -= 1;
            }
            (TrackVerdict::IncreasingOnTail, n - k)
        }
        Ordering::Equal => {
            let mut k = n - 1;
            while k > 0 && values[k - 1] == values[k] {
                k -= 1;
            }
            (TrackVerdict::ConstantOnTail, n - k)
        }
        Ordering::Greater => (TrackVerdict::Mixed, 1),
    };
    TrackReport { verdict, values, tail_len: keep }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairLimitVerdict {
    /// gamma exceeds every gap and the pair element is a limit: both
    /// directions of the pair/limit correspondence hold at this prefix.
    Consistent,
    /// gamma is dominated by a gap: were the pair minimal, the sequence
    /// member itself would carry the pair, forcing the element into the base.
    GammaNotAboveGaps { first_violation: usize },
    /// gamma clears the gaps but the element is not a limit at this prefix.
    NotALimit { first_mismatch: usize },
}

impl fmt::Display for PairLimitVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Consistent => write!(f, "consistent"),
            Self::GammaNotAboveGaps { first_violation } => {
                write!(f, "gamma-not-above-gaps(mu={})", first_violation)
            }
            Self::NotALimit { first_mismatch } => {
                write!(f, "not-a-limit(mu={})", first_mismatch)
            }
        }
    }
}

/// Check the pair/limit correspondence at this prefix.
pub fn pair_limit_check(tower: &Tower, pd: &PairOfDefinition, p: &PcsPrefix) -> PairLimitVerdict {
    let gaps = p.gaps(tower);
    for (mu, g) in gaps.iter().enumerate() {
        if pd.spec.cmp(&pd.gamma, g).map(|c| c != Ordering::Greater).unwrap_or(true) {
            return PairLimitVerdict::GammaNotAboveGaps { first_violation: mu };
        }
    }
    for (mu, g) in gaps.iter().enumerate() {
        if tower.value(&tower.sub(&pd.a, &p.elems[mu])) != *g {
            return PairLimitVerdict::NotALimit { first_mismatch: mu };
        }
    }
    PairLimitVerdict::Consistent
}

/// Search caller-provided splitting data for a root of `f` that is a limit
/// at this prefix. `None` is the honest fallback when no representable root
/// qualifies.
pub fn limit_root_witness(
    tower: &Tower,
    f: &Poly,
    p: &PcsPrefix,
    roots: &[FieldElement],
) -> Option<FieldElement> {
    if poly_track(tower, f, p).verdict != TrackVerdict::IncreasingOnTail {
        return None;
    }
    roots
        .iter()
        .find(|b| poly::eval(tower, f, b).is_zero() && is_limit_at_prefix(tower, b, p))
        .cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valgroup::{rat, rat_int, GammaSpec};

    fn f3t() -> Tower {
        crate::tower::tests::f3t_tower()
    }

    /// Partial sums of sum t^i: gaps mu + 1.
    fn partial_sum_prefix(t: &Tower, m: usize) -> PcsPrefix {
        let tt = t.base_var(0);
        let mut elems = Vec::new();
        let mut acc = t.zero();
        for i in 0..=m {
            acc = t.add(&acc, &t.pow(&tt, i as i64).unwrap());
            elems.push(acc.clone());
        }
        PcsPrefix::new(elems)
    }

    #[test]
    fn verify_partial_sums() {
        let t = f3t();
        let p = partial_sum_prefix(&t, 5);
        assert_eq!(
            p.gaps(&t),
            (1..=5).map(|i| GroupValue::scalar(rat_int(i))).collect::<Vec<_>>()
        );
        assert!(verify_prefix(&t, &p));
        // a constant sequence is not pseudo-Cauchy
        let c = PcsPrefix::new(vec![t.one(), t.one(), t.one()]);
        assert!(!verify_prefix(&t, &c));
    }

    #[test]
    fn verify_explicit_gaps() {
        // z = (0, t, t + t^3, t + t^3 + t^4): gaps 1, 3, 4
        let t = f3t();
        let tt = t.base_var(0);
        let t3 = t.pow(&tt, 3).unwrap();
        let t4 = t.pow(&tt, 4).unwrap();
        let z1 = tt.clone();
        let z2 = t.add(&tt, &t3);
        let z3 = t.add(&z2, &t4);
        let p = PcsPrefix::new(vec![t.zero(), z1, z2, z3]);
        assert_eq!(
            p.gaps(&t),
            vec![
                GroupValue::scalar(rat_int(1)),
                GroupValue::scalar(rat_int(3)),
                GroupValue::scalar(rat_int(4))
            ]
        );
        assert!(verify_prefix(&t, &p));
    }

    #[test]
    fn limits_at_prefix() {
        let t = f3t();
        let p = partial_sum_prefix(&t, 5);
        // the next partial sum is a limit of the prefix below it
        let head = PcsPrefix::new(p.elems[..5].to_vec());
        assert!(is_limit_at_prefix(&t, &p.elems[5], &head));
        assert!(!is_limit_at_prefix(&t, &p.elems[0], &head));
        // 1/(1-t) = sum t^i is a limit of the whole prefix
        let tt = t.base_var(0);
        let lim = t.inv(&t.sub(&t.one(), &tt)).unwrap();
        assert!(is_limit_at_prefix(&t, &lim, &p));
        // stability under perturbations of value above the last gap
        let pert = t.add(&lim, &t.pow(&tt, 40).unwrap());
        assert!(is_limit_at_prefix(&t, &pert, &p));
        // but not under low-value perturbations
        let bad = t.add(&lim, &t.one());
        assert!(!is_limit_at_prefix(&t, &bad, &p));
    }

    #[test]
    fn tracking() {
        let t = f3t();
        let p = partial_sum_prefix(&t, 5);
        let tt = t.base_var(0);
        let lim = t.inv(&t.sub(&t.one(), &tt)).unwrap();
        // x - limit tracks the gaps exactly
        let f = Poly::new(vec![t.neg(&lim), t.one()]);
        let r = poly_track(&t, &f, &p);
        assert_eq!(r.verdict, TrackVerdict::IncreasingOnTail);
        assert_eq!(r.tail_len, p.len());
        assert_eq!(r.values[..5].to_vec(), p.gaps(&t));
        // a constant polynomial is constant at its value
        let c = Poly::constant(t.mul(&tt, &tt));
        let r = poly_track(&t, &c, &p);
        assert_eq!(r.verdict, TrackVerdict::ConstantOnTail);
        assert!(r.values.iter().all(|v| *v == GroupValue::scalar(rat_int(2))));
        // the minimal polynomial of a non-limit is ultimately constant:
        // f = x - 1 against the partial sums of sum t^i
        let g = Poly::new(vec![t.int_elem(-1), t.one()]);
        let r = poly_track(&t, &g, &p);
        assert_eq!(r.verdict, TrackVerdict::ConstantOnTail);
    }

    #[test]
    fn pair_limit_correspondence() {
        let t = f3t();
        let p = partial_sum_prefix(&t, 5);
        let tt = t.base_var(0);
        let lim = t.inv(&t.sub(&t.one(), &tt)).unwrap();
        // gamma above all gaps, a = limit: consistent
        let pd = PairOfDefinition::with_gamma(
            &t,
            lim.clone(),
            GroupValue::scalar(rat_int(9)),
            GammaSpec::RationalPoint(vec![rat_int(9)]),
        )
        .unwrap();
        assert_eq!(pair_limit_check(&t, &pd, &p), PairLimitVerdict::Consistent);
        // gamma below a gap: flags the contradiction mechanism
        let low = PairOfDefinition::with_gamma(
            &t,
            lim,
            GroupValue::scalar(rat(5, 2)),
            GammaSpec::RationalPoint(vec![rat(5, 2)]),
        )
        .unwrap();
        assert_eq!(
            pair_limit_check(&t, &low, &p),
            PairLimitVerdict::GammaNotAboveGaps { first_violation: 2 }
        );
        // unrelated element: mismatch at the first gap
        let pd2 = PairOfDefinition::with_gamma(
            &t,
            t.int_elem(1),
            GroupValue::scalar(rat_int(9)),
            GammaSpec::RationalPoint(vec![rat_int(9)]),
        )
        .unwrap();
        assert!(matches!(
            pair_limit_check(&t, &pd2, &p),
            PairLimitVerdict::NotALimit { .. }
        ));
    }

    #[test]
    fn defect_style_prefix_with_negative_gaps() {
        // stand-in for limits approached from below zero: all gaps negative
        // and increasing, the pair gamma positive
        let t = f3t();
        let tt = t.base_var(0);
        let m = 8;
        let mut elems = Vec::new();
        let mut acc = t.zero();
        for i in 0..m {
            acc = t.add(&acc, &t.pow(&tt, -(m - i)).unwrap());
            elems.push(acc.clone());
        }
        let prefix = PcsPrefix::new(elems[..(m as usize) - 1].to_vec());
        let y = elems[(m as usize) - 1].clone();
        assert!(verify_prefix(&t, &prefix));
        assert_eq!(
            prefix.gaps(&t),
            (1..m - 1).map(|i| GroupValue::scalar(rat_int(i - m))).collect::<Vec<_>>()
        );
        assert!(is_limit_at_prefix(&t, &y, &prefix));
        // a positive irrational gamma clears every (negative) gap
        let pd = PairOfDefinition::new(&t, y, GammaSpec::quadirr(rat_int(0), rat(1, 4), 2))
            .unwrap();
        assert_eq!(pair_limit_check(&t, &pd, &prefix), PairLimitVerdict::Consistent);
    }

    #[test]
    fn witness_search() {
        let t = f3t();
        let p = partial_sum_prefix(&t, 5);
        let tt = t.base_var(0);
        let lim = t.inv(&t.sub(&t.one(), &tt)).unwrap();
        let other = t.int_elem(-1);
        // f = (x - lim)(x - other)
        let f = poly::mul(
            &t,
            &Poly::new(vec![t.neg(&lim), t.one()]),
            &Poly::new(vec![t.neg(&other), t.one()]),
        );
        assert_eq!(
            limit_root_witness(&t, &f, &p, &[other.clone(), lim.clone()]),
            Some(lim.clone())
        );
        // no representable roots: unknown
        assert_eq!(limit_root_witness(&t, &f, &p, &[]), None);
        // x^2 - lim^2: returns lim or -lim, whichever passes the limit test
        let lim2 = t.mul(&lim, &lim);
        let g = Poly::new(vec![t.neg(&lim2), t.zero(), t.one()]);
        let w = limit_root_witness(&t, &g, &p, &[t.neg(&lim), lim.clone()]);
        assert_eq!(w, Some(lim));
    }
}
