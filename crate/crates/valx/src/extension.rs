//! The extended valuation itself: evaluation from a pair of definition,
//! classification, pair equivalence, delta, the value of the key polynomial,
//! the Q-expansion valuation, and structure reports.

use std::cmp::Ordering;
use std::fmt;

use crate::newton::{self, ConjDiffs, NewtonError};
use crate::poly::{self, Poly, PolyError};
use crate::tower::{FieldElement, Tower, TowerError};
use crate::valgroup::{
    torsion_order, GammaSpec, GroupValue, SubgroupDesc, ValGroupError,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtError {
    IncomparableSpecs,
    NotMinimalAsserted,
    Inseparable,
    NonMonicQ,
    /// The pair element is neither a base element nor a level generator.
    NotAGenerator,
    /// Conjugate data over the base field needs a base-coefficient minimal polynomial.
    MinPolyNotOverBase,
    /// delta of a polynomial without roots.
    DeltaUndefined,
    /// The degree of the pair element over the base cannot be certified.
    DegreeUncertified,
    Value(ValGroupError),
    Tower(TowerError),
    Newton(NewtonError),
    Poly(PolyError),
}

impl fmt::Display for ExtError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IncomparableSpecs => write!(f, "pairs live under different gamma specifications"),
            Self::NotMinimalAsserted => write!(f, "pair is not certified minimal"),
            Self::Inseparable => write!(f, "requires a separable generator"),
            Self::NonMonicQ => write!(f, "requires a monic Q"),
            Self::NotAGenerator => write!(f, "pair element must be a level generator or base element"),
            Self::MinPolyNotOverBase => {
                write!(f, "conjugate data needs a base-coefficient minimal polynomial")
            }
            Self::DeltaUndefined => write!(f, "delta is undefined for constants"),
            Self::DegreeUncertified => write!(f, "degree over the base cannot be certified"),
            Self::Value(e) => write!(f, "{}", e),
            Self::Tower(e) => write!(f, "{}", e),
            Self::Newton(e) => write!(f, "{}", e),
            Self::Poly(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for ExtError {}

impl From<ValGroupError> for ExtError {
    fn from(e: ValGroupError) -> Self {
        ExtError::Value(e)
    }
}

impl From<TowerError> for ExtError {
    fn from(e: TowerError) -> Self {
        ExtError::Tower(e)
    }
}

impl From<NewtonError> for ExtError {
    fn from(e: NewtonError) -> Self {
        match e {
            NewtonError::Inseparable => ExtError::Inseparable,
            other => ExtError::Newton(other),
        }
    }
}

impl From<PolyError> for ExtError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::NonMonicQ => ExtError::NonMonicQ,
            other => ExtError::Poly(other),
        }
    }
}

/// A pair `(a, gamma)` defining the valuation `x - a |-> gamma`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairOfDefinition {
    pub a: FieldElement,
    pub gamma: GroupValue,
    pub spec: GammaSpec,
}

impl PairOfDefinition {
    pub fn new(
        tower: &Tower,
        a: FieldElement,
        spec: GammaSpec,
    ) -> Result<PairOfDefinition, ExtError> {
        if !spec.rank_ok(tower.rank()) {
            return Err(ExtError::Value(ValGroupError::RankMismatch));
        }
        let gamma = spec.gamma(tower.rank());
        Ok(PairOfDefinition { a, gamma, spec })
    }

    pub fn with_gamma(
        tower: &Tower,
        a: FieldElement,
        gamma: GroupValue,
        spec: GammaSpec,
    ) -> Result<PairOfDefinition, ExtError> {
        if gamma.is_infinite() || !spec.rank_ok(tower.rank()) {
            return Err(ExtError::Value(ValGroupError::RankMismatch));
        }
        let gamma = spec.normalize(&gamma);
        Ok(PairOfDefinition { a, gamma, spec })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaKind {
    ValueTranscendental,
    ResidueTranscendental,
}

impl fmt::Display for OmegaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ValueTranscendental => write!(f, "value-transcendental"),
            Self::ResidueTranscendental => write!(f, "residue-transcendental"),
        }
    }
}

/// The kind is determined solely by whether gamma has a rational position.
pub fn classify(pd: &PairOfDefinition) -> OmegaKind {
    match pd.spec {
        GammaSpec::RationalPoint(_) => OmegaKind::ResidueTranscendental,
        _ => OmegaKind::ValueTranscendental,
    }
}

/// Whether gamma exceeds every algebraic value, making the pair the unique
/// pair of definition.
pub fn is_unique_pair(pd: &PairOfDefinition) -> bool {
    matches!(pd.spec, GammaSpec::AboveAll { .. })
}

/// `omega f = min_i (nu c_i + i*gamma)` over the Taylor expansion of `f`
/// about `a`. The zero polynomial evaluates to `inf`.
pub fn nu_a_gamma(tower: &Tower, f: &Poly, pd: &PairOfDefinition) -> GroupValue {
    let coeffs = poly::taylor_expand(tower, f, &pd.a);
    let mut best = GroupValue::Infinity;
    for (i, c) in coeffs.iter().enumerate() {
        let cv = tower.value(c);
        if cv.is_infinite() {
            continue;
        }
        let cand = cv.add(&pd.gamma.int_scale(i as i64)).expect("shared rank");
        if pd.spec.cmp(&cand, &best).expect("shared rank") == Ordering::Less {
            best = cand;
        }
    }
    best
}

/// Extension to quotients by subtraction.
pub fn nu_a_gamma_ratio(
    tower: &Tower,
    num: &Poly,
    den: &Poly,
    pd: &PairOfDefinition,
) -> Result<GroupValue, ExtError> {
    if den.is_zero() {
        return Err(ExtError::Tower(TowerError::DivisionByZero));
    }
    let vn = nu_a_gamma(tower, num, pd);
    let vd = nu_a_gamma(tower, den, pd);
    Ok(vn.sub(&vd)?)
}

/// Exact equality of the two gammas, across specifications: rational
/// positions compare by folded vector, irrational and above-all positions
/// only ever equal themselves (QuadIrr discriminants are kept squarefree),
/// and positions of different kinds are never equal.
pub fn gammas_equal(p1: &PairOfDefinition, p2: &PairOfDefinition) -> Result<bool, ExtError> {
    if p1.gamma.rank() != p2.gamma.rank() {
        return Err(ExtError::IncomparableSpecs);
    }
    Ok(match (&p1.spec, &p2.spec) {
        (GammaSpec::RationalPoint(_), GammaSpec::RationalPoint(_)) => p1.gamma == p2.gamma,
        (GammaSpec::QuadIrr { .. }, GammaSpec::QuadIrr { .. }) => {
            p1.spec == p2.spec && p1.gamma == p2.gamma
        }
        (GammaSpec::AboveAll { .. }, GammaSpec::AboveAll { .. }) => p1.gamma == p2.gamma,
        _ => false,
    })
}

/// Two pairs define the same valuation iff the gammas agree and
/// `nu(a - a') >= gamma`.
pub fn pairs_equivalent(
    tower: &Tower,
    p1: &PairOfDefinition,
    p2: &PairOfDefinition,
) -> Result<bool, ExtError> {
    if !gammas_equal(p1, p2)? {
        return Ok(false);
    }
    let diff = tower.value(&tower.sub(&p1.a, &p2.a));
    Ok(p1.spec.cmp(&diff, &p1.gamma)? != Ordering::Less)
}

/// Certified degree `[K(a):K]` of the pair element; this is also the
/// ramification index, since all supported extensions are totally ramified.
pub fn pair_degree(tower: &Tower, pd: &PairOfDefinition) -> Result<u64, ExtError> {
    if pd.a.level() == 0 {
        return Ok(1);
    }
    let level = tower.generator_level(&pd.a).ok_or(ExtError::NotAGenerator)?;
    let lvl = tower.level(level);
    if lvl.min_poly.iter().all(|c| c.level() == 0) {
        // irreducible over the declaration level, hence over the base
        return Ok(lvl.degree() as u64);
    }
    // otherwise the generator must be primitive: its value has full torsion
    // order over the base group, forcing K(a) to be the whole level
    let full = tower.degree_over_base(level);
    let e = torsion_order(
        &tower.value(&pd.a),
        &SubgroupDesc::standard(tower.rank()),
        &pd.spec,
    )?;
    if e == Some(full) {
        Ok(full)
    } else {
        Err(ExtError::DegreeUncertified)
    }
}

/// Sufficient minimality criterion: `nu a` has torsion order `[K(a):K]`
/// modulo `nu K` and `nu a < gamma`. Base elements are always minimal.
/// A `false` verdict means the criterion does not apply, not that the pair
/// is non-minimal.
pub fn is_minimal_pair_by_value_order(tower: &Tower, pd: &PairOfDefinition) -> bool {
    if pd.a.level() == 0 {
        return true;
    }
    let Ok(deg) = pair_degree(tower, pd) else { return false };
    let base_group = SubgroupDesc::standard(tower.rank());
    let va = tower.value(&pd.a);
    let Ok(e) = torsion_order(&va, &base_group, &pd.spec) else { return false };
    if e != Some(deg) {
        return false;
    }
    matches!(pd.spec.cmp(&va, &pd.gamma), Ok(Ordering::Less))
}

/// Conjugate differences of the pair element over the base field. Requires
/// the element to be a generator whose minimal polynomial has base
/// coefficients (so its roots are the conjugates over the base).
pub fn pair_conjugate_differences(
    tower: &Tower,
    pd: &PairOfDefinition,
) -> Result<ConjDiffs, ExtError> {
    let level = tower.generator_level(&pd.a).ok_or(ExtError::NotAGenerator)?;
    if !tower.level(level).min_poly.iter().all(|c| c.level() == 0) {
        return Err(ExtError::MinPolyNotOverBase);
    }
    Ok(newton::conjugate_differences(tower, level)?)
}

/// `omega Q = gamma + sum_i min(gamma, nu(a - a_i))` over the conjugates:
/// the conjugate-product route to the value of the minimal polynomial.
pub fn omega_q(tower: &Tower, pd: &PairOfDefinition) -> Result<GroupValue, ExtError> {
    if pd.a.level() == 0 {
        // Q = x - a, so omega Q = gamma
        return Ok(pd.gamma.clone());
    }
    let diffs = pair_conjugate_differences(tower, pd)?;
    let mut total = pd.gamma.clone();
    for d in &diffs.diffs {
        let m = pd.spec.min(&pd.gamma, d)?.clone();
        total = total.add(&m)?;
    }
    Ok(total)
}

/// `delta(f) = max over roots b of min(gamma, nu(a - b))`: gamma when `a`
/// is itself a root, otherwise read off the polygon of `f(a + y)`.
pub fn delta(tower: &Tower, f: &Poly, pd: &PairOfDefinition) -> Result<GroupValue, ExtError> {
    if f.degree().is_none_or(|d| d < 1) {
        return Err(ExtError::DeltaUndefined);
    }
    let coeffs = poly::taylor_expand(tower, f, &pd.a);
    if coeffs[0].is_zero() {
        return Ok(pd.gamma.clone());
    }
    let expanded = Poly::new(coeffs);
    let polygon = newton::newton_polygon(tower, &expanded)?;
    let max_slope = polygon.max_slope().expect("nonconstant polynomial");
    Ok(pd.spec.min(&pd.gamma, max_slope)?.clone())
}

/// `nu_Q f = min_i (omega f_i + i*omega Q)` over the Q-expansion.
pub fn nu_q(
    tower: &Tower,
    f: &Poly,
    q: &Poly,
    omega_q_value: &GroupValue,
    pd: &PairOfDefinition,
) -> Result<GroupValue, ExtError> {
    let parts = poly::q_expand(tower, f, q)?;
    let mut best = GroupValue::Infinity;
    for (i, part) in parts.iter().enumerate() {
        let v = nu_a_gamma(tower, part, pd);
        if v.is_infinite() {
            continue;
        }
        let cand = v.add(&omega_q_value.int_scale(i as i64))?;
        if pd.spec.cmp(&cand, &best)? == Ordering::Less {
            best = cand;
        }
    }
    Ok(best)
}

/// Value-group / residue-field structure of a minimal pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub kind: OmegaKind,
    pub omega_q: GroupValue,
    /// `nu K(a)` for value transcendental; `nu K(a) + Z*omega Q` for residue
    /// transcendental (where `omega Q` folds into the rational lattice).
    pub value_group: SubgroupDesc,
    /// Torsion index of `omega Q` over `nu K(a)`; only in the residue
    /// transcendental case.
    pub index_e: Option<u64>,
    pub residue_base: String,
    /// Residue field gains one transcendental generator.
    pub residue_transcendental: bool,
}

pub fn structure_report(tower: &Tower, pd: &PairOfDefinition) -> Result<StructureReport, ExtError> {
    if !is_minimal_pair_by_value_order(tower, pd) {
        return Err(ExtError::NotMinimalAsserted);
    }
    let kind = classify(pd);
    let oq = omega_q_any_route(tower, pd)?;
    let lattice = minimal_field_value_group(tower, pd)?;
    let residue_base = tower.base.residue_field_name();
    match kind {
        OmegaKind::ValueTranscendental => Ok(StructureReport {
            kind,
            omega_q: oq,
            value_group: lattice,
            index_e: None,
            residue_base,
            residue_transcendental: false,
        }),
        OmegaKind::ResidueTranscendental => {
            let e = torsion_order(&oq, &lattice, &pd.spec)?
                .expect("rational omega Q is torsion over the minimal-field lattice");
            let fv = pd.spec.normalize(&oq);
            let combined = lattice.with_generator(fv.as_finite()?.vec.clone());
            Ok(StructureReport {
                kind,
                omega_q: oq,
                value_group: combined,
                index_e: Some(e),
                residue_base,
                residue_transcendental: true,
            })
        }
    }
}

/// `omega Q` by the conjugate route when available, else by the Taylor
/// route over an exhibited base-coefficient minimal polynomial.
fn omega_q_any_route(tower: &Tower, pd: &PairOfDefinition) -> Result<GroupValue, ExtError> {
    match omega_q(tower, pd) {
        Ok(v) => Ok(v),
        Err(ExtError::Inseparable) => {
            let level = tower.generator_level(&pd.a).ok_or(ExtError::NotAGenerator)?;
            let f = Poly::new(tower.level(level).min_poly.clone());
            if f.coeffs.iter().all(|c| c.level() == 0) {
                Ok(nu_a_gamma(tower, &f, pd))
            } else {
                Err(ExtError::MinPolyNotOverBase)
            }
        }
        Err(e) => Err(e),
    }
}

/// Value group of the minimal field `K(a)`.
pub fn minimal_field_value_group(
    tower: &Tower,
    pd: &PairOfDefinition,
) -> Result<SubgroupDesc, ExtError> {
    if pd.a.level() == 0 {
        return Ok(SubgroupDesc::standard(tower.rank()));
    }
    let level = tower.generator_level(&pd.a).ok_or(ExtError::NotAGenerator)?;
    let deg = pair_degree(tower, pd)?;
    if deg == tower.degree_over_base(level) {
        // K(a) is the whole level
        Ok(tower.value_group(level))
    } else {
        // totally ramified over the base by nu a alone
        let va = tower.value(&pd.a);
        Ok(SubgroupDesc::standard(tower.rank())
            .with_generator(va.as_finite()?.vec.clone()))
    }
}

/// Purity of `(K(a, x) | K(a))`: the verdicts mirror the pure-extension
/// conditions, with the pseudo-Cauchy case never auto-detected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PurityVerdict {
    /// gamma is non-torsion modulo `nu K(a)`.
    Pe1,
    /// gamma lies in `nu K(a)`.
    Pe2,
    /// `e*gamma` first lands in `nu K(a)` at this `e >= 2`.
    WeaklyPureWitness(u64),
    /// Reserved for the pseudo-Cauchy route; never produced by
    /// `classify_purity`.
    PseudoCauchyDeferral,
}

impl fmt::Display for PurityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pe1 => write!(f, "PE1"),
            Self::Pe2 => write!(f, "PE2"),
            Self::WeaklyPureWitness(e) => write!(f, "weakly-pure(e={})", e),
            Self::PseudoCauchyDeferral => write!(f, "pcs-deferred"),
        }
    }
}

/// Purity classification relative to the top tower level.
pub fn classify_purity(tower: &Tower, pd: &PairOfDefinition) -> Result<PurityVerdict, ExtError> {
    let top_group = tower.value_group(tower.num_levels());
    Ok(match torsion_order(&pd.gamma, &top_group, &pd.spec)? {
        None => PurityVerdict::Pe1,
        Some(1) => PurityVerdict::Pe2,
        Some(e) => PurityVerdict::WeaklyPureWitness(e),
    })
}

/// Minimal polynomial of the pair element over the base, when exhibited by
/// the tower: `x - a` for base elements, or the declared minimal polynomial
/// of a generator when its coefficients are base elements.
pub fn min_poly_over_base(tower: &Tower, pd: &PairOfDefinition) -> Result<Poly, ExtError> {
    if pd.a.level() == 0 {
        return Ok(Poly::new(vec![tower.neg(&pd.a), tower.one()]));
    }
    let level = tower.generator_level(&pd.a).ok_or(ExtError::NotAGenerator)?;
    let f = Poly::new(tower.level(level).min_poly.clone());
    if f.coeffs.iter().all(|c| c.level() == 0) {
        Ok(f)
    } else {
        Err(ExtError::MinPolyNotOverBase)
    }
}

/// Two minimal pairs over the same base define the same valuation on `K(x)`
/// iff the gammas agree and the generators are conjugate, i.e. share the
/// minimal polynomial over the common base.
pub fn coincidence_test(
    t1: &Tower,
    p1: &PairOfDefinition,
    t2: &Tower,
    p2: &PairOfDefinition,
) -> Result<bool, ExtError> {
    if t1.base != t2.base {
        return Err(ExtError::IncomparableSpecs);
    }
    if !is_minimal_pair_by_value_order(t1, p1) || !is_minimal_pair_by_value_order(t2, p2) {
        return Err(ExtError::NotMinimalAsserted);
    }
    if !gammas_equal(p1, p2)? {
        return Ok(false);
    }
    let q1 = min_poly_over_base(t1, p1)?;
    let q2 = min_poly_over_base(t2, p2)?;
    Ok(q1 == q2)
}

/// At most `[K(a):K]` simultaneous extensions exist.
pub fn simultaneous_extension_bound(
    tower: &Tower,
    pd: &PairOfDefinition,
) -> Result<u64, ExtError> {
    pair_degree(tower, pd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::Tower;
    use crate::valgroup::{rat, rat_int, Rat};

    fn pd_rational(tower: &Tower, a: FieldElement, q: Rat) -> PairOfDefinition {
        PairOfDefinition::new(tower, a, GammaSpec::RationalPoint(vec![q])).unwrap()
    }

    fn cube_root_pair(gamma: Rat) -> (Tower, PairOfDefinition) {
        let t = crate::tower::tests::root_of_inverse_p(3);
        let a = t.generator(1);
        let pd = pd_rational(&t, a, gamma);
        (t, pd)
    }

    fn min_poly(t: &Tower) -> Poly {
        Poly::new(t.level(1).min_poly.clone())
    }

    #[test]
    fn nu_on_linear_polynomials() {
        let (t, pd) = cube_root_pair(rat(1, 5));
        // x - a evaluates to gamma
        let xa = Poly::new(vec![t.neg(&pd.a), t.one()]);
        assert_eq!(nu_a_gamma(&t, &xa, &pd), pd.gamma);
        // x - b evaluates to min(gamma, nu(a - b))
        let b = t.int_elem(9);
        let xb = Poly::new(vec![t.neg(&b), t.one()]);
        let expected = pd
            .spec
            .min(&pd.gamma, &t.value(&t.sub(&pd.a, &b)))
            .unwrap()
            .clone();
        assert_eq!(nu_a_gamma(&t, &xb, &pd), expected);
        // constants evaluate to their value; zero to inf
        let c = Poly::constant(t.rat_elem(&rat(9, 2)).unwrap());
        assert_eq!(nu_a_gamma(&t, &c, &pd), GroupValue::scalar(rat_int(2)));
        assert_eq!(nu_a_gamma(&t, &Poly::zero(), &pd), GroupValue::Infinity);
    }

    #[test]
    fn worked_min_poly_value() {
        // p = 3, gamma = 1/5: the minimal polynomial evaluates to 8/15
        let (t, pd) = cube_root_pair(rat(1, 5));
        assert_eq!(nu_a_gamma(&t, &min_poly(&t), &pd), GroupValue::scalar(rat(8, 15)));
        // cross-check against the conjugate route
        assert_eq!(omega_q(&t, &pd).unwrap(), GroupValue::scalar(rat(8, 15)));
    }

    #[test]
    fn omega_q_two_routes_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for p in [3u64, 5] {
            let t = crate::tower::tests::root_of_inverse_p(p);
            let a = t.generator(1);
            let f = min_poly(&t);
            for _ in 0..50 {
                let g = rat(rng.gen_range(-20..40), rng.gen_range(1..40));
                let pd = pd_rational(&t, a.clone(), g);
                assert_eq!(omega_q(&t, &pd).unwrap(), nu_a_gamma(&t, &f, &pd));
            }
        }
    }

    #[test]
    fn classification() {
        let (t, pd) = cube_root_pair(rat(1, 5));
        assert_eq!(classify(&pd), OmegaKind::ResidueTranscendental);
        let quad = PairOfDefinition::new(
            &t,
            t.generator(1),
            GammaSpec::QuadIrr { q0: rat_int(0), q1: rat(1, 10), d: 2 },
        )
        .unwrap();
        assert_eq!(classify(&quad), OmegaKind::ValueTranscendental);
        assert!(!is_unique_pair(&quad));
        let above = PairOfDefinition::new(&t, t.generator(1), GammaSpec::AboveAll { rank: 1 }).unwrap();
        assert_eq!(classify(&above), OmegaKind::ValueTranscendental);
        assert!(is_unique_pair(&above));
    }

    #[test]
    fn pair_equivalence() {
        let (t, pd) = cube_root_pair(rat(1, 5));
        assert!(pairs_equivalent(&t, &pd, &pd).unwrap());
        // perturbation of value 2 - 1/3 = 5/3 >= 1/5 keeps the pair
        let a2 = t.add(&pd.a, &t.mul(&t.int_elem(9), &pd.a));
        let pd2 = pd_rational(&t, a2, rat(1, 5));
        assert!(pairs_equivalent(&t, &pd, &pd2).unwrap());
        // gamma mismatch
        let pd3 = pd_rational(&t, pd.a.clone(), rat(1, 6));
        assert!(!pairs_equivalent(&t, &pd, &pd3).unwrap());
        // perturbation of value below gamma breaks equivalence
        let pd4 = pd_rational(&t, t.add(&pd.a, &t.one()), rat(1, 5));
        assert!(!pairs_equivalent(&t, &pd, &pd4).unwrap());
        // an irrational gamma never equals a rational one
        let quad = PairOfDefinition::new(
            &t,
            pd.a.clone(),
            GammaSpec::quadirr(rat_int(0), rat(1, 10), 2),
        )
        .unwrap();
        assert!(!pairs_equivalent(&t, &pd, &quad).unwrap());
        // and equal quadratic positions in different surface forms do:
        // 2*sqrt(2) == sqrt(8)
        let qa = PairOfDefinition::new(&t, pd.a.clone(), GammaSpec::quadirr(rat_int(0), rat_int(2), 2)).unwrap();
        let qb = PairOfDefinition::new(&t, pd.a.clone(), GammaSpec::quadirr(rat_int(0), rat_int(1), 8)).unwrap();
        assert!(pairs_equivalent(&t, &qa, &qb).unwrap());
    }

    #[test]
    fn equivalence_is_an_equivalence_on_perturbation_families() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(47);
        let (t, pd) = cube_root_pair(rat(1, 5));
        let mut family = vec![pd.clone()];
        for _ in 0..8 {
            // random perturbations above and below gamma
            let exp = rng.gen_range(-1..3);
            let c = t.rat_elem(&rat(3i64.pow(exp.max(0) as u32), 1)).unwrap();
            let perturbed = t.add(&pd.a, &t.mul(&c, &t.generator(1)));
            family.push(pd_rational(&t, perturbed, rat(1, 5)));
        }
        for x in &family {
            assert!(pairs_equivalent(&t, x, x).unwrap());
            for y in &family {
                let xy = pairs_equivalent(&t, x, y).unwrap();
                let yx = pairs_equivalent(&t, y, x).unwrap();
                assert_eq!(xy, yx);
                for z in &family {
                    if xy && pairs_equivalent(&t, y, z).unwrap() {
                        assert!(pairs_equivalent(&t, x, z).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn minimality_by_value_order() {
        let (t, pd) = cube_root_pair(rat(1, 5));
        assert!(is_minimal_pair_by_value_order(&t, &pd));
        // gamma below nu a: criterion inapplicable
        let low = pd_rational(&t, pd.a.clone(), rat(-1, 2));
        assert!(!is_minimal_pair_by_value_order(&t, &low));
        // base elements are always minimal
        let base = pd_rational(&t, t.int_elem(7), rat(-1, 2));
        assert!(is_minimal_pair_by_value_order(&t, &base));
    }

    #[test]
    fn delta_examples() {
        let (t, pd) = cube_root_pair(rat(1, 5));
        // a is a root of its minimal polynomial
        assert_eq!(delta(&t, &min_poly(&t), &pd).unwrap(), pd.gamma);
        // delta(x - b) = min(gamma, nu(a - b))
        let b = t.int_elem(2);
        let xb = Poly::new(vec![t.neg(&b), t.one()]);
        let expected = pd.spec.min(&pd.gamma, &t.value(&t.sub(&pd.a, &b))).unwrap().clone();
        assert_eq!(delta(&t, &xb, &pd).unwrap(), expected);
        assert_eq!(delta(&t, &Poly::constant(t.one()), &pd), Err(ExtError::DeltaUndefined));
    }

    #[test]
    fn delta_collapses_repeated_roots() {
        // delta reads the polygon multiset but reports only the maximum,
        // so repeated roots change nothing
        let (t, pd) = cube_root_pair(rat(1, 5));
        let b = t.int_elem(3);
        let xb = Poly::new(vec![t.neg(&b), t.one()]);
        let single = delta(&t, &xb, &pd).unwrap();
        let squared = delta(&t, &poly::mul(&t, &xb, &xb), &pd).unwrap();
        assert_eq!(single, squared);
        // and mixing in a second root keeps the maximum
        let c = t.rat_elem(&rat(1, 9)).unwrap();
        let xc = Poly::new(vec![t.neg(&c), t.one()]);
        let mixed = delta(&t, &poly::mul(&t, &xb, &xc), &pd).unwrap();
        let dc = delta(&t, &xc, &pd).unwrap();
        assert_eq!(&mixed, pd.spec.max(&single, &dc).unwrap());
    }

    #[test]
    fn key_polynomial_property() {
        use rand::{Rng, SeedableRng};
        // deg f < deg Q forces delta(f) < delta(Q) for a minimal pair
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(53);
        let (t, pd) = cube_root_pair(rat(1, 5));
        let dq = delta(&t, &min_poly(&t), &pd).unwrap();
        for _ in 0..300 {
            let deg = rng.gen_range(1..3);
            let f = Poly::new(
                (0..=deg)
                    .map(|_| t.rat_elem(&rat(rng.gen_range(-9..10), rng.gen_range(1..7))).unwrap())
                    .collect(),
            );
            if f.degree().is_none_or(|d| d < 1) {
                continue;
            }
            let df = delta(&t, &f, &pd).unwrap();
            assert_eq!(pd.spec.cmp(&df, &dq).unwrap(), Ordering::Less);
        }
    }

    #[test]
    fn nu_q_equals_nu_a_gamma() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(59);
        let (t, pd) = cube_root_pair(rat(1, 5));
        let q = min_poly(&t);
        let oq = omega_q(&t, &pd).unwrap();
        // deg f < deg Q reduces to the single term f_0
        let small = Poly::new(vec![t.int_elem(5), t.one()]);
        assert_eq!(
            nu_q(&t, &small, &q, &oq, &pd).unwrap(),
            nu_a_gamma(&t, &small, &pd)
        );
        // f = Q gives omega Q
        assert_eq!(nu_q(&t, &q, &q, &oq, &pd).unwrap(), oq);
        for _ in 0..200 {
            let deg = rng.gen_range(0..13);
            let f = Poly::new(
                (0..=deg)
                    .map(|_| t.rat_elem(&rat(rng.gen_range(-9..10), rng.gen_range(1..7))).unwrap())
                    .collect(),
            );
            assert_eq!(
                nu_q(&t, &f, &q, &oq, &pd).unwrap(),
                nu_a_gamma(&t, &f, &pd)
            );
        }
        let non_monic = Poly::new(vec![t.zero(), t.int_elem(2)]);
        assert_eq!(
            nu_q(&t, &small, &non_monic, &oq, &pd),
            Err(ExtError::NonMonicQ)
        );
    }

    #[test]
    fn structure_report_residue_transcendental() {
        // gamma = 1/5 over the cube-root tower: omega Q = 8/15, e = 5,
        // combined lattice (1/15)Z
        let (t, pd) = cube_root_pair(rat(1, 5));
        let r = structure_report(&t, &pd).unwrap();
        assert_eq!(r.kind, OmegaKind::ResidueTranscendental);
        assert_eq!(r.omega_q, GroupValue::scalar(rat(8, 15)));
        assert_eq!(r.index_e, Some(5));
        assert_eq!(r.value_group.canonical_gens(), vec![vec![rat(1, 15)]]);
        assert!(r.residue_transcendental);
        assert_eq!(r.residue_base, "F3");
    }

    #[test]
    fn structure_report_value_transcendental() {
        let t = crate::tower::tests::root_of_inverse_p(3);
        let pd = PairOfDefinition::new(
            &t,
            t.generator(1),
            GammaSpec::QuadIrr { q0: rat_int(0), q1: rat(1, 10), d: 2 },
        )
        .unwrap();
        let r = structure_report(&t, &pd).unwrap();
        assert_eq!(r.kind, OmegaKind::ValueTranscendental);
        assert_eq!(r.index_e, None);
        assert_eq!(r.value_group.canonical_gens(), vec![vec![rat(1, 3)]]);
        // sqrt(2)/10 < 1/6, so both min(gamma, 1/6) terms contribute gamma
        // and omega Q = 3*gamma
        assert_eq!(r.omega_q, GroupValue::finite(vec![rat_int(0)], 3));
        assert!(!r.residue_transcendental);
    }

    #[test]
    fn structure_report_rank_two_residue_transcendental() {
        // rational vector gamma over the rank-two base: omega Q = 3*gamma
        // since both conjugate distances (1/2, 0) dominate gamma = (0, 2/3)
        let mut t = Tower::new(
            crate::tower::BaseFieldSpec::RatFun {
                field: crate::tower::CoefField::Fp(3),
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
        let pd = PairOfDefinition::new(
            &t,
            t.generator(1),
            GammaSpec::RationalPoint(vec![rat_int(0), rat(2, 3)]),
        )
        .unwrap();
        let r = structure_report(&t, &pd).unwrap();
        assert_eq!(r.kind, OmegaKind::ResidueTranscendental);
        assert_eq!(r.omega_q, GroupValue::rational(vec![rat_int(0), rat_int(2)]));
        // 3*gamma = (0, 2) already lies in Z + Z + (0, 1/3)Z
        assert_eq!(r.index_e, Some(1));
        assert_eq!(
            r.value_group.canonical_gens(),
            vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat(1, 3)]]
        );
    }

    #[test]
    fn structure_report_above_all_base_element() {
        // gamma above all values, a in the base: value group nu K + Z*gamma
        let t = crate::tower::tests::padic_tower(3);
        let pd = PairOfDefinition::new(&t, t.int_elem(0), GammaSpec::AboveAll { rank: 1 }).unwrap();
        let r = structure_report(&t, &pd).unwrap();
        assert_eq!(r.kind, OmegaKind::ValueTranscendental);
        assert_eq!(r.omega_q, pd.gamma);
        assert_eq!(r.value_group.canonical_gens(), vec![vec![rat_int(1)]]);
    }

    #[test]
    fn purity_classification() {
        let (t, pd) = cube_root_pair(rat(1, 5));
        // e = 5: gamma = 1/5 over (1/3)Z
        assert_eq!(classify_purity(&t, &pd).unwrap(), PurityVerdict::WeaklyPureWitness(5));
        let pe2 = pd_rational(&t, t.generator(1), rat(2, 3));
        assert_eq!(classify_purity(&t, &pe2).unwrap(), PurityVerdict::Pe2);
        let above = PairOfDefinition::new(&t, t.generator(1), GammaSpec::AboveAll { rank: 1 }).unwrap();
        assert_eq!(classify_purity(&t, &above).unwrap(), PurityVerdict::Pe1);
    }

    #[test]
    fn coincidence_and_bound() {
        // two towers adjoining roots of the same minimal polynomial
        let t1 = crate::tower::tests::root_of_inverse_p(3);
        let t2 = crate::tower::tests::root_of_inverse_p(3);
        let p1 = pd_rational(&t1, t1.generator(1), rat(1, 5));
        let p2 = pd_rational(&t2, t2.generator(1), rat(1, 5));
        assert!(coincidence_test(&t1, &p1, &t2, &p2).unwrap());
        assert_eq!(simultaneous_extension_bound(&t1, &p1).unwrap(), 3);
        // gamma mismatch: not coincident
        let p3 = pd_rational(&t2, t2.generator(1), rat(1, 6));
        assert!(!coincidence_test(&t1, &p1, &t2, &p3).unwrap());
    }

    #[test]
    fn valuation_axioms_for_nu_a_gamma() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        let specs: Vec<GammaSpec> = vec![
            GammaSpec::RationalPoint(vec![rat(1, 5)]),
            GammaSpec::QuadIrr { q0: rat_int(0), q1: rat(1, 10), d: 2 },
            GammaSpec::AboveAll { rank: 1 },
        ];
        let t = crate::tower::tests::root_of_inverse_p(3);
        let a = t.generator(1);
        for spec in specs {
            let pd = PairOfDefinition::new(&t, a.clone(), spec).unwrap();
            for _ in 0..300 {
                let sample = |rng: &mut rand_chacha::ChaCha8Rng| {
                    let deg = rng.gen_range(0..4);
                    Poly::new(
                        (0..=deg)
                            .map(|_| {
                                t.rat_elem(&rat(rng.gen_range(-6..7), rng.gen_range(1..5))).unwrap()
                            })
                            .collect(),
                    )
                };
                let f = sample(&mut rng);
                let g = sample(&mut rng);
                let vf = nu_a_gamma(&t, &f, &pd);
                let vg = nu_a_gamma(&t, &g, &pd);
                let prod = nu_a_gamma(&t, &poly::mul(&t, &f, &g), &pd);
                assert_eq!(prod, vf.add(&vg).unwrap());
                let sum = nu_a_gamma(&t, &poly::add(&t, &f, &g), &pd);
                let min = pd.spec.min(&vf, &vg).unwrap().clone();
                let c = pd.spec.cmp(&sum, &min).unwrap();
                assert_ne!(c, Ordering::Less);
                if pd.spec.cmp(&vf, &vg).unwrap() != Ordering::Equal {
                    assert_eq!(c, Ordering::Equal);
                }
            }
        }
    }
}
