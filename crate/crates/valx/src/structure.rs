//! Distinguished chains, minimal-pair reduction, the conjugate count `j`,
//! and the implicit-constant-field classifier.

use std::cmp::Ordering;
use std::fmt;

use crate::extension::{
    self, classify, is_minimal_pair_by_value_order, min_poly_over_base, pair_conjugate_differences,
    pair_degree, ExtError, OmegaKind, PairOfDefinition,
};
use crate::newton;
use crate::poly::{self, Poly};
use crate::tower::{FieldElement, Tower};
use crate::valgroup::{torsion_order, GammaSpec, GroupValue, SubgroupDesc};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructError {
    NotHenselianContext,
    BrokenMonotonicity,
    NotMinimalAsserted,
    NotCoincident,
    Inseparable,
    Ext(ExtError),
}

impl fmt::Display for StructError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotHenselianContext => {
                write!(f, "distinguished chains require a henselian base context")
            }
            Self::BrokenMonotonicity => write!(f, "chain gaps must strictly decrease"),
            Self::NotMinimalAsserted => write!(f, "pair is not certified minimal"),
            Self::NotCoincident => write!(f, "pairs do not define the same valuation"),
            Self::Inseparable => write!(f, "requires a separable generator"),
            Self::Ext(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for StructError {}

impl From<ExtError> for StructError {
    fn from(e: ExtError) -> Self {
        match e {
            ExtError::Inseparable => StructError::Inseparable,
            ExtError::NotMinimalAsserted => StructError::NotMinimalAsserted,
            other => StructError::Ext(other),
        }
    }
}

/// Best-approximation chain `a_0, ..., a_n` with `a_n` in the base field.
/// Degrees are stated by the caller and validated where the tower can; the
/// maximality of each gap over all lower-degree elements quantifies over the
/// algebraic closure and is accepted from the certificate flag.
#[derive(Debug, Clone)]
pub struct DistinguishedChain {
    pub elems: Vec<FieldElement>,
    pub degrees: Vec<u64>,
    pub certified_maximal: bool,
}

impl DistinguishedChain {
    /// Gap values `nu(a_i - a_{i+1})` for `i < n`.
    pub fn deltas(&self, tower: &Tower) -> Vec<GroupValue> {
        self.elems
            .windows(2)
            .map(|w| tower.value(&tower.sub(&w[0], &w[1])))
            .collect()
    }
}

/// Validate chain shape: strictly decreasing gaps, strictly decreasing
/// stated degrees consistent with the tower's certificates, last element in
/// the base.
pub fn verify_chain(tower: &Tower, chain: &DistinguishedChain) -> Result<bool, StructError> {
    if !tower.henselian {
        return Err(StructError::NotHenselianContext);
    }
    if chain.elems.len() < 2 || chain.elems.len() != chain.degrees.len() {
        return Ok(false);
    }
    let deltas = chain.deltas(tower);
    for w in deltas.windows(2) {
        if newton::rational_lex_cmp(&w[0], &w[1]) != Ordering::Greater {
            return Err(StructError::BrokenMonotonicity);
        }
    }
    // degrees strictly decreasing, ending at 1 in the base
    for w in chain.degrees.windows(2) {
        if w[0] <= w[1] {
            return Ok(false);
        }
    }
    if *chain.degrees.last().unwrap() != 1 || chain.elems.last().unwrap().level() != 0 {
        return Ok(false);
    }
    // best-effort degree validation against tower certificates
    for (e, &d) in chain.elems.iter().zip(chain.degrees.iter()) {
        if !degree_consistent(tower, e, d) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn degree_consistent(tower: &Tower, e: &FieldElement, stated: u64) -> bool {
    let lv = e.level();
    if lv == 0 {
        return stated == 1;
    }
    if stated == 1 {
        return false;
    }
    // stated degree divides the containing level's degree and is a multiple
    // of the torsion order of the value
    let full = tower.degree_over_base(lv);
    if !full.is_multiple_of(stated) {
        return false;
    }
    let spec = GammaSpec::AboveAll { rank: tower.rank() };
    match torsion_order(&tower.value(e), &SubgroupDesc::standard(tower.rank()), &spec) {
        Ok(Some(t)) => stated.is_multiple_of(t),
        _ => true,
    }
}

/// Optional refutation search against the certified maximality of the chain
/// gaps: a candidate `z` of stated degree below `[K(a_i):K]` with
/// `nu(a_i - z) > delta_i` disproves the certificate. Returns the first
/// refuting `(chain index, candidate index)`.
pub fn refute_chain_maximality(
    tower: &Tower,
    chain: &DistinguishedChain,
    candidates: &[(FieldElement, u64)],
) -> Option<(usize, usize)> {
    let deltas = chain.deltas(tower);
    for (i, delta) in deltas.iter().enumerate() {
        for (k, (z, zdeg)) in candidates.iter().enumerate() {
            if *zdeg >= chain.degrees[i] {
                continue;
            }
            let d = tower.value(&tower.sub(&chain.elems[i], z));
            if newton::rational_lex_cmp(&d, delta) == Ordering::Greater {
                return Some((i, k));
            }
        }
    }
    None
}

/// Reduce a pair of definition along a verified chain: the first `a_i` whose
/// gap drops below gamma carries a minimal pair; if no gap does, the base
/// terminus does.
pub fn minimal_pair_from_chain(
    tower: &Tower,
    chain: &DistinguishedChain,
    gamma: &GroupValue,
    spec: &GammaSpec,
) -> Result<(usize, PairOfDefinition), StructError> {
    if !verify_chain(tower, chain)? {
        return Err(StructError::NotMinimalAsserted);
    }
    let deltas = chain.deltas(tower);
    let mut chosen = chain.elems.len() - 1;
    for (i, d) in deltas.iter().enumerate() {
        if spec.cmp(gamma, d).map_err(ExtError::from)? == Ordering::Greater {
            chosen = i;
            break;
        }
    }
    let pd = PairOfDefinition::with_gamma(
        tower,
        chain.elems[chosen].clone(),
        gamma.clone(),
        spec.clone(),
    )?;
    Ok((chosen, pd))
}

/// Conjugate count of the structure theorems: the number of conjugates
/// (including `a` itself) whose distance to `a` exceeds gamma — strictly in
/// the value-transcendental case, weakly in the residue-transcendental case.
pub fn j_count(tower: &Tower, pd: &PairOfDefinition) -> Result<u64, StructError> {
    let diffs = pair_conjugate_differences(tower, pd)?;
    let kind = classify(pd);
    let mut count = 1;
    for d in &diffs.diffs {
        let c = pd.spec.cmp(d, &pd.gamma).map_err(ExtError::from)?;
        let hit = match kind {
            OmegaKind::ValueTranscendental => c == Ordering::Greater,
            OmegaKind::ResidueTranscendental => c != Ordering::Less,
        };
        if hit {
            count += 1;
        }
    }
    Ok(count)
}

/// Prime-to-p part of the ramification index of a level over the base.
pub fn tame_degree(tower: &Tower, level: usize) -> u64 {
    prime_to_p_part(tower.degree_over_base(level), tower.base.residue_char_exponent())
}

fn prime_to_p_part(mut n: u64, p: u64) -> u64 {
    if p > 1 {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n
}

/// Symbolic descriptor of a subfield of the algebraic closure, always taken
/// up to henselization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldDesc {
    /// `K^h` itself.
    BaseHensel,
    /// `K(name)^h` of the given degree over `K^h`.
    Adjoined { name: String, degree: u64 },
    /// The tame subfield of the given degree inside the minimal field.
    TamePart { degree: u64 },
}

impl FieldDesc {
    pub fn degree(&self) -> u64 {
        match self {
            FieldDesc::BaseHensel => 1,
            FieldDesc::Adjoined { degree, .. } => *degree,
            FieldDesc::TamePart { degree } => *degree,
        }
    }
}

impl fmt::Display for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldDesc::BaseHensel => write!(f, "K^h"),
            FieldDesc::Adjoined { name, .. } => write!(f, "K({})^h", name),
            FieldDesc::TamePart { degree } => write!(f, "tame-subfield({})^h", degree),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IcVerdict {
    Exact(FieldDesc),
    ProperWithJ { j: u64, lower: FieldDesc, upper: FieldDesc },
    BoundsOnly { lower: FieldDesc, upper: FieldDesc },
}

impl IcVerdict {
    pub fn tag(&self) -> &'static str {
        match self {
            IcVerdict::Exact(_) => "Exact",
            IcVerdict::ProperWithJ { .. } => "ProperWithJ",
            IcVerdict::BoundsOnly { .. } => "BoundsOnly",
        }
    }
}

/// Classification of the implicit constant field of `(K(x)|K, omega)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ICReport {
    pub verdict: IcVerdict,
    /// Which decision rule produced the verdict.
    pub rule: &'static str,
    pub j: Option<u64>,
}

/// Separability shape of the pair element's minimal polynomial chain.
enum SepShape {
    Separable,
    PurelyInseparable,
    /// `a^(p^k) = b` with `b` a separable generator over the base: the
    /// separable part of `K(a)` is `K(b)`.
    Mixed { inner_level: usize, insep_step: Poly },
    Unsupported,
}

fn purely_insep_shape(tower: &Tower, f: &Poly) -> bool {
    // x^(p^k) - c with k >= 1
    let p = tower.base.characteristic();
    if p == 0 {
        return false;
    }
    let Some(deg) = f.degree() else { return false };
    let mut q = deg as u64;
    if q < 2 || !q.is_multiple_of(p) {
        return false;
    }
    while q.is_multiple_of(p) {
        q /= p;
    }
    if q != 1 {
        return false;
    }
    f.coeffs[1..deg].iter().all(|c| c.is_zero())
}

fn sep_shape(tower: &Tower, pd: &PairOfDefinition) -> Result<SepShape, StructError> {
    let level = tower
        .generator_level(&pd.a)
        .ok_or(StructError::Ext(ExtError::NotAGenerator))?;
    let f = Poly::new(tower.level(level).min_poly.clone());
    let over_base = f.coeffs.iter().all(|c| c.level() == 0);
    if over_base && poly::is_separable(tower, &f) {
        return Ok(SepShape::Separable);
    }
    if purely_insep_shape(tower, &f) {
        // x^(p^k) - c is purely inseparable over the base when c is a base
        // element (the step is then irreducible over the base too) or when
        // the whole chain consists of such steps
        let c = tower.neg(&f.coeffs[0]);
        if c.level() == 0 || all_levels_purely_insep(tower, level) {
            return Ok(SepShape::PurelyInseparable);
        }
        // mixed shape: c is a separable generator over the base
        if level == 2 && tower.generator_level(&c) == Some(1) {
            let inner = Poly::new(tower.level(1).min_poly.clone());
            if inner.coeffs.iter().all(|x| x.level() == 0) && poly::is_separable(tower, &inner) {
                return Ok(SepShape::Mixed { inner_level: 1, insep_step: f });
            }
        }
    }
    Ok(SepShape::Unsupported)
}

fn all_levels_purely_insep(tower: &Tower, up_to: usize) -> bool {
    (1..=up_to).all(|k| purely_insep_shape(tower, &Poly::new(tower.level(k).min_poly.clone())))
}

/// Decision cascade for the implicit constant field. The pair must be
/// certified minimal, either by the value-order criterion or by reducing
/// along a verified distinguished chain.
pub fn ic_classify(
    tower: &Tower,
    pd: &PairOfDefinition,
    chain: Option<&DistinguishedChain>,
) -> Result<ICReport, StructError> {
    let pd = match chain {
        Some(ch) => minimal_pair_from_chain(tower, ch, &pd.gamma, &pd.spec)?.1,
        None => pd.clone(),
    };
    if !is_minimal_pair_by_value_order(tower, &pd) {
        return Err(StructError::NotMinimalAsserted);
    }
    // degree-one minimal field: the implicit constant field is K^h
    if pd.a.level() == 0 {
        return Ok(ICReport {
            verdict: IcVerdict::Exact(FieldDesc::BaseHensel),
            rule: "degree-one",
            j: None,
        });
    }
    let level = tower
        .generator_level(&pd.a)
        .ok_or(StructError::Ext(ExtError::NotAGenerator))?;
    let n = pair_degree(tower, &pd)?;
    let name = tower.level(level).name.clone();
    let full_field = FieldDesc::Adjoined { name: name.clone(), degree: n };

    match sep_shape(tower, &pd)? {
        SepShape::PurelyInseparable => Ok(ICReport {
            verdict: IcVerdict::Exact(FieldDesc::BaseHensel),
            rule: "purely-inseparable",
            j: None,
        }),
        SepShape::Separable => {
            let kras = newton::kras(tower, level).map_err(ExtError::from)?;
            let j = j_count(tower, &pd)?;
            if matches!(pd.spec, GammaSpec::AboveAll { .. }) {
                // unique pair: the separable part of K(a), which is K(a) itself
                return Ok(ICReport {
                    verdict: IcVerdict::Exact(full_field),
                    rule: "unique-pair-separable-part",
                    j: Some(j),
                });
            }
            let kind = classify(&pd);
            let cmp = pd.spec.cmp(&pd.gamma, &kras).map_err(ExtError::from)?;
            let above = match kind {
                OmegaKind::ValueTranscendental => cmp == Ordering::Greater,
                OmegaKind::ResidueTranscendental => cmp == Ordering::Greater,
            };
            if above {
                debug_assert_eq!(j, 1);
                return Ok(ICReport {
                    verdict: IcVerdict::Exact(full_field),
                    rule: "gamma-above-krasner",
                    j: Some(j),
                });
            }
            // proper subfield: collapse when the divisor lattice forces it.
            // The ramification-side lower bound is the tame part of K(a)
            // itself (prime-to-p part of the pair degree); the inertia-side
            // bound is trivial in totally ramified towers.
            let lower = match kind {
                OmegaKind::ValueTranscendental => {
                    let t = prime_to_p_part(n, tower.base.residue_char_exponent());
                    if t == 1 {
                        FieldDesc::BaseHensel
                    } else {
                        FieldDesc::TamePart { degree: t }
                    }
                }
                OmegaKind::ResidueTranscendental => FieldDesc::BaseHensel,
            };
            let lo = lower.degree();
            let candidates: Vec<u64> =
                (1..n).filter(|m| m % lo == 0 && n % m == 0).collect();
            if candidates == vec![lo] {
                let rule = if lo == 1 { "prime-degree-collapse" } else { "divisor-pinning" };
                return Ok(ICReport { verdict: IcVerdict::Exact(lower), rule, j: Some(j) });
            }
            Ok(ICReport {
                verdict: IcVerdict::ProperWithJ { j, lower, upper: full_field },
                rule: "gamma-below-krasner",
                j: Some(j),
            })
        }
        SepShape::Mixed { inner_level, insep_step } => {
            // separable part K(b); Krasner applies when the inseparable step
            // pushes past the Krasner constant of b
            let b_name = tower.level(inner_level).name.clone();
            let m = tower.level(inner_level).degree() as u64;
            let sep_part = FieldDesc::Adjoined { name: b_name, degree: m };
            let kras_b = newton::kras(tower, inner_level).map_err(ExtError::from)?;
            let step_value = extension::nu_a_gamma(tower, &insep_step, &pd);
            let past = pd.spec.cmp(&step_value, &kras_b).map_err(ExtError::from)?
                == Ordering::Greater;
            if matches!(pd.spec, GammaSpec::AboveAll { .. }) || past {
                return Ok(ICReport {
                    verdict: IcVerdict::Exact(sep_part),
                    rule: "krasner-separable-part",
                    j: None,
                });
            }
            let t = tame_degree(tower, level);
            let lower =
                if t == 1 { FieldDesc::BaseHensel } else { FieldDesc::TamePart { degree: t } };
            Ok(ICReport {
                verdict: IcVerdict::BoundsOnly { lower, upper: sep_part },
                rule: "bounds-only",
                j: None,
            })
        }
        SepShape::Unsupported => {
            let t = tame_degree(tower, level);
            let lower =
                if t == 1 { FieldDesc::BaseHensel } else { FieldDesc::TamePart { degree: t } };
            Ok(ICReport {
                verdict: IcVerdict::BoundsOnly { lower, upper: full_field },
                rule: "bounds-only",
                j: None,
            })
        }
    }
}

/// Minimal fields of definition of one valuation share ramification index
/// and residue field.
pub fn minimal_field_invariants_check(
    t1: &Tower,
    p1: &PairOfDefinition,
    t2: &Tower,
    p2: &PairOfDefinition,
) -> Result<bool, StructError> {
    if !extension::coincidence_test(t1, p1, t2, p2)? {
        return Err(StructError::NotCoincident);
    }
    // totally ramified towers: ramification index = degree, residue field =
    // base residue field
    let r1 = pair_degree(t1, p1)?;
    let r2 = pair_degree(t2, p2)?;
    Ok(r1 == r2 && t1.base.residue_field_name() == t2.base.residue_field_name())
}

/// Minimal polynomial of the pair over the base, re-exported for callers
/// that exhibit it explicitly.
pub fn pair_min_poly(tower: &Tower, pd: &PairOfDefinition) -> Result<Poly, StructError> {
    Ok(min_poly_over_base(tower, pd)?)
}
