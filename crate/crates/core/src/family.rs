//! The family `E_p: y^2 = x^3 + 18 p^2 x` for primes `p`.
//!
//! Closed-form Selmer groups keyed on `p mod 24` and `(2/p)_4`, the rank
//! ceilings they imply, and the quartic representations `3p = a^4 + 2b^4`,
//! `p = a^4 + 18b^4` that produce explicit points.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;

use crate::arith::{is_prime_i128, quartic_symbol, SquareClass, Symbol};
use crate::descent::{
    descend, homspace_to_curve, CurveModel, HomSpacePoint, Isogeny, RankBounds, SelmerGroup,
};
use crate::error::{Error, Result};
use crate::Point;

fn require_prime(p: i128) -> Result<()> {
    if p < 2 || !is_prime_i128(p)? {
        return Err(Error::NotPrime(p.to_string()));
    }
    Ok(())
}

/// `E_p: y^2 = x^3 + 18 p^2 x`.
pub fn curve_for_prime(p: i128) -> Result<CurveModel> {
    require_prime(p)?;
    let b = p
        .checked_mul(p)
        .and_then(|p2| p2.checked_mul(18))
        .ok_or_else(|| Error::Range(format!("18·{p}^2")))?;
    CurveModel::new(0, b)
}

/// `Y^2 = 3X^3 + 6p^2 X`, related to the reduced model by `x = 3X, y = 3Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OriginalModel {
    pub p: i128,
}

impl OriginalModel {
    pub fn contains(&self, pt: &Point) -> bool {
        match pt {
            Point::Infinity => true,
            Point::Affine { x, y } => {
                let c = |v: i128| BigRational::from_integer(BigInt::from(v));
                y * y == c(3) * x * x * x + c(6 * self.p * self.p) * x
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    ToReduced,
    ToOriginal,
}

/// Moves a point between the original and reduced models of `E_p`.
pub fn transform_point(p: i128, direction: Direction, pt: &Point) -> Result<Point> {
    let reduced = curve_for_prime(p)?;
    let original = OriginalModel { p };
    let three = BigRational::from_integer(BigInt::from(3));
    let (ok, factor) = match direction {
        Direction::ToReduced => (original.contains(pt), three),
        Direction::ToOriginal => (reduced.contains(pt), three.recip()),
    };
    if !ok {
        return Err(Error::NotOnCurve);
    }
    Ok(match pt {
        Point::Infinity => Point::Infinity,
        Point::Affine { x, y } => Point::affine(x * &factor, y * &factor),
    })
}

/// `p mod 24` and, for `p ≡ 1 mod 8`, the quartic symbol `(2/p)_4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeClass {
    pub p: i128,
    pub residue_mod_24: u8,
    pub quartic2: Option<Symbol>,
}

impl PrimeClass {
    fn quartic_plus(&self) -> bool {
        self.quartic2 == Some(Symbol::One)
    }
}

pub fn classify(p: i128) -> Result<PrimeClass> {
    require_prime(p)?;
    let quartic2 = if p % 8 == 1 {
        Some(quartic_symbol(&2i128, &p)?)
    } else {
        None
    };
    Ok(PrimeClass {
        p,
        residue_mod_24: (p % 24) as u8,
        quartic2,
    })
}

fn group(p: i128, which: Isogeny, values: &[i128]) -> Result<SelmerGroup> {
    let classes = values
        .iter()
        .map(|&v| SquareClass::from_squarefree(v))
        .collect::<Result<BTreeSet<_>>>()?;
    Ok(SelmerGroup::new(classes, curve_for_prime(p)?.bad_places()?, which))
}

/// Case number (1 to 5) of the `S[Ψ̄]` table.
pub fn psibar_case(class: &PrimeClass) -> u8 {
    if class.p <= 3 {
        return 5;
    }
    match (class.residue_mod_24, class.quartic_plus()) {
        (11 | 19, _) | (1, true) => 1,
        (5 | 13 | 23, _) | (1, false) => 2,
        (17, true) => 3,
        (17, false) => 4,
        _ => 5,
    }
}

/// Case number (1 to 3) of the `S[Ψ]` table.
pub fn psi_case(class: &PrimeClass) -> u8 {
    match (class.residue_mod_24, class.quartic_plus()) {
        _ if class.p <= 3 => 3,
        (1, true) => 1,
        (23, _) => 2,
        _ => 3,
    }
}

pub fn closed_form_selmer_psibar(p: i128) -> Result<SelmerGroup> {
    let class = classify(p)?;
    let values: Vec<i128> = match psibar_case(&class) {
        1 => vec![1, 2, 3, 6, p, 2 * p, 3 * p, 6 * p],
        2 => vec![1, 2, 3, 6],
        3 => vec![1, 2, 3 * p, 6 * p],
        4 => vec![1, 2, p, 2 * p],
        _ => vec![1, 2],
    };
    group(p, Isogeny::PsiBar, &values)
}

pub fn closed_form_selmer_psi(p: i128) -> Result<SelmerGroup> {
    let class = classify(p)?;
    let values: Vec<i128> = match psi_case(&class) {
        1 => vec![1, -2, p, -2 * p],
        2 => vec![1, -2, -p, 2 * p],
        _ => vec![1, -2],
    };
    group(p, Isogeny::Psi, &values)
}

/// Rank ceiling by residue class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TheoremBound {
    ExactZero,
    AtMostOne,
    AtMostTwo,
    AtMostThree,
}

impl TheoremBound {
    pub fn ceiling(self) -> i64 {
        match self {
            TheoremBound::ExactZero => 0,
            TheoremBound::AtMostOne => 1,
            TheoremBound::AtMostTwo => 2,
            TheoremBound::AtMostThree => 3,
        }
    }
}

impl fmt::Display for TheoremBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoremBound::ExactZero => write!(f, "exact 0"),
            b => write!(f, "<= {}", b.ceiling()),
        }
    }
}

pub fn theorem_bound(p: i128) -> Result<TheoremBound> {
    let class = classify(p)?;
    Ok(match (class.residue_mod_24, class.quartic_plus()) {
        _ if p <= 3 => TheoremBound::ExactZero,
        (7, _) => TheoremBound::ExactZero,
        (5 | 13 | 17, _) => TheoremBound::AtMostOne,
        (1, true) => TheoremBound::AtMostThree,
        _ => TheoremBound::AtMostTwo,
    })
}

/// Which quartic representation a witness solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReprKind {
    /// `3p = a^4 + 2 b^4`
    ThreeP,
    /// `p = a^4 + 18 b^4`
    P,
}

impl ReprKind {
    pub fn coefficient(self) -> i128 {
        match self {
            ReprKind::ThreeP => 2,
            ReprKind::P => 18,
        }
    }

    /// The `n` that `a^4 + k b^4` must equal for prime `p`.
    pub fn target(self, p: i128) -> i128 {
        match self {
            ReprKind::ThreeP => 3 * p,
            ReprKind::P => p,
        }
    }
}

impl fmt::Display for ReprKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReprKind::ThreeP => write!(f, "3p = a^4 + 2b^4"),
            ReprKind::P => write!(f, "p = a^4 + 18b^4"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ReprWitness {
    pub kind: ReprKind,
    pub a: i128,
    pub b: i128,
}

impl ReprWitness {
    /// Checks the identity and the coprimality side condition for `p`:
    /// `gcd(a, 6p) = 1` for `ThreeP`, `gcd(a, 18p) = 1` for `P`.
    pub fn validate(&self, p: i128) -> Result<()> {
        let fail = |why: &str| Err(Error::Domain(format!("{self:?} for p = {p}: {why}")));
        if self.a < 1 || self.b < 1 {
            return fail("a and b must be positive");
        }
        let a4 = self.a.checked_pow(4);
        let b4 = self.b.checked_pow(4);
        let sum = a4.zip(b4).and_then(|(a4, b4)| a4.checked_add(b4.checked_mul(self.kind.coefficient())?));
        if sum != Some(self.kind.target(p)) {
            return fail("identity does not hold");
        }
        let modulus = match self.kind {
            ReprKind::ThreeP => 6 * p,
            ReprKind::P => 18 * p,
        };
        if self.a.gcd(&modulus) != 1 {
            return fail("gcd condition fails");
        }
        Ok(())
    }
}

/// Every `(a, b)`, both positive, with `a^4 + k b^4 = n`, by increasing `a`.
pub fn repr_solutions(n: i128, k: i128) -> impl Iterator<Item = (i128, i128)> {
    let a_max = if n < 1 || k < 1 { 0 } else { n.nth_root(4) };
    (1..=a_max).filter_map(move |a| {
        let rest = n - a.pow(4);
        if rest <= 0 || rest % k != 0 {
            return None;
        }
        let q = rest / k;
        let b = q.nth_root(4);
        (b >= 1 && b.pow(4) == q).then_some((a, b))
    })
}

/// Lexicographically least `(a, b)`, both positive, with `a^4 + k b^4 = n`.
pub fn find_repr(n: i128, k: i128) -> Option<(i128, i128)> {
    repr_solutions(n, k).next()
}

/// The first representation for the target of `kind` that also meets the
/// gcd condition.
pub fn find_witness(p: i128, kind: ReprKind) -> Result<Option<ReprWitness>> {
    require_prime(p)?;
    Ok(repr_solutions(kind.target(p), kind.coefficient())
        .map(|(a, b)| ReprWitness { kind, a, b })
        .find(|w| w.validate(p).is_ok()))
}

/// `(b/a, n/a^2)` on the space of `b1 = n`, where `n` is the target of the
/// representation: `w^2 = n + (18p^2/n) z^4`.
pub fn witness_homspace_point(p: i128, w: &ReprWitness) -> Result<HomSpacePoint> {
    w.validate(p)?;
    let e = curve_for_prime(p)?;
    let n = w.kind.target(p);
    let a = BigInt::from(w.a);
    let z = BigRational::new(BigInt::from(w.b), a.clone());
    let wv = BigRational::new(BigInt::from(n), &a * &a);
    HomSpacePoint::new(&e, SquareClass::from_squarefree(n)?, z, wv)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropositionClaim {
    /// `p ≡ 17 mod 24`, `(2/p)_4 = 1` and `3p = a^4 + 2b^4`.
    RankOne { witness: ReprWitness },
    /// `p ≡ 1 mod 24`, `(2/p)_4 = 1`, `p = a^4 + 18b^4` and `3p = c^4 + 2d^4`.
    RankAtLeastTwo { p_witness: ReprWitness, three_p_witness: ReprWitness },
}

impl PropositionClaim {
    pub fn lower_bound(&self) -> u32 {
        match self {
            PropositionClaim::RankOne { .. } => 1,
            PropositionClaim::RankAtLeastTwo { .. } => 2,
        }
    }

    pub fn witnesses(&self) -> Vec<ReprWitness> {
        match self {
            PropositionClaim::RankOne { witness } => vec![*witness],
            PropositionClaim::RankAtLeastTwo {
                p_witness,
                three_p_witness,
            } => vec![*p_witness, *three_p_witness],
        }
    }
}

impl fmt::Display for PropositionClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropositionClaim::RankOne { .. } => write!(f, "rank = 1"),
            PropositionClaim::RankAtLeastTwo { .. } => write!(f, "rank >= 2"),
        }
    }
}

pub fn proposition_rank(p: i128) -> Result<Option<PropositionClaim>> {
    let class = classify(p)?;
    if !class.quartic_plus() {
        return Ok(None);
    }
    Ok(match class.residue_mod_24 {
        17 => find_witness(p, ReprKind::ThreeP)?.map(|witness| PropositionClaim::RankOne { witness }),
        1 => match (find_witness(p, ReprKind::P)?, find_witness(p, ReprKind::ThreeP)?) {
            (Some(p_witness), Some(three_p_witness)) => Some(PropositionClaim::RankAtLeastTwo {
                p_witness,
                three_p_witness,
            }),
            _ => None,
        },
        _ => None,
    })
}

/// Closed forms, engine output and rank data for one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyReport {
    pub prime_class: PrimeClass,
    pub closed_psibar: SelmerGroup,
    pub closed_psi: SelmerGroup,
    pub engine_psibar: SelmerGroup,
    pub engine_psi: SelmerGroup,
    pub theorem_bound: TheoremBound,
    pub proposition: Option<PropositionClaim>,
    pub witnesses: Vec<ReprWitness>,
    pub rank_bounds: RankBounds,
    pub consistent: bool,
}

impl FamilyReport {
    pub fn selmer_consistent(&self) -> bool {
        self.closed_psibar.classes == self.engine_psibar.classes
            && self.closed_psi.classes == self.engine_psi.classes
    }
}

pub fn verify_prime(p: i128, height_bound: u64) -> Result<FamilyReport> {
    let prime_class = classify(p)?;
    let e = curve_for_prime(p)?;
    let descent = descend(&e, height_bound)?;
    let proposition = proposition_rank(p)?;
    let witnesses = proposition.as_ref().map(|c| c.witnesses()).unwrap_or_default();
    for w in &witnesses {
        let pt = witness_homspace_point(p, w)?;
        if !e.contains(&homspace_to_curve(&e, &pt)?) {
            return Err(Error::Inconsistent(format!("witness {w:?} maps off the curve")));
        }
    }
    let theorem_bound = theorem_bound(p)?;
    let bounds = descent.bounds;
    let mut report = FamilyReport {
        prime_class,
        closed_psibar: closed_form_selmer_psibar(p)?,
        closed_psi: closed_form_selmer_psi(p)?,
        engine_psibar: descent.selmer_psibar,
        engine_psi: descent.selmer_psi,
        theorem_bound,
        witnesses,
        rank_bounds: bounds,
        consistent: false,
        proposition,
    };
    let witness_lower = report.proposition.as_ref().map_or(0, |c| c.lower_bound());
    report.consistent = report.selmer_consistent()
        && bounds.upper <= theorem_bound.ceiling()
        && witness_lower as i64 <= bounds.upper
        && bounds.lower as i64 <= bounds.upper;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(g: &SelmerGroup) -> Vec<i128> {
        g.values()
    }

    fn sorted(mut v: Vec<i128>) -> Vec<i128> {
        v.sort();
        v
    }

    #[test]
    fn curve_examples() {
        assert_eq!(curve_for_prime(7).unwrap(), CurveModel::new(0, 882).unwrap());
        assert_eq!(curve_for_prime(2).unwrap(), CurveModel::new(0, 72).unwrap());
        assert_eq!(curve_for_prime(19249).unwrap().b(), 18 * 19249 * 19249);
        assert_eq!(curve_for_prime(15), Err(Error::NotPrime("15".into())));
    }

    #[test]
    fn transform_round_trip() {
        let p = 5;
        let e = curve_for_prime(p).unwrap();
        for pt in [Point::Infinity, Point::origin()] {
            assert_eq!(transform_point(p, Direction::ToOriginal, &pt).unwrap(), pt);
        }
        let b1 = SquareClass::from_squarefree(2).unwrap();
        let hp = crate::descent::first_homspace_point(&e, b1, 200).unwrap();
        let b1 = SquareClass::from_squarefree(3).unwrap();
        let hp = hp.or(crate::descent::first_homspace_point(&e, b1, 200).unwrap()).unwrap();
        let pt = homspace_to_curve(&e, &hp).unwrap();
        let there = transform_point(p, Direction::ToOriginal, &pt).unwrap();
        assert!(OriginalModel { p }.contains(&there));
        assert_eq!(transform_point(p, Direction::ToReduced, &there).unwrap(), pt);
        assert_eq!(
            transform_point(p, Direction::ToReduced, &Point::from_integers(1, 1)),
            Err(Error::NotOnCurve)
        );
    }

    #[test]
    fn classify_examples() {
        let c = classify(1217).unwrap();
        assert_eq!((c.residue_mod_24, c.quartic2), (17, Some(Symbol::One)));
        let c = classify(17).unwrap();
        assert_eq!((c.residue_mod_24, c.quartic2), (17, Some(Symbol::MinusOne)));
        let c = classify(11).unwrap();
        assert_eq!((c.residue_mod_24, c.quartic2), (11, None));
        assert!(classify(1).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(values(&closed_form_selmer_psibar(11).unwrap()), vec![1, 2, 3, 6, 11, 22, 33, 66]);
        assert_eq!(values(&closed_form_selmer_psibar(41).unwrap()), vec![1, 2, 41, 82]);
        assert_eq!(values(&closed_form_selmer_psibar(3).unwrap()), vec![1, 2]);
        assert_eq!(values(&closed_form_selmer_psibar(2).unwrap()), vec![1, 2]);
        assert_eq!(sorted(values(&closed_form_selmer_psi(23).unwrap())), vec![-23, -2, 1, 46]);
        assert_eq!(sorted(values(&closed_form_selmer_psi(73).unwrap())), vec![-146, -2, 1, 73]);
        assert_eq!(sorted(values(&closed_form_selmer_psi(7).unwrap())), vec![-2, 1]);
    }

    #[test]
    fn theorem_bound_examples() {
        assert_eq!(theorem_bound(7).unwrap(), TheoremBound::ExactZero);
        assert_eq!(theorem_bound(5).unwrap(), TheoremBound::AtMostOne);
        assert_eq!(theorem_bound(73).unwrap(), TheoremBound::AtMostThree);
        assert_eq!(theorem_bound(11).unwrap(), TheoremBound::AtMostTwo);
        assert_eq!(theorem_bound(2).unwrap().to_string(), "exact 0");
        assert_eq!(TheoremBound::AtMostTwo.to_string(), "<= 2");
    }

    #[test]
    fn repr_examples() {
        assert_eq!(find_repr(3 * 1217, 2), Some((7, 5)));
        assert_eq!(find_repr(19249, 18), Some((11, 4)));
        assert_eq!(find_repr(3 * 19249, 2), Some((5, 13)));
        assert_eq!(find_repr(3 * 1601, 2), Some((1, 7)));
        assert_eq!(find_repr(7, 2), None);
        assert_eq!(find_repr(3, 2), Some((1, 1)));
        let bad = ReprWitness { kind: ReprKind::ThreeP, a: 7, b: 4 };
        assert!(bad.validate(1217).is_err());
    }

    #[test]
    fn witness_points() {
        let p = 19249;
        let w = ReprWitness { kind: ReprKind::P, a: 11, b: 4 };
        let pt = witness_homspace_point(p, &w).unwrap();
        assert_eq!(pt.z, BigRational::new(4.into(), 11.into()));
        assert_eq!(pt.w, BigRational::new(p.into(), 121.into()));
        let w = ReprWitness { kind: ReprKind::ThreeP, a: 5, b: 13 };
        let pt = witness_homspace_point(p, &w).unwrap();
        assert_eq!(pt.w, BigRational::new((3 * p).into(), 25.into()));
        let w = ReprWitness { kind: ReprKind::ThreeP, a: 7, b: 5 };
        let pt = witness_homspace_point(1217, &w).unwrap();
        assert_eq!(pt.z, BigRational::new(5.into(), 7.into()));
        assert_eq!(pt.w, BigRational::new(3651.into(), 49.into()));
        let e = curve_for_prime(1217).unwrap();
        assert!(e.contains(&homspace_to_curve(&e, &pt).unwrap()));
    }

    #[test]
    fn proposition_examples() {
        assert!(matches!(proposition_rank(1217).unwrap(), Some(PropositionClaim::RankOne { .. })));
        let claim = proposition_rank(19249).unwrap().unwrap();
        assert_eq!(claim.to_string(), "rank >= 2");
        assert_eq!(proposition_rank(7).unwrap(), None);
    }

    #[test]
    fn verify_small_primes() {
        let r = verify_prime(7, 100).unwrap();
        assert!(r.consistent);
        assert_eq!((r.rank_bounds.lower, r.rank_bounds.upper), (0, 0));
        let r = verify_prime(11, 100).unwrap();
        assert!(r.consistent);
        assert_eq!(r.rank_bounds.upper, 2);
    }
}
