//! Descent via 2-isogeny on `E: y^2 = x^3 + a x^2 + b x`.
//!
//! `Ē: Y^2 = X^3 - 2a X^2 + (a^2 - 4b) X` is the isogenous curve.
//! Orientation used throughout: `S[Ψ̄]` is cut out of the homogeneous spaces
//! of `E` (classes dividing `b`) and `S[Ψ]` out of those of `Ē` (classes
//! dividing `b̄`), both tested at the places dividing `2 b b̄` and infinity.
//! The middle coefficient of each space is the `a` of the curve it belongs to.

mod point;
mod search;

pub use point::CurvePoint;
pub use search::{alpha, first_homspace_point, homspace_to_curve, search_homspace_points, HomSpacePoint};

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::arith::{prime_support, squarefree_class, SquareClass};
use crate::error::{Error, Result};
use crate::local::{solvable_everywhere_locally, Place};

/// Default search height for rank bounds.
pub const DEFAULT_HEIGHT_BOUND: u64 = 2000;

/// `y^2 = x^3 + a x^2 + b x`, nonsingular.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CurveModel {
    a: i128,
    b: i128,
}

impl CurveModel {
    pub fn new(a: i128, b: i128) -> Result<Self> {
        let singular = || Error::SingularCurve { a, b };
        if b == 0 {
            return Err(singular());
        }
        let disc = BigInt::from(a) * a - BigInt::from(4) * b;
        if disc.is_zero() {
            return Err(singular());
        }
        // the dual coefficient must be representable too
        a.checked_mul(a)
            .and_then(|a2| b.checked_mul(4).and_then(|b4| a2.checked_sub(b4)))
            .and_then(|_| a.checked_mul(-2))
            .ok_or_else(|| Error::Range(format!("curve ({a}, {b})")))?;
        Ok(CurveModel { a, b })
    }

    pub fn a(&self) -> i128 {
        self.a
    }

    pub fn b(&self) -> i128 {
        self.b
    }

    /// `(ā, b̄) = (-2a, a^2 - 4b)`.
    pub fn dual(&self) -> Result<CurveModel> {
        CurveModel::new(-2 * self.a, self.a * self.a - 4 * self.b)
    }

    /// `Δ = 16 b^2 (a^2 - 4b)`.
    pub fn discriminant(&self) -> BigInt {
        let b = BigInt::from(self.b);
        BigInt::from(16) * &b * &b * (BigInt::from(self.a) * self.a - 4 * b)
    }

    /// Infinity and the primes dividing `2 b b̄`, in ascending order.
    pub fn bad_places(&self) -> Result<Vec<Place>> {
        let dual = self.dual()?;
        let mut primes: BTreeSet<u128> = BTreeSet::from([2]);
        primes.extend(prime_support(self.b)?);
        primes.extend(prime_support(dual.b)?);
        let mut places = vec![Place::Infinity];
        places.extend(primes.into_iter().map(|q| Place::Prime(q as i128)));
        Ok(places)
    }

    pub fn torsion_info(&self) -> Result<Vec<crate::Point>> {
        self.torsion_points()
    }
}

impl fmt::Display for CurveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3 + {} x^2 + {} x", self.a, self.b)
    }
}

/// Which half of the isogeny pair a Selmer group belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Isogeny {
    /// `Ψ: E -> Ē`; its Selmer group lives on the spaces of `Ē`.
    Psi,
    /// `Ψ̄: Ē -> E`; its Selmer group lives on the spaces of `E`.
    PsiBar,
}

impl Isogeny {
    /// The curve whose homogeneous spaces this half of the descent uses.
    pub fn space_curve(self, e: &CurveModel) -> Result<CurveModel> {
        match self {
            Isogeny::PsiBar => Ok(*e),
            Isogeny::Psi => e.dual(),
        }
    }
}

/// All signed squarefree `b1` supported on the primes of `b`.
pub fn divisor_classes(b: i128) -> Result<Vec<SquareClass>> {
    let mut classes: Vec<i128> = vec![1];
    for q in prime_support(b)? {
        let q = q as i128;
        let more: Vec<i128> = classes.iter().map(|c| c * q).collect();
        classes.extend(more);
    }
    let negatives: Vec<i128> = classes.iter().map(|c| -c).collect();
    classes.extend(negatives);
    classes.sort_by_key(|c| (c.abs(), *c < 0));
    classes.into_iter().map(SquareClass::from_squarefree).collect()
}

/// A finite subgroup of `Q*/Q*^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelmerGroup {
    pub classes: BTreeSet<SquareClass>,
    pub bad_places: Vec<Place>,
    pub which: Isogeny,
}

impl SelmerGroup {
    pub fn new(classes: BTreeSet<SquareClass>, bad_places: Vec<Place>, which: Isogeny) -> Self {
        SelmerGroup {
            classes,
            bad_places,
            which,
        }
    }

    pub fn dim(&self) -> u32 {
        self.classes.len().trailing_zeros()
    }

    pub fn contains(&self, c: SquareClass) -> bool {
        self.classes.contains(&c)
    }

    pub fn values(&self) -> Vec<i128> {
        self.classes.iter().map(|c| c.value()).collect()
    }

    pub fn is_subgroup(&self) -> bool {
        is_subgroup(&self.classes)
    }
}

fn is_subgroup(classes: &BTreeSet<SquareClass>) -> bool {
    classes.contains(&SquareClass::ONE)
        && classes.len().is_power_of_two()
        && classes
            .iter()
            .all(|x| classes.iter().all(|y| classes.contains(&x.mul(*y))))
}

/// Subgroup generated by `gens`.
pub fn span(gens: impl IntoIterator<Item = SquareClass>) -> BTreeSet<SquareClass> {
    let mut group = BTreeSet::from([SquareClass::ONE]);
    for g in gens {
        if group.contains(&g) {
            continue;
        }
        let shifted: Vec<SquareClass> = group.iter().map(|x| x.mul(g)).collect();
        group.extend(shifted);
    }
    group
}

/// Selmer group of `which`, decided by local solvability at the bad places.
pub fn selmer(e: &CurveModel, which: Isogeny) -> Result<SelmerGroup> {
    let curve = which.space_curve(e)?;
    let places = e.bad_places()?;
    let candidates = divisor_classes(curve.b)?;
    let verdicts: Vec<Result<Option<SquareClass>>> = candidates
        .par_iter()
        .map(|&b1| {
            let form = curve.homogeneous_space(b1)?;
            Ok(solvable_everywhere_locally(&form, &places)?.then_some(b1))
        })
        .collect();
    let mut classes = BTreeSet::new();
    for v in verdicts {
        if let Some(c) = v? {
            classes.insert(c);
        }
    }
    let torsion_class = squarefree_class(curve.b)?;
    if !classes.contains(&torsion_class) || !is_subgroup(&classes) {
        return Err(Error::Inconsistent(format!(
            "locally solvable classes {:?} for {curve} do not form a group containing {torsion_class}",
            classes.iter().map(|c| c.value()).collect::<Vec<_>>()
        )));
    }
    Ok(SelmerGroup::new(classes, places, which))
}

/// Image of the descent map found by search, with the points that prove it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaImage {
    pub classes: BTreeSet<SquareClass>,
    pub points: Vec<HomSpacePoint>,
}

impl AlphaImage {
    pub fn dim(&self) -> u32 {
        self.classes.len().trailing_zeros()
    }
}

/// Lower approximation of the descent image: `{1, b}` plus every Selmer
/// class whose space has a point of height at most `height_bound`.
pub fn alpha_image(e: &CurveModel, which: Isogeny, height_bound: u64) -> Result<AlphaImage> {
    let group = selmer(e, which)?;
    alpha_image_within(e, &group, height_bound)
}

pub(crate) fn alpha_image_within(
    e: &CurveModel,
    group: &SelmerGroup,
    height_bound: u64,
) -> Result<AlphaImage> {
    let curve = group.which.space_curve(e)?;
    let mut image = span([squarefree_class(curve.b)?]);
    let mut points = Vec::new();
    let mut pending: Vec<SquareClass> = group.classes.iter().copied().collect();
    pending.sort_by_key(|c| (c.value().abs(), c.value() < 0));
    for b1 in pending {
        if image.contains(&b1) {
            continue;
        }
        if let Some(p) = first_homspace_point(&curve, b1, height_bound)? {
            image = span(image.iter().copied().chain([b1]));
            points.push(p);
        }
    }
    Ok(AlphaImage {
        classes: image,
        points,
    })
}

/// Selmer and image dimensions with the rank bounds they imply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankBounds {
    pub dim_selmer_psibar: u32,
    pub dim_selmer_psi: u32,
    pub dim_im_alpha: u32,
    pub dim_im_alphabar: u32,
    pub lower: u32,
    pub upper: i64,
}

impl RankBounds {
    pub fn from_dims(sel_psibar: u32, sel_psi: u32, im_alpha: u32, im_alphabar: u32) -> Self {
        RankBounds {
            dim_selmer_psibar: sel_psibar,
            dim_selmer_psi: sel_psi,
            dim_im_alpha: im_alpha,
            dim_im_alphabar: im_alphabar,
            lower: (im_alpha + im_alphabar).saturating_sub(2),
            upper: sel_psibar as i64 + sel_psi as i64 - 2,
        }
    }

    /// The rank, when the bounds meet.
    pub fn exact(&self) -> Option<u32> {
        (self.lower as i64 == self.upper).then_some(self.lower)
    }
}

/// Everything a full descent on `E` produces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Descent {
    pub selmer_psibar: SelmerGroup,
    pub selmer_psi: SelmerGroup,
    pub image_alpha: AlphaImage,
    pub image_alphabar: AlphaImage,
    pub bounds: RankBounds,
}

pub fn descend(e: &CurveModel, height_bound: u64) -> Result<Descent> {
    let selmer_psibar = selmer(e, Isogeny::PsiBar)?;
    let selmer_psi = selmer(e, Isogeny::Psi)?;
    let image_alpha = alpha_image_within(e, &selmer_psibar, height_bound)?;
    let image_alphabar = alpha_image_within(e, &selmer_psi, height_bound)?;
    let bounds = RankBounds::from_dims(
        selmer_psibar.dim(),
        selmer_psi.dim(),
        image_alpha.dim(),
        image_alphabar.dim(),
    );
    Ok(Descent {
        selmer_psibar,
        selmer_psi,
        image_alpha,
        image_alphabar,
        bounds,
    })
}

/// `dim Im α + dim Im ᾱ - 2 <= rank <= dim S[Ψ̄] + dim S[Ψ] - 2`.
pub fn rank_bounds(e: &CurveModel, height_bound: u64) -> Result<RankBounds> {
    Ok(descend(e, height_bound)?.bounds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(a: i128, b: i128) -> CurveModel {
        CurveModel::new(a, b).unwrap()
    }

    fn values(g: &SelmerGroup) -> Vec<i128> {
        let mut v = g.values();
        v.sort_by_key(|c| (c.abs(), *c < 0));
        v
    }

    #[test]
    fn dual_curve_examples() {
        let p: i128 = 7;
        assert_eq!(curve(0, 18 * p * p).dual().unwrap(), curve(0, -72 * p * p));
        assert_eq!(curve(0, 1).dual().unwrap(), curve(0, -4));
        assert_eq!(curve(0, 5).dual().unwrap().dual().unwrap(), curve(0, 80));
        assert_eq!(curve(3, 1).dual().unwrap(), curve(-6, 5));
        assert!(CurveModel::new(0, 0).is_err());
        assert!(CurveModel::new(2, 1).is_err());
    }

    #[test]
    fn bad_place_examples() {
        let places = curve(0, 18 * 49).bad_places().unwrap();
        assert_eq!(
            places,
            vec![Place::Infinity, Place::Prime(2), Place::Prime(3), Place::Prime(7)]
        );
        assert_eq!(curve(0, 1).bad_places().unwrap(), vec![Place::Infinity, Place::Prime(2)]);
        let p: i128 = 19249;
        assert_eq!(
            curve(0, 18 * p * p).bad_places().unwrap(),
            vec![Place::Infinity, Place::Prime(2), Place::Prime(3), Place::Prime(p)]
        );
    }

    #[test]
    fn divisor_class_examples() {
        let p: i128 = 11;
        let mut got: Vec<i128> = divisor_classes(18 * p * p).unwrap().iter().map(|c| c.value()).collect();
        got.sort();
        let mut want: Vec<i128> = [1, 2, 3, 6, p, 2 * p, 3 * p, 6 * p]
            .iter()
            .flat_map(|&c| [c, -c])
            .collect();
        want.sort();
        assert_eq!(got, want);
        let dual: BTreeSet<i128> = divisor_classes(-72 * p * p).unwrap().iter().map(|c| c.value()).collect();
        assert_eq!(dual, got.into_iter().collect());
        let one: Vec<i128> = divisor_classes(1).unwrap().iter().map(|c| c.value()).collect();
        assert_eq!(one, vec![1, -1]);
    }

    #[test]
    fn selmer_examples() {
        let g = selmer(&curve(0, 18 * 49), Isogeny::PsiBar).unwrap();
        assert_eq!(values(&g), vec![1, 2]);
        let g = selmer(&curve(0, 18 * 121), Isogeny::PsiBar).unwrap();
        assert_eq!(values(&g), vec![1, 2, 3, 6, 11, 22, 33, 66]);
        let g = selmer(&curve(0, 18 * 529), Isogeny::Psi).unwrap();
        assert_eq!(values(&g), vec![1, -2, -23, 46]);
        assert!(g.is_subgroup());
        assert_eq!(g.dim(), 2);
    }

    #[test]
    fn selmer_matches_local_module() {
        let e = curve(0, 18 * 13 * 13);
        let places = e.bad_places().unwrap();
        for which in [Isogeny::PsiBar, Isogeny::Psi] {
            let g = selmer(&e, which).unwrap();
            let c = which.space_curve(&e).unwrap();
            for b1 in divisor_classes(c.b()).unwrap() {
                let form = c.homogeneous_space(b1).unwrap();
                assert_eq!(
                    g.contains(b1),
                    solvable_everywhere_locally(&form, &places).unwrap(),
                    "{b1}"
                );
            }
        }
    }

    #[test]
    fn span_and_dims() {
        let c = |v| SquareClass::from_squarefree(v).unwrap();
        let g = span([c(2), c(3), c(6)]);
        assert_eq!(g.len(), 4);
        assert!(g.contains(&c(6)));
        let b = RankBounds::from_dims(3, 1, 1, 1);
        assert_eq!((b.lower, b.upper), (0, 2));
        assert_eq!(b.exact(), None);
        assert_eq!(RankBounds::from_dims(1, 1, 1, 1).exact(), Some(0));
    }

    #[test]
    fn rank_bound_examples() {
        let b = rank_bounds(&curve(0, 18 * 49), 50).unwrap();
        assert_eq!((b.lower, b.upper), (0, 0));
        let b = rank_bounds(&curve(0, 18 * 121), 50).unwrap();
        assert_eq!(b.upper, 2);
        let b = rank_bounds(&curve(0, 18 * 73 * 73), 50).unwrap();
        assert_eq!(b.upper, 3);
    }

    #[test]
    fn alpha_image_contains_torsion_class_and_is_monotone() {
        let e = curve(0, 18 * 121);
        let small = alpha_image(&e, Isogeny::PsiBar, 1).unwrap();
        assert!(small.classes.contains(&SquareClass::from_squarefree(2).unwrap()));
        let big = alpha_image(&e, Isogeny::PsiBar, 40).unwrap();
        assert!(small.classes.is_subset(&big.classes));
        let sel = selmer(&e, Isogeny::PsiBar).unwrap();
        assert!(big.classes.is_subset(&sel.classes));
    }
}
