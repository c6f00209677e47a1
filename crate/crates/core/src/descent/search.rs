//! Bounded search for rational points on homogeneous spaces.
//!
//! For `z = m/e` the space `w^2 = b1 + c z^2 + (b/b1) z^4` has a rational
//! point iff `N = b1 e^4 + c m^2 e^2 + (b/b1) m^4` is a perfect square, and
//! then `w = ±sqrt(N) / e^2`. Pairs are visited in shells of increasing
//! height `max(m, e)` so that the first hit has minimal height.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::CurveModel;
use crate::arith::{exact_sqrt, SquareClass};
use crate::error::{Error, Result};
use crate::local::QuarticForm;
use crate::Point;

/// A rational point `(z, w)` on the homogeneous space of `b1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomSpacePoint {
    pub b1: SquareClass,
    pub z: BigRational,
    pub w: BigRational,
}

impl HomSpacePoint {
    /// Builds the point after checking it lies on the space of `b1` for `curve`.
    pub fn new(curve: &CurveModel, b1: SquareClass, z: BigRational, w: BigRational) -> Result<Self> {
        if z.is_zero() {
            return Err(Error::Domain("homogeneous-space point needs z != 0".into()));
        }
        let space = curve.homogeneous_space(b1)?;
        if !space.contains(&z, &w) {
            return Err(Error::Domain(format!("({z}, {w}) is not on {space}")));
        }
        Ok(HomSpacePoint { b1, z, w })
    }
}

impl CurveModel {
    /// `w^2 = b1 + a z^2 + (b/b1) z^4`.
    pub fn homogeneous_space(&self, b1: SquareClass) -> Result<QuarticForm> {
        let (d2, r) = self.b().div_rem(&b1.value());
        if !r.is_zero() {
            return Err(Error::Domain(format!("{b1} does not divide {}", self.b())));
        }
        QuarticForm::new(b1.value(), self.a(), d2)
    }
}

// bit i set iff i is a square modulo m
const fn square_mask(m: u64) -> u128 {
    let mut mask = 0u128;
    let mut i = 0;
    while i < m {
        mask |= 1 << ((i * i) % m);
        i += 1;
    }
    mask
}

const MASK64: u128 = square_mask(64);
const MASK63: u128 = square_mask(63);
const MASK65: u128 = square_mask(65);
const MASK11: u128 = square_mask(11);

fn square_root_i128(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let u = n as u128;
    if MASK64 >> (u % 64) & 1 == 0
        || MASK63 >> (u % 63) & 1 == 0
        || MASK65 >> (u % 65) & 1 == 0
        || MASK11 >> (u % 11) & 1 == 0
    {
        return None;
    }
    let mut r = (u as f64).sqrt() as u128;
    while r * r > u {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= u {
        r += 1;
    }
    (r * r == u).then_some(r as i128)
}

struct Space {
    d1: i128,
    c: i128,
    d2: i128,
    filter: ResidueFilter,
}

impl Space {
    // sqrt(d1 e^4 + c m^2 e^2 + d2 m^4) when that is a perfect square
    fn root(&self, m: i128, e: i128) -> Option<BigInt> {
        let fast = || -> Option<i128> {
            let m2 = m.checked_mul(m)?;
            let e2 = e.checked_mul(e)?;
            self.d1
                .checked_mul(e2.checked_mul(e2)?)?
                .checked_add(self.c.checked_mul(m2)?.checked_mul(e2)?)?
                .checked_add(self.d2.checked_mul(m2.checked_mul(m2)?)?)
        };
        match fast() {
            Some(n) => square_root_i128(n).map(BigInt::from),
            None => {
                let (m, e) = (BigInt::from(m), BigInt::from(e));
                let (m2, e2) = (&m * &m, &e * &e);
                let n = BigInt::from(self.d1) * &e2 * &e2
                    + BigInt::from(self.c) * &m2 * &e2
                    + BigInt::from(self.d2) * &m2 * &m2;
                exact_sqrt(&n)
            }
        }
    }

    // every (m, e, sqrt N) with max(m, e) = h, m, e >= 1, in shell order
    fn shell_roots(&self, h: i128) -> impl Iterator<Item = (i128, i128, BigInt)> + '_ {
        let rows = self.filter.candidates(h as u64, true, h as u64);
        let cols = self.filter.candidates(h as u64, false, h as u64 - 1);
        rows.map(move |e| (h, e as i128))
            .chain(cols.map(move |m| (m as i128, h)))
            .filter_map(|(m, e)| self.root(m, e).map(|s| (m, e, s)))
    }
}

const FILTER_MODULI: [u64; 9] = [64, 63, 65, 11, 17, 19, 23, 29, 31];

// For each modulus M, whether N(m, e) is a square mod M, tabulated over
// (m mod M, e mod M) in both orientations.
struct ResidueFilter {
    by_m: Vec<Vec<bool>>,
    by_e: Vec<Vec<bool>>,
}

impl ResidueFilter {
    fn new(d1: i128, c: i128, d2: i128) -> Self {
        let mut by_m = Vec::new();
        let mut by_e = Vec::new();
        for &modulus in &FILTER_MODULI {
            let md = modulus as i128;
            let squares: Vec<bool> = {
                let mut t = vec![false; modulus as usize];
                for i in 0..modulus {
                    t[(i * i % modulus) as usize] = true;
                }
                t
            };
            let (r1, rc, r2) = (d1.rem_euclid(md) as u64, c.rem_euclid(md) as u64, d2.rem_euclid(md) as u64);
            let size = (modulus * modulus) as usize;
            let (mut tm, mut te) = (vec![false; size], vec![false; size]);
            for m in 0..modulus {
                let m2 = m * m % modulus;
                for e in 0..modulus {
                    let e2 = e * e % modulus;
                    let n = (r1 * e2 % modulus * e2 + rc * m2 % modulus * e2 + r2 * m2 % modulus * m2) % modulus;
                    let ok = squares[n as usize];
                    tm[(m * modulus + e) as usize] = ok;
                    te[(e * modulus + m) as usize] = ok;
                }
            }
            by_m.push(tm);
            by_e.push(te);
        }
        ResidueFilter { by_m, by_e }
    }

    // values k in 1..=count passing every table, with the other coordinate
    // fixed at `fixed` (it is m when `fixed_is_m`, else e)
    fn candidates(&self, fixed: u64, fixed_is_m: bool, count: u64) -> impl Iterator<Item = u64> + '_ {
        let tables = if fixed_is_m { &self.by_m } else { &self.by_e };
        let rows: Vec<&[bool]> = FILTER_MODULI
            .iter()
            .zip(tables)
            .map(|(&md, t)| {
                let start = ((fixed % md) * md) as usize;
                &t[start..start + md as usize]
            })
            .collect();
        let mut counters = [0u64; FILTER_MODULI.len()];
        (1..=count).filter(move |_| {
            let mut pass = true;
            for (i, &md) in FILTER_MODULI.iter().enumerate() {
                counters[i] += 1;
                if counters[i] == md {
                    counters[i] = 0;
                }
                pass = pass && rows[i][counters[i] as usize];
            }
            pass
        })
    }
}

fn space_for(curve: &CurveModel, b1: SquareClass) -> Result<Space> {
    let q = curve.homogeneous_space(b1)?;
    Ok(Space {
        d1: q.d1(),
        c: q.c(),
        d2: q.d2(),
        filter: ResidueFilter::new(q.d1(), q.c(), q.d2()),
    })
}

fn make_point(b1: SquareClass, m: i128, e: i128, s: BigInt) -> HomSpacePoint {
    let e = BigInt::from(e);
    HomSpacePoint {
        b1,
        z: BigRational::new(BigInt::from(m), e.clone()),
        w: BigRational::new(s, &e * &e),
    }
}

/// All points with `z = ±m/e` in lowest terms, `1 <= m, e <= height_bound`,
/// both signs of `z` and `w` included, ordered by height shell.
pub fn search_homspace_points(
    curve: &CurveModel,
    b1: SquareClass,
    height_bound: u64,
) -> Result<Vec<HomSpacePoint>> {
    let space = space_for(curve, b1)?;
    let h = height_bound as i128;
    let hits: Vec<(i128, i128, BigInt)> = (1..=h)
        .into_par_iter()
        .flat_map_iter(|h| space.shell_roots(h).filter(|(m, e, _)| m.gcd(e) == 1))
        .collect();
    let mut points = Vec::new();
    for (m, e, s) in hits {
        for sm in [m, -m] {
            points.push(make_point(b1, sm, e, s.clone()));
            if !s.is_zero() {
                points.push(make_point(b1, sm, e, -s.clone()));
            }
        }
    }
    Ok(points)
}

/// The point of least height (ties broken by shell order), if any lies
/// within the bound.
pub fn first_homspace_point(
    curve: &CurveModel,
    b1: SquareClass,
    height_bound: u64,
) -> Result<Option<HomSpacePoint>> {
    let space = space_for(curve, b1)?;
    let hit = (1..=height_bound as i128)
        .into_par_iter()
        .find_map_first(|h| space.shell_roots(h).next());
    Ok(hit.map(|(m, e, s)| make_point(b1, m, e, s)))
}

/// `(z, w) -> (b1 / z^2, b1 w / z^3)`.
pub fn homspace_to_curve(curve: &CurveModel, p: &HomSpacePoint) -> Result<Point> {
    if p.z.is_zero() {
        return Err(Error::Domain("z = 0 has no image on the curve".into()));
    }
    let space = curve.homogeneous_space(p.b1)?;
    if !space.contains(&p.z, &p.w) {
        return Err(Error::Domain(format!("({}, {}) is not on {space}", p.z, p.w)));
    }
    let b1 = BigRational::from_integer(BigInt::from(p.b1.value()));
    let z2 = &p.z * &p.z;
    let x = &b1 / &z2;
    let y = b1 * &p.w / (z2 * &p.z);
    let point = Point::affine(x, y);
    debug_assert!(curve.contains(&point));
    Ok(point)
}

/// Square class of the x-coordinate, the descent map on a single point.
pub fn alpha(curve: &CurveModel, p: &Point) -> Result<SquareClass> {
    match p {
        Point::Infinity => Ok(SquareClass::ONE),
        Point::Affine { x, .. } if x.is_zero() => crate::arith::squarefree_class(curve.b()),
        Point::Affine { x, .. } => {
            let to_i128 = |v: &BigInt| v.to_i128().ok_or_else(|| Error::Range(format!("x-coordinate {x}")));
            let num = crate::arith::squarefree_class(to_i128(x.numer())?)?;
            let den = crate::arith::squarefree_class(to_i128(x.denom())?)?;
            Ok(num.mul(den))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_filter_agrees_with_exact_root() {
        for n in 0..20_000i128 {
            assert_eq!(square_root_i128(n).map(BigInt::from), exact_sqrt(&BigInt::from(n)), "{n}");
        }
        let big = 98_765_432_123_456i128;
        assert_eq!(square_root_i128(big * big), Some(big));
        assert_eq!(square_root_i128(big * big + 1), None);
    }

    #[test]
    fn residue_filter_keeps_every_square() {
        let mut total = 0;
        for (d1, c, d2) in [(3, -5, 7), (1, 0, 3), (2, 0, 2), (-1, 4, 12), (22, 0, 99)] {
            let space = Space {
                d1,
                c,
                d2,
                filter: ResidueFilter::new(d1, c, d2),
            };
            total += filtered_hits(&space);
        }
        assert!(total > 0);
    }

    fn filtered_hits(space: &Space) -> usize {
        let mut hits = 0;
        for h in 1..60i128 {
            let slow: Vec<(i128, i128)> = (1..=h)
                .map(|e| (h, e))
                .chain((1..h).map(|m| (m, h)))
                .filter(|&(m, e)| space.root(m, e).is_some())
                .collect();
            let fast: Vec<(i128, i128)> = space.shell_roots(h).map(|(m, e, _)| (m, e)).collect();
            assert_eq!(slow, fast, "h = {h}");
            hits += fast.len();
        }
        hits
    }

    #[test]
    fn witness_on_p_space() {
        let p: i128 = 19249;
        let e = CurveModel::new(0, 18 * p * p).unwrap();
        let b1 = SquareClass::from_squarefree(p).unwrap();
        let pts = search_homspace_points(&e, b1, 11).unwrap();
        let z = BigRational::new(4.into(), 11.into());
        let w = BigRational::new(p.into(), 121.into());
        assert!(pts.iter().any(|q| q.z == z && q.w == w));
        let first = first_homspace_point(&e, b1, 11).unwrap().unwrap();
        assert_eq!((first.z.clone(), first.w.clone()), (z, w));

        let x = homspace_to_curve(&e, &first).unwrap();
        assert!(e.contains(&x));
        assert_eq!(x.x().unwrap(), &BigRational::new((p * 121).into(), 16.into()));
        assert_eq!(alpha(&e, &x).unwrap(), b1);
        let image = e.apply_isogeny(&x).unwrap();
        assert!(e.dual().unwrap().contains(&image));
    }

    #[test]
    fn real_unsolvable_space_is_empty() {
        let e = CurveModel::new(0, 18 * 25).unwrap();
        let b1 = SquareClass::from_squarefree(-1).unwrap();
        assert!(search_homspace_points(&e, b1, 100).unwrap().is_empty());
    }

    #[test]
    fn every_reported_point_is_on_its_space() {
        let e = CurveModel::new(0, 18 * 121).unwrap();
        for b1 in [1, 2, 3, 6, 11, 22, 33, 66] {
            let b1 = SquareClass::from_squarefree(b1).unwrap();
            let space = e.homogeneous_space(b1).unwrap();
            for p in search_homspace_points(&e, b1, 60).unwrap() {
                assert!(space.contains(&p.z, &p.w));
                let x = homspace_to_curve(&e, &p).unwrap();
                assert!(e.contains(&x));
                assert_eq!(alpha(&e, &x).unwrap(), b1);
            }
        }
    }

    #[test]
    fn rejects_bad_points() {
        let e = CurveModel::new(0, 18 * 49).unwrap();
        let b1 = SquareClass::from_squarefree(2).unwrap();
        let zero = BigRational::zero();
        let one = BigRational::from_integer(1.into());
        assert!(HomSpacePoint::new(&e, b1, zero, one.clone()).is_err());
        assert!(HomSpacePoint::new(&e, b1, one.clone(), one).is_err());
        assert!(e.homogeneous_space(SquareClass::from_squarefree(5).unwrap()).is_err());
    }
}
