//! Local solvability of `w^2 = d1 + c z^2 + d2 z^4` over `R` and `Q_l`.
//!
//! A `Q_l`-point either has `z ∈ Z_l`, or `z = 1/u` with `u ∈ l Z_l`, which is
//! a `Z_l`-point on the reciprocal form `w^2 = d2 + c u^2 + d1 u^4`. Each
//! `Z_l` question is settled by a residue recursion over balls
//! `z0 + l^k Z_l`:
//!
//! * `F(z0)` is an `l`-adic square: `z0` itself is a point.
//! * `v(F(z0)) > 2 v(F'(z0))`: Hensel gives a root of `F`, hence `w = 0`.
//! * `F` is constant on the ball to precision `v(F(z0)) + e` (`e = 3` for an
//!   even valuation at `l = 2`, else `1`): the square class of `F` is fixed
//!   on the ball and `F(z0)` is not a square, so the ball is empty.
//! * otherwise split into `l` sub-balls.
//!
//! With `R = v_l(Res(F, F'))` every ball of level `2R + 3` falls in one of the
//! first three cases, which bounds the recursion.

mod oracle;

pub use oracle::{brute_oracle, brute_oracle_with, OracleVerdict, SquareTables};

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{exact_sqrt, is_prime_i128, jacobi, split_valuation, valuation, Int, Symbol};
use crate::error::{Error, Result};

/// `w^2 = d1 + c z^2 + d2 z^4` with `d1 d2 != 0` and `c^2 != 4 d1 d2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuarticForm {
    d1: i128,
    c: i128,
    d2: i128,
}

impl QuarticForm {
    pub fn new(d1: i128, c: i128, d2: i128) -> Result<Self> {
        let degenerate = || Error::DegenerateForm { d1, c, d2 };
        if d1 == 0 || d2 == 0 {
            return Err(degenerate());
        }
        let disc = BigInt::from(c) * c - BigInt::from(4) * d1 * d2;
        if disc.is_zero() {
            return Err(degenerate());
        }
        Ok(QuarticForm { d1, c, d2 })
    }

    pub fn d1(&self) -> i128 {
        self.d1
    }

    pub fn c(&self) -> i128 {
        self.c
    }

    pub fn d2(&self) -> i128 {
        self.d2
    }

    /// The form seen through `z -> 1/z, w -> w/z^2`.
    pub fn reciprocal(&self) -> QuarticForm {
        QuarticForm {
            d1: self.d2,
            c: self.c,
            d2: self.d1,
        }
    }

    /// Multiplies the whole equation by `u^2`.
    pub fn scaled(&self, u: i128) -> Result<QuarticForm> {
        let u2 = u
            .checked_mul(u)
            .ok_or_else(|| Error::Range(format!("scale {u}")))?;
        let m = |x: i128| x.checked_mul(u2).ok_or_else(|| Error::Range(format!("{x}·{u2}")));
        QuarticForm::new(m(self.d1)?, m(self.c)?, m(self.d2)?)
    }

    /// Right-hand side at a rational `z`.
    pub fn eval_rational(&self, z: &BigRational) -> BigRational {
        let z2 = z * z;
        let int = |v: i128| BigRational::from_integer(BigInt::from(v));
        int(self.d1) + int(self.c) * &z2 + int(self.d2) * &z2 * &z2
    }

    /// Whether `(z, w)` satisfies the equation exactly.
    pub fn contains(&self, z: &BigRational, w: &BigRational) -> bool {
        w * w == self.eval_rational(z)
    }

    /// `v_l` of the resultant `Res(F, F') = 16 d1 d2^2 (c^2 - 4 d1 d2)^2`.
    pub fn resultant_valuation(&self, l: i128) -> u32 {
        let l = BigInt::from(l);
        let disc = BigInt::from(self.c) * self.c - BigInt::from(4) * self.d1 * self.d2;
        let v = |x: BigInt| valuation(&x, &l).expect("nonzero by construction");
        v(BigInt::from(16)) + v(BigInt::from(self.d1)) + 2 * v(BigInt::from(self.d2)) + 2 * v(disc)
    }

    /// Recursion depth after which every residue ball is decided.
    pub fn depth_bound(&self, l: i128) -> u32 {
        2 * self.resultant_valuation(l) + 3
    }
}

impl fmt::Display for QuarticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w^2 = {} + {} z^2 + {} z^4", self.d1, self.c, self.d2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Infinity,
    Prime(i128),
}

impl Place {
    pub fn prime(l: i128) -> Result<Place> {
        if is_prime_i128(l)? {
            Ok(Place::Prime(l))
        } else {
            Err(Error::NotPrime(l.to_string()))
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Prime(l) => write!(f, "{l}"),
        }
    }
}

/// How a `Z_l`-point was certified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftKind {
    /// `F(z0)` is a nonzero `l`-adic square (or zero).
    SquareValue { value_valuation: Option<u32> },
    /// `v(F(z0)) > 2 v(F'(z0))`, so `F` has a root congruent to `z0`.
    HenselRoot { value_valuation: u32, derivative_valuation: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalWitness {
    /// A rational point, checked exactly.
    Rational { z: BigRational, w: BigRational },
    /// An integer `z0` on the form (or on its reciprocal, meaning `z = 1/z0`)
    /// found at recursion level `level`.
    Lift {
        z0: BigInt,
        reciprocal: bool,
        level: u32,
        kind: LiftKind,
    },
}

/// Size of the residue recursion that produced a verdict.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchTrace {
    pub balls_visited: u64,
    pub deepest_level: u32,
    pub depth_bound: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolvabilityCertificate {
    pub form: QuarticForm,
    pub place: Place,
    pub solvable: bool,
    pub witness: Option<LocalWitness>,
    pub trace: SearchTrace,
}

/// Real points exist iff `d2 t^2 + c t + d1` is nonnegative for some `t >= 0`.
pub fn solvable_real(q: &QuarticForm) -> bool {
    if q.d1 > 0 || q.d2 > 0 {
        return true;
    }
    // both negative: need the vertex at t > 0 to reach zero
    q.c > 0 && BigInt::from(q.c) * q.c >= BigInt::from(4) * q.d1 * q.d2
}

/// Is the nonzero integer `n` a square in `Q_l`?
pub(crate) fn is_padic_square<T: Int>(n: &T, l: &T) -> bool {
    if n.is_zero() {
        return true;
    }
    let (e, unit) = split_valuation(n, l).expect("nonzero");
    if e % 2 == 1 {
        return false;
    }
    let two = T::lit(2);
    if *l == two {
        unit.mod_floor(&T::lit(8)).is_one()
    } else {
        jacobi(&unit, l).expect("odd prime modulus") == Symbol::One
    }
}

enum Ball {
    Point(LocalWitness),
    Empty,
    Split,
    Overflow,
}

struct Coeffs<T> {
    d1: T,
    c: T,
    d2: T,
}

impl<T: Int> Coeffs<T> {
    fn of(q: &QuarticForm) -> Self {
        Coeffs {
            d1: T::lit(q.d1),
            c: T::lit(q.c),
            d2: T::lit(q.d2),
        }
    }

    fn value(&self, z: &T) -> Option<T> {
        let z2 = z.checked_mul(z)?;
        let z4 = z2.checked_mul(&z2)?;
        self.d1
            .checked_add(&self.c.checked_mul(&z2)?)?
            .checked_add(&self.d2.checked_mul(&z4)?)
    }

    fn derivative(&self, z: &T) -> Option<T> {
        let z2 = z.checked_mul(z)?;
        let z3 = z2.checked_mul(z)?;
        let two = T::lit(2);
        let four = T::lit(4);
        two.checked_mul(&self.c)?
            .checked_mul(z)?
            .checked_add(&four.checked_mul(&self.d2)?.checked_mul(&z3)?)
    }
}

fn classify_ball<T: Int>(
    f: &Coeffs<T>,
    l: &T,
    z0: &T,
    level: u32,
    reciprocal: bool,
) -> Ball {
    let Some(g) = f.value(z0) else {
        return Ball::Overflow;
    };
    let z0_big = || to_big(z0);
    if g.is_zero() {
        return Ball::Point(LocalWitness::Lift {
            z0: z0_big(),
            reciprocal,
            level,
            kind: LiftKind::SquareValue {
                value_valuation: None,
            },
        });
    }
    let a = valuation(&g, l).expect("nonzero");
    if is_padic_square(&g, l) {
        // z0 = 0 on the reciprocal form is the point at infinity of the original
        if let Some(w) = exact_sqrt(&g).filter(|_| !(reciprocal && z0.is_zero())) {
            let (z, w) = rational_point(z0_big(), to_big(&w), reciprocal);
            return Ball::Point(LocalWitness::Rational { z, w });
        }
        return Ball::Point(LocalWitness::Lift {
            z0: z0_big(),
            reciprocal,
            level,
            kind: LiftKind::SquareValue {
                value_valuation: Some(a),
            },
        });
    }
    let Some(dg) = f.derivative(z0) else {
        return Ball::Overflow;
    };
    let b = if dg.is_zero() {
        None
    } else {
        Some(valuation(&dg, l).expect("nonzero"))
    };
    if let Some(b) = b {
        if a > 2 * b {
            return Ball::Point(LocalWitness::Lift {
                z0: z0_big(),
                reciprocal,
                level,
                kind: LiftKind::HenselRoot {
                    value_valuation: a,
                    derivative_valuation: b,
                },
            });
        }
    }
    let extra = if *l == T::lit(2) && a % 2 == 0 { 3 } else { 1 };
    let linear = b.map_or(u64::MAX, |b| b as u64 + level as u64);
    let quadratic = 2 * level as u64;
    if linear.min(quadratic) >= a as u64 + extra {
        Ball::Empty
    } else {
        Ball::Split
    }
}

fn to_big<T: Int>(v: &T) -> BigInt {
    v.to_i128()
        .map(BigInt::from)
        .unwrap_or_else(|| v.to_string().parse().expect("decimal integer"))
}

// (z0, w) on F, or on the reciprocal form with z = 1/z0, w -> w/z0^2
fn rational_point(z0: BigInt, w: BigInt, reciprocal: bool) -> (BigRational, BigRational) {
    if reciprocal {
        let z02 = &z0 * &z0;
        (
            BigRational::new(BigInt::one(), z0),
            BigRational::new(w, z02),
        )
    } else {
        (BigRational::from_integer(z0), BigRational::from_integer(w))
    }
}

enum ZlOutcome {
    Point(LocalWitness),
    Empty,
}

// Residue recursion for Z_l-points of one form, in scalar type T.
// Returns None if an intermediate value overflowed T.
fn zl_points<T: Int>(
    q: &QuarticForm,
    l: i128,
    reciprocal: bool,
    trace: &mut SearchTrace,
) -> Result<Option<ZlOutcome>> {
    let f = Coeffs::<T>::of(q);
    let lt = T::lit(l);
    let bound = q.depth_bound(l);
    trace.depth_bound = trace.depth_bound.max(bound);
    // (center, level, l^level)
    let mut stack: Vec<(T, u32, T)> = vec![(T::zero(), 0, T::one())];
    while let Some((z0, level, modulus)) = stack.pop() {
        trace.balls_visited += 1;
        trace.deepest_level = trace.deepest_level.max(level);
        match classify_ball(&f, &lt, &z0, level, reciprocal) {
            Ball::Point(w) => return Ok(Some(ZlOutcome::Point(w))),
            Ball::Empty => {}
            Ball::Overflow => return Ok(None),
            Ball::Split => {
                if level >= bound {
                    return Err(Error::Inconsistent(format!(
                        "residue recursion for {q} at {l} exceeded its depth bound {bound}"
                    )));
                }
                let Some(next) = modulus.checked_mul(&lt) else {
                    return Ok(None);
                };
                let mut t = lt.clone() - T::one();
                loop {
                    let Some(child) = t.checked_mul(&modulus).and_then(|s| s.checked_add(&z0))
                    else {
                        return Ok(None);
                    };
                    stack.push((child, level + 1, next.clone()));
                    if t.is_zero() {
                        break;
                    }
                    t = t - T::one();
                }
            }
        }
    }
    Ok(Some(ZlOutcome::Empty))
}

fn zl_points_any(q: &QuarticForm, l: i128, reciprocal: bool, trace: &mut SearchTrace) -> Result<ZlOutcome> {
    if let Some(out) = zl_points::<i128>(q, l, reciprocal, trace)? {
        return Ok(out);
    }
    *trace = SearchTrace::default();
    Ok(zl_points::<BigInt>(q, l, reciprocal, trace)?.expect("BigInt never overflows"))
}

/// Decides whether the form has a point over `Q_l`.
pub fn solvable_padic(q: &QuarticForm, l: i128) -> Result<SolvabilityCertificate> {
    let place = Place::prime(l)?;
    let mut trace = SearchTrace::default();
    let mut outcome = zl_points_any(q, l, false, &mut trace)?;
    if matches!(outcome, ZlOutcome::Empty) {
        outcome = zl_points_any(&q.reciprocal(), l, true, &mut trace)?;
    }
    let (solvable, witness) = match outcome {
        ZlOutcome::Point(w) => (true, Some(w)),
        ZlOutcome::Empty => (false, None),
    };
    if let Some(LocalWitness::Rational { z, w }) = &witness {
        if !q.contains(z, w) {
            return Err(Error::Inconsistent(format!("witness ({z}, {w}) is not on {q}")));
        }
    }
    Ok(SolvabilityCertificate {
        form: *q,
        place,
        solvable,
        witness,
        trace,
    })
}

/// Solvability at a single place.
pub fn solvable_at(q: &QuarticForm, place: Place) -> Result<bool> {
    match place {
        Place::Infinity => Ok(solvable_real(q)),
        Place::Prime(l) => Ok(solvable_padic(q, l)?.solvable),
    }
}

/// True iff the form has points at every listed place.
///
/// Places are visited in their natural order (infinity, then primes
/// ascending) and the first failure stops the scan.
pub fn solvable_everywhere_locally(q: &QuarticForm, places: &[Place]) -> Result<bool> {
    if places.is_empty() {
        return Err(Error::Domain("empty place set".into()));
    }
    let mut sorted = places.to_vec();
    sorted.sort();
    sorted.dedup();
    for place in sorted {
        if !solvable_at(q, place)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(d1: i128, c: i128, d2: i128) -> QuarticForm {
        QuarticForm::new(d1, c, d2).unwrap()
    }

    #[test]
    fn rejects_degenerate_forms() {
        assert!(QuarticForm::new(0, 1, 1).is_err());
        assert!(QuarticForm::new(1, 1, 0).is_err());
        assert!(QuarticForm::new(1, 2, 1).is_err());
        assert!(QuarticForm::new(-1, 2, -1).is_err());
        assert!(QuarticForm::new(1, 3, 1).is_ok());
    }

    #[test]
    fn real_examples() {
        let p2 = 7 * 7;
        assert!(!solvable_real(&form(-3, 0, -6 * p2)));
        assert!(solvable_real(&form(3, 0, 294)));
        assert!(solvable_real(&form(-2, 0, 72)));
        // -1 + 3t - 2t^2 = -(2t - 1)(t - 1) >= 0 on [1/2, 1]
        assert!(solvable_real(&form(-1, 3, -2)));
        assert!(!solvable_real(&form(-1, -3, -2)));
        assert!(!solvable_real(&form(-1, 2, -2)));
    }

    #[test]
    fn two_adic_mod_eight_lift() {
        let cert = solvable_padic(&form(3, 0, 6 * 49), 2).unwrap();
        assert!(cert.solvable);
        match cert.witness.unwrap() {
            LocalWitness::Lift { z0, kind, .. } => {
                assert_eq!(z0, BigInt::from(1));
                assert_eq!(kind, LiftKind::SquareValue { value_valuation: Some(0) });
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn p_seven_mod_eight_fails_at_two() {
        let cert = solvable_padic(&form(7, 0, 18 * 7), 2).unwrap();
        assert!(!cert.solvable);
        assert!(cert.witness.is_none());
        assert!(cert.trace.deepest_level <= cert.trace.depth_bound);
    }

    #[test]
    fn p_seventeen_space_at_seventeen() {
        // (-18/17)_4 = (2/17)_4 (3/17) = (-1)(-1) = +1, so C_p(Q_17) is nonempty
        assert!(solvable_padic(&form(17, 0, 18 * 17), 17).unwrap().solvable);
        // 41: (2/41)_4 = -1 and (3/41) = -1 as well
        assert!(solvable_padic(&form(41, 0, 18 * 41), 41).unwrap().solvable);
        // 73: (2/73)_4 = +1, (3/73) = +1 -> (-18/73)_4 = +1
        assert!(solvable_padic(&form(73, 0, 18 * 73), 73).unwrap().solvable);
        // 89 ≡ 17 mod 24 with (2/89)_4 = +1 -> (-18/89)_4 = -1
        assert!(!solvable_padic(&form(89, 0, 18 * 89), 89).unwrap().solvable);
    }

    #[test]
    fn rational_witnesses_are_exact() {
        let q = form(-2, 0, 72);
        let cert = solvable_padic(&q, 3).unwrap();
        assert!(cert.solvable);
        if let Some(LocalWitness::Rational { z, w }) = cert.witness {
            assert!(q.contains(&z, &w));
        }
        // reciprocal side: w^2 = 5 + 4 z^4 has the point at z = 1/... via d2 = 4
        let q = form(5, 0, 4);
        let cert = solvable_padic(&q, 5).unwrap();
        match cert.witness.unwrap() {
            LocalWitness::Rational { z, w } => assert!(q.contains(&z, &w)),
            LocalWitness::Lift { .. } => {}
        }
    }

    #[test]
    fn everywhere_locally_examples() {
        let places = [Place::Infinity, Place::Prime(2), Place::Prime(3), Place::Prime(7)];
        assert!(solvable_everywhere_locally(&form(2, 0, 9 * 49), &places).unwrap());
        assert!(!solvable_everywhere_locally(&form(-3, 0, -5), &places).unwrap());
        assert!(!solvable_everywhere_locally(&form(3, 0, 6 * 49), &places).unwrap());
        // order independence
        let mut rev = places;
        rev.reverse();
        assert!(!solvable_everywhere_locally(&form(3, 0, 6 * 49), &rev).unwrap());
        assert!(solvable_everywhere_locally(&form(3, 0, 6 * 49), &[]).is_err());
    }

    #[test]
    fn rejects_composite_place() {
        assert!(matches!(solvable_padic(&form(1, 0, 3), 15), Err(Error::NotPrime(_))));
    }

    #[test]
    fn falls_back_to_bigint_on_overflow() {
        let p: i128 = 19249;
        let cert = solvable_padic(&form(p, 0, 18 * p), p).unwrap();
        assert!(cert.solvable);
        let cert = solvable_padic(&form(3, 0, 6 * p * p), p).unwrap();
        // (3/19249) = +1 since 19249 ≡ 1 mod 12
        assert!(cert.solvable);
    }

    #[test]
    fn padic_square_test() {
        assert!(is_padic_square(&17i128, &2));
        assert!(!is_padic_square(&5i128, &2));
        assert!(is_padic_square(&(4 * 17i128), &2));
        assert!(!is_padic_square(&(2 * 17i128), &2));
        assert!(is_padic_square(&(9 * 4i128), &3));
        assert!(!is_padic_square(&(9 * 2i128), &3));
    }
}
