//! Rational points, the group law, the 2-isogeny pair and torsion.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};

use super::CurveModel;
use crate::arith::{exact_sqrt, factor, Int};
use crate::error::{Error, Result};

/// The identity, or an affine point with rational coordinates in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CurvePoint<T: Clone + Integer> {
    Infinity,
    Affine { x: Ratio<T>, y: Ratio<T> },
}

impl<T: Int> CurvePoint<T> {
    pub fn affine(x: Ratio<T>, y: Ratio<T>) -> Self {
        CurvePoint::Affine { x, y }
    }

    pub fn from_integers(x: i128, y: i128) -> Self {
        CurvePoint::Affine {
            x: Ratio::from_integer(T::lit(x)),
            y: Ratio::from_integer(T::lit(y)),
        }
    }

    /// The 2-torsion point `(0, 0)` every curve in this crate carries.
    pub fn origin() -> Self {
        CurvePoint::Affine {
            x: Ratio::zero(),
            y: Ratio::zero(),
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }

    pub fn x(&self) -> Option<&Ratio<T>> {
        match self {
            CurvePoint::Infinity => None,
            CurvePoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => CurvePoint::Affine {
                x: x.clone(),
                y: -y.clone(),
            },
        }
    }

    fn is_kernel_point(&self) -> bool {
        match self {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => x.is_zero() && y.is_zero(),
        }
    }

    fn is_integral(&self) -> bool {
        match self {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => x.is_integer() && y.is_integer(),
        }
    }
}

impl<T: Int> fmt::Display for CurvePoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Infinity => write!(f, "O"),
            CurvePoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

fn lit<T: Int>(v: i128) -> Ratio<T> {
    Ratio::from_integer(T::lit(v))
}

impl CurveModel {
    pub fn contains<T: Int>(&self, p: &CurvePoint<T>) -> bool {
        match p {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => {
                let rhs = x * x * x + lit::<T>(self.a()) * x * x + lit::<T>(self.b()) * x;
                y * y == rhs
            }
        }
    }

    pub fn add<T: Int>(&self, p: &CurvePoint<T>, q: &CurvePoint<T>) -> CurvePoint<T> {
        let (x1, y1, x2, y2) = match (p, q) {
            (CurvePoint::Infinity, _) => return q.clone(),
            (_, CurvePoint::Infinity) => return p.clone(),
            (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let a = lit::<T>(self.a());
        let slope = if x1 != x2 {
            (y2 - y1) / (x2 - x1)
        } else if y1 + y2 == Ratio::zero() {
            return CurvePoint::Infinity;
        } else {
            let three = lit::<T>(3);
            let two = lit::<T>(2);
            (three * x1 * x1 + two.clone() * &a * x1 + lit::<T>(self.b())) / (two * y1)
        };
        let x3 = &slope * &slope - a - x1 - x2;
        let y3 = slope * (x1 - &x3) - y1;
        CurvePoint::Affine { x: x3, y: y3 }
    }

    pub fn double<T: Int>(&self, p: &CurvePoint<T>) -> CurvePoint<T> {
        self.add(p, p)
    }

    /// `[n] P` by double-and-add.
    pub fn multiply<T: Int>(&self, p: &CurvePoint<T>, n: i64) -> CurvePoint<T> {
        let mut base = if n < 0 { p.neg() } else { p.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = CurvePoint::Infinity;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.double(&base);
            }
        }
        acc
    }

    /// `Ψ: E -> Ē`, `(x, y) -> (y^2/x^2, y(b - x^2)/x^2)`, with kernel `{O, (0,0)}`.
    pub fn apply_isogeny<T: Int>(&self, p: &CurvePoint<T>) -> Result<CurvePoint<T>> {
        if !self.contains(p) {
            return Err(Error::NotOnCurve);
        }
        if p.is_kernel_point() {
            return Ok(CurvePoint::Infinity);
        }
        let CurvePoint::Affine { x, y } = p else {
            unreachable!()
        };
        let x2 = x * x;
        Ok(CurvePoint::Affine {
            x: y * y / &x2,
            y: y * (lit::<T>(self.b()) - &x2) / x2,
        })
    }

    /// `Ψ̄: Ē -> E`, `(X, Y) -> (Y^2/4X^2, Y(b̄ - X^2)/8X^2)` where `b̄` is the
    /// dual curve's coefficient.
    pub fn apply_dual_isogeny<T: Int>(&self, p: &CurvePoint<T>) -> Result<CurvePoint<T>> {
        let dual = self.dual()?;
        if !dual.contains(p) {
            return Err(Error::NotOnCurve);
        }
        if p.is_kernel_point() {
            return Ok(CurvePoint::Infinity);
        }
        let CurvePoint::Affine { x, y } = p else {
            unreachable!()
        };
        let x2 = x * x;
        Ok(CurvePoint::Affine {
            x: y * y / (lit::<T>(4) * &x2),
            y: y * (lit::<T>(dual.b()) - &x2) / (lit::<T>(8) * x2),
        })
    }

    /// Order of `p` if it is at most 12, else `None`.
    ///
    /// Stops early when a multiple leaves the integers, which rules out
    /// torsion for curves with integer coefficients.
    pub fn torsion_order<T: Int>(&self, p: &CurvePoint<T>) -> Option<u32> {
        let mut q = p.clone();
        for n in 1..=12 {
            if q.is_infinity() {
                return Some(n);
            }
            if !q.is_integral() {
                return None;
            }
            q = self.add(&q, p);
        }
        None
    }

    /// Torsion points by Lutz-Nagell: integral points with `y = 0` or
    /// `y^2 | Δ`, each confirmed by computing its multiples.
    ///
    /// Such an `x` divides `y^2` (or `b` when `y = 0`), hence divides `Δ`, so
    /// the candidates are `0` and the signed divisors of `Δ`.
    pub fn torsion_points(&self) -> Result<Vec<CurvePoint<BigInt>>> {
        let disc = self.discriminant();
        // Δ = 16 b^2 (a^2 - 4b), factored piecewise to stay in range
        let mut primes: Vec<(u128, u32)> = vec![(2, 4)];
        for (n, mult) in [(self.b(), 2), (self.dual()?.b(), 1)] {
            for (q, e) in factor(n.unsigned_abs())? {
                match primes.iter_mut().find(|(r, _)| *r == q) {
                    Some((_, f)) => *f += e * mult,
                    None => primes.push((q, e * mult)),
                }
            }
        }
        let mut divisors: Vec<BigInt> = vec![BigInt::one()];
        for (q, e) in primes {
            let mut next = Vec::with_capacity(divisors.len() * (e as usize + 1));
            for d in &divisors {
                let mut power = BigInt::one();
                for _ in 0..=e {
                    next.push(d * &power);
                    power *= BigInt::from(q);
                }
            }
            divisors = next;
        }
        let a = BigInt::from(self.a());
        let b = BigInt::from(self.b());
        let candidates = std::iter::once(BigInt::zero())
            .chain(divisors.iter().flat_map(|d| [d.clone(), -d.clone()]));

        let mut found = vec![CurvePoint::Infinity];
        for x in candidates {
            let rhs = &x * &x * &x + &a * &x * &x + &b * &x;
            let Some(y) = exact_sqrt(&rhs) else {
                continue;
            };
            if !y.is_zero() && !(&disc % (&y * &y)).is_zero() {
                continue;
            }
            for y in [y.clone(), -y] {
                let p = CurvePoint::Affine {
                    x: Ratio::from_integer(x.clone()),
                    y: Ratio::from_integer(y),
                };
                if self.torsion_order(&p).is_some() && !found.contains(&p) {
                    found.push(p);
                }
            }
        }
        found.sort();
        Ok(found)
    }
}
