//! Exact integer number theory: valuations, square classes, Jacobi and
//! rational quartic residue symbols, primality and small factorizations.
//!
//! The symbol and valuation routines are generic over [`Int`], so the same
//! code runs on `i64`, `i128` and `BigInt`. Primality and factorization are
//! fixed to `u128` since they rely on Miller-Rabin with a proven witness set.

use std::fmt;
use std::ops::Mul;

use num_integer::{Integer, Roots};
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Signed integer scalar the arithmetic layer is generic over.
pub trait Int:
    Integer
    + Signed
    + Roots
    + Clone
    + fmt::Debug
    + fmt::Display
    + FromPrimitive
    + ToPrimitive
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + Send
    + Sync
    + 'static
{
    /// Small constant or checked conversion from `i128`.
    fn lit(v: i128) -> Self {
        <Self as FromPrimitive>::from_i128(v).expect("value fits the scalar type")
    }
}

impl<T> Int for T where
    T: Integer
        + Signed
        + Roots
        + Clone
        + fmt::Debug
        + fmt::Display
        + FromPrimitive
        + ToPrimitive
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + Send
        + Sync
        + 'static
{
}

/// Value of a Jacobi, Legendre or quartic residue symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    MinusOne,
    Zero,
    One,
}

impl Symbol {
    pub fn value(self) -> i8 {
        match self {
            Symbol::MinusOne => -1,
            Symbol::Zero => 0,
            Symbol::One => 1,
        }
    }

    fn from_sign(negative: bool) -> Self {
        if negative {
            Symbol::MinusOne
        } else {
            Symbol::One
        }
    }
}

impl Mul for Symbol {
    type Output = Symbol;

    fn mul(self, rhs: Symbol) -> Symbol {
        match self.value() * rhs.value() {
            -1 => Symbol::MinusOne,
            0 => Symbol::Zero,
            _ => Symbol::One,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Largest `e` with `l^e | n`.
pub fn valuation<T: Int>(n: &T, l: &T) -> Result<u32> {
    if n.is_zero() {
        return Err(Error::ZeroValuation);
    }
    if *l <= T::one() {
        return Err(Error::Domain(format!("valuation base {l} must be at least 2")));
    }
    let mut m = n.abs();
    let mut e = 0;
    loop {
        let (q, r) = m.div_rem(l);
        if !r.is_zero() {
            return Ok(e);
        }
        m = q;
        e += 1;
    }
}

/// Splits `n` into `(e, n / l^e)` with the cofactor prime to `l`.
pub fn split_valuation<T: Int>(n: &T, l: &T) -> Result<(u32, T)> {
    if n.is_zero() {
        return Err(Error::ZeroValuation);
    }
    let mut m = n.clone();
    let mut e = 0;
    loop {
        let (q, r) = m.div_rem(l);
        if !r.is_zero() {
            return Ok((e, m));
        }
        m = q;
        e += 1;
    }
}

/// Integer square root when `n` is a perfect square.
pub fn exact_sqrt<T: Int>(n: &T) -> Option<T> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if r.clone() * r.clone() == *n {
        Some(r)
    } else {
        None
    }
}

pub fn is_square<T: Int>(n: &T) -> bool {
    exact_sqrt(n).is_some()
}

/// Jacobi symbol `(a / n)` for odd positive `n`.
pub fn jacobi<T: Int>(a: &T, n: &T) -> Result<Symbol> {
    let two = T::lit(2);
    if !n.is_positive() || n.is_even() {
        return Err(Error::Domain(format!("Jacobi modulus {n} must be odd and positive")));
    }
    let three = T::lit(3);
    let four = T::lit(4);
    let five = T::lit(5);
    let eight = T::lit(8);

    let mut a = a.mod_floor(n);
    let mut n = n.clone();
    let mut negative = false;
    while !a.is_zero() {
        while a.is_even() {
            a = a / two.clone();
            let r = n.mod_floor(&eight);
            if r == three || r == five {
                negative = !negative;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.mod_floor(&four) == three && n.mod_floor(&four) == three {
            negative = !negative;
        }
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        Ok(Symbol::from_sign(negative))
    } else {
        Ok(Symbol::Zero)
    }
}

/// `base^exp mod m`, in `[0, m)`.
///
/// Intermediate products are checked; a modulus whose square overflows `T`
/// yields a range error instead of a wrong residue.
pub fn mod_pow<T: Int>(base: &T, exp: &T, m: &T) -> Result<T> {
    if !m.is_positive() {
        return Err(Error::Domain(format!("modulus {m} must be positive")));
    }
    if exp.is_negative() {
        return Err(Error::Domain(format!("exponent {exp} must be nonnegative")));
    }
    if m.is_one() {
        return Ok(T::zero());
    }
    let overflow = || Error::Range(format!("mod_pow modulus {m}"));
    let two = T::lit(2);
    let mut result = T::one();
    let mut b = base.mod_floor(m);
    let mut e = exp.clone();
    while !e.is_zero() {
        if e.is_odd() {
            result = result.checked_mul(&b).ok_or_else(overflow)?.mod_floor(m);
        }
        e = e / two.clone();
        if !e.is_zero() {
            b = b.checked_mul(&b).ok_or_else(overflow)?.mod_floor(m);
        }
    }
    Ok(result)
}

/// Rational quartic residue symbol `(a / p)_4 = a^((p-1)/4) mod p`.
///
/// Only defined for `p ≡ 1 (mod 4)` prime, `p ∤ a` and `a` a quadratic
/// residue; everything else is a domain error.
pub fn quartic_symbol<T: Int>(a: &T, p: &T) -> Result<Symbol> {
    let pu = p
        .to_u128()
        .ok_or_else(|| Error::Domain(format!("{p} is not a positive prime")))?;
    if !is_prime(pu)? {
        return Err(Error::NotPrime(p.to_string()));
    }
    let four = T::lit(4);
    if p.mod_floor(&four) != T::one() {
        return Err(Error::Domain(format!("quartic symbol needs p ≡ 1 mod 4, got {p}")));
    }
    match jacobi(a, p)? {
        Symbol::One => {}
        Symbol::Zero => return Err(Error::Domain(format!("{p} divides {a}"))),
        Symbol::MinusOne => {
            return Err(Error::Domain(format!("{a} is not a quadratic residue mod {p}")))
        }
    }
    let r = mod_pow(a, &((p.clone() - T::one()) / four), p)?;
    if r.is_one() {
        Ok(Symbol::One)
    } else if r == p.clone() - T::one() {
        Ok(Symbol::MinusOne)
    } else {
        Err(Error::Inconsistent(format!("{a}^((p-1)/4) mod {p} = {r} is not ±1")))
    }
}

/// Upper end of the range on which [`is_prime`] is proven deterministic
/// (the first thirteen primes are a complete Miller-Rabin witness set below it).
pub const PRIMALITY_LIMIT: u128 = 3_317_044_064_679_887_385_961_981;

const WITNESSES: [u128; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

fn add_mod(x: u128, y: u128, m: u128) -> u128 {
    if x >= m - y {
        x - (m - y)
    } else {
        x + y
    }
}

fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a % m) * (b % m) % m;
    }
    let mut a = a % m;
    let mut b = b % m;
    let mut r = 0;
    while b > 0 {
        if b & 1 == 1 {
            r = add_mod(r, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    r
}

fn pow_mod(mut b: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic primality test for `n < PRIMALITY_LIMIT`.
pub fn is_prime(n: u128) -> Result<bool> {
    if n >= PRIMALITY_LIMIT {
        return Err(Error::Range(n.to_string()));
    }
    if n < 2 {
        return Ok(false);
    }
    for &w in &WITNESSES {
        if n == w {
            return Ok(true);
        }
        if n % w == 0 {
            return Ok(false);
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &w in &WITNESSES {
        let mut x = pow_mod(w, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// Convenience wrapper for signed inputs: negative numbers are never prime.
pub fn is_prime_i128(n: i128) -> Result<bool> {
    if n < 2 {
        Ok(false)
    } else {
        is_prime(n as u128)
    }
}

/// All primes `<= n`, ascending.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// Brent's variant of Pollard rho; `n` must be an odd composite.
fn pollard_brent(n: u128) -> u128 {
    let mut c = 1u128;
    loop {
        let f = |x: u128| add_mod(mul_mod(x, x, n), c, n);
        let (mut y, m) = (2u128, 128u64);
        let (mut g, mut r, mut q) = (1u128, 1u64, 1u128);
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_u128(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u128(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn factor_into(n: u128, out: &mut Vec<u128>) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    if is_prime(n)? {
        out.push(n);
        return Ok(());
    }
    let r = n.sqrt();
    if r * r == n {
        factor_into(r, out)?;
        factor_into(r, out)?;
        return Ok(());
    }
    let d = pollard_brent(n);
    factor_into(d, out)?;
    factor_into(n / d, out)
}

/// Prime factorization of `n >= 1` as ascending `(prime, exponent)` pairs.
///
/// Trial division by small primes, then Pollard-Brent on the cofactor. Sized
/// for descent coefficients, not for cryptographic integers.
pub fn factor(n: u128) -> Result<Vec<(u128, u32)>> {
    if n == 0 {
        return Err(Error::Domain("cannot factor 0".into()));
    }
    if n >= PRIMALITY_LIMIT {
        return Err(Error::Range(n.to_string()));
    }
    let mut m = n;
    let mut primes = Vec::new();
    let mut d = 2u128;
    while d < 1000 && d * d <= m {
        while m % d == 0 {
            primes.push(d);
            m /= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    factor_into(m, &mut primes)?;
    primes.sort_unstable();
    let mut out: Vec<(u128, u32)> = Vec::new();
    for q in primes {
        match out.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    Ok(out)
}

/// Distinct primes dividing `n != 0`.
pub fn prime_support(n: i128) -> Result<Vec<u128>> {
    if n == 0 {
        return Err(Error::ZeroClass);
    }
    Ok(factor(n.unsigned_abs())?.into_iter().map(|(q, _)| q).collect())
}

/// A coset of `Q*/Q*^2`, represented by its unique signed squarefree integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass(i128);

impl SquareClass {
    pub const ONE: SquareClass = SquareClass(1);

    /// Wraps a value already known to be squarefree and nonzero.
    pub fn from_squarefree(v: i128) -> Result<Self> {
        if v == 0 {
            return Err(Error::ZeroClass);
        }
        let c = squarefree_class(v)?;
        if c.0 != v {
            return Err(Error::Domain(format!("{v} is not squarefree")));
        }
        Ok(c)
    }

    pub fn value(self) -> i128 {
        self.0
    }

    /// Product in `Q*/Q*^2`; no factoring needed since both sides are squarefree.
    pub fn mul(self, other: SquareClass) -> SquareClass {
        let g = self.0.gcd(&other.0);
        SquareClass((self.0 / g) * (other.0 / g))
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `sign(n)` times the product of primes dividing `n` to an odd power.
pub fn squarefree_class(n: i128) -> Result<SquareClass> {
    if n == 0 {
        return Err(Error::ZeroClass);
    }
    let mut v: i128 = n.signum();
    for (q, e) in factor(n.unsigned_abs())? {
        if e % 2 == 1 {
            v *= q as i128;
        }
    }
    Ok(SquareClass(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn primality_examples() {
        assert!(is_prime(2).unwrap());
        assert!(is_prime(19249).unwrap());
        assert!(!is_prime(3651).unwrap());
        assert!(!is_prime(1).unwrap());
        assert!(is_prime(18446744073709551557).unwrap());
        assert!(!is_prime(3215031751).unwrap());
        assert!(matches!(is_prime(PRIMALITY_LIMIT), Err(Error::Range(_))));
    }

    #[test]
    fn primality_matches_sieve() {
        let sieve = primes_up_to(20_000);
        let tested: Vec<u64> = (0..=20_000u64).filter(|&n| is_prime(n as u128).unwrap()).collect();
        assert_eq!(sieve, tested);
    }

    #[test]
    fn sieve_examples() {
        assert_eq!(primes_up_to(10), vec![2, 3, 5, 7]);
        assert_eq!(*primes_up_to(30).last().unwrap(), 29);
        let p = primes_up_to(2000);
        assert!(p.contains(&1217) && p.contains(&1601));
        assert_eq!(p.len(), 303);
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(&72i128, &2).unwrap(), 3);
        assert_eq!(valuation(&72i128, &3).unwrap(), 2);
        assert_eq!(valuation(&(18i128 * 121), &11).unwrap(), 2);
        assert_eq!(valuation(&(18i128 * 121 * 121), &11).unwrap(), 4);
        assert_eq!(valuation(&0i128, &2), Err(Error::ZeroValuation));
        let big = BigInt::from(7).pow(40u32) * BigInt::from(3);
        assert_eq!(valuation(&big, &BigInt::from(7)).unwrap(), 40);
    }

    #[test]
    fn square_class_examples() {
        assert_eq!(squarefree_class(18).unwrap().value(), 2);
        assert_eq!(squarefree_class(-72).unwrap().value(), -2);
        assert_eq!(squarefree_class(19249 * 19249 * 6).unwrap().value(), 6);
        assert_eq!(squarefree_class(0), Err(Error::ZeroClass));
        assert!(SquareClass::from_squarefree(12).is_err());
    }

    #[test]
    fn factor_large_semiprime() {
        let p = 1_000_000_007u128;
        let q = 998_244_353u128;
        assert_eq!(factor(p * q * 4).unwrap(), vec![(2, 2), (q, 1), (p, 1)]);
        let r = 4_294_967_311u128;
        assert_eq!(factor(r * r * 3).unwrap(), vec![(3, 1), (r, 2)]);
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(jacobi(&3i64, &7).unwrap(), Symbol::MinusOne);
        assert_eq!(jacobi(&6i64, &5).unwrap(), Symbol::One);
        assert_eq!(jacobi(&1i64, &19249).unwrap(), Symbol::One);
        assert_eq!(jacobi(&6i64, &9).unwrap(), Symbol::Zero);
        assert!(jacobi(&3i64, &8).is_err());
        assert!(jacobi(&3i64, &-7).is_err());
    }

    #[test]
    fn jacobi_matches_euler_criterion() {
        for p in primes_up_to(400).into_iter().skip(1) {
            let p = p as i128;
            for a in -30i128..30 {
                let e = mod_pow(&a, &((p - 1) / 2), &p).unwrap();
                let expected = if e == 0 {
                    Symbol::Zero
                } else if e == 1 {
                    Symbol::One
                } else {
                    Symbol::MinusOne
                };
                assert_eq!(jacobi(&a, &p).unwrap(), expected, "({a}/{p})");
            }
        }
    }

    #[test]
    fn mod_pow_examples() {
        assert_eq!(mod_pow(&2i128, &4, &17).unwrap(), 16);
        let r = mod_pow(&2i128, &304, &1217).unwrap();
        assert!(r == 1 || r == 1216);
        assert_eq!(mod_pow(&12345i128, &0, &7).unwrap(), 1);
        assert_eq!(mod_pow(&-3i128, &3, &10).unwrap(), 3);
        assert!(mod_pow(&3i128, &3, &0).is_err());
    }

    #[test]
    fn quartic_examples() {
        assert_eq!(quartic_symbol(&2i128, &17).unwrap(), Symbol::MinusOne);
        assert_eq!(quartic_symbol(&2i128, &73).unwrap(), Symbol::One);
        assert_eq!(quartic_symbol(&1i128, &13).unwrap(), Symbol::One);
        assert_eq!(quartic_symbol(&2i128, &1217).unwrap(), Symbol::One);
        // 3 is a non-residue mod 17
        assert!(quartic_symbol(&3i128, &17).is_err());
        assert!(quartic_symbol(&34i128, &17).is_err());
        assert!(quartic_symbol(&2i128, &7).is_err());
        assert!(quartic_symbol(&2i128, &15).is_err());
    }
}
