//! Exhaustive residue search used to cross-check the recursion engine.
//!
//! Works level by level over `z mod l^k`: a residue class is dropped when
//! `F(z) mod l^k` is not a square modulo `l^k`, and a point is reported only
//! when a Hensel lift in `w` or in `z` is certified from an explicit
//! approximate solution `(z0, w0)`.

use super::QuarticForm;
use crate::arith::valuation;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleVerdict {
    Solvable,
    Unsolvable,
    Unknown,
}

/// Square roots modulo `l^k` for `k = 0..=depth`, by exhaustive squaring.
pub struct SquareTables {
    l: i128,
    roots: Vec<Vec<Option<u32>>>,
}

impl SquareTables {
    pub fn new(l: i128, depth: u32) -> Result<Self> {
        let too_big = || Error::Range(format!("{l}^{depth} residue table"));
        let top = l.checked_pow(depth).ok_or_else(too_big)?;
        if top > 1 << 24 {
            return Err(too_big());
        }
        let mut roots = Vec::with_capacity(depth as usize + 1);
        for k in 0..=depth {
            let m = l.pow(k);
            let mut t = vec![None; m as usize];
            for w in 0..m {
                let r = (w * w % m) as usize;
                if t[r].is_none() {
                    t[r] = Some(w as u32);
                }
            }
            roots.push(t);
        }
        Ok(SquareTables { l, roots })
    }

    pub fn depth(&self) -> u32 {
        self.roots.len() as u32 - 1
    }

    fn root(&self, k: u32, r: i128) -> Option<i128> {
        self.roots[k as usize][r as usize].map(i128::from)
    }
}

enum Search {
    Found,
    Empty,
    Unknown,
}

fn value(q: &QuarticForm, z: i128) -> Option<i128> {
    let z2 = z.checked_mul(z)?;
    q.d1()
        .checked_add(q.c().checked_mul(z2)?)?
        .checked_add(q.d2().checked_mul(z2.checked_mul(z2)?)?)
}

fn derivative(q: &QuarticForm, z: i128) -> Option<i128> {
    let z3 = z.checked_mul(z)?.checked_mul(z)?;
    (2 * q.c())
        .checked_mul(z)?
        .checked_add(q.d2().checked_mul(4)?.checked_mul(z3)?)
}

// v(a) > 2 v(b), treating v(0) as infinite.
fn hensel_ok(a: i128, b: i128, l: i128) -> bool {
    if a == 0 {
        return true;
    }
    if b == 0 {
        return false;
    }
    valuation(&a, &l).unwrap() > 2 * valuation(&b, &l).unwrap()
}

fn search(q: &QuarticForm, tables: &SquareTables) -> Search {
    let l = tables.l;
    let mut active: Vec<i128> = vec![0];
    let mut modulus: i128 = 1;
    for k in 1..=tables.depth() {
        let next_modulus = modulus * l;
        let mut next = Vec::new();
        for &base in &active {
            for t in 0..l {
                let z0 = base + t * modulus;
                let Some(fz) = value(q, z0) else {
                    return Search::Unknown;
                };
                let Some(w0) = tables.root(k, fz.rem_euclid(next_modulus)) else {
                    continue;
                };
                let Some(g) = w0.checked_mul(w0).and_then(|s| s.checked_sub(fz)) else {
                    return Search::Unknown;
                };
                let Some(dfz) = derivative(q, z0) else {
                    return Search::Unknown;
                };
                if hensel_ok(g, 2 * w0, l) || hensel_ok(g, dfz, l) {
                    return Search::Found;
                }
                next.push(z0);
            }
        }
        if next.is_empty() {
            return Search::Empty;
        }
        active = next;
        modulus = next_modulus;
    }
    Search::Unknown
}

/// Tri-state local solvability at `l` using prebuilt residue tables.
pub fn brute_oracle_with(q: &QuarticForm, tables: &SquareTables) -> OracleVerdict {
    let direct = search(q, tables);
    if matches!(direct, Search::Found) {
        return OracleVerdict::Solvable;
    }
    let recip = search(&q.reciprocal(), tables);
    match (direct, recip) {
        (_, Search::Found) => OracleVerdict::Solvable,
        (Search::Empty, Search::Empty) => OracleVerdict::Unsolvable,
        _ => OracleVerdict::Unknown,
    }
}

/// Tri-state local solvability at `l`, searching residues modulo `l^k` for
/// `k <= depth`.
pub fn brute_oracle(q: &QuarticForm, l: i128, depth: u32) -> Result<OracleVerdict> {
    crate::local::Place::prime(l)?;
    if depth == 0 {
        return Err(Error::Domain("oracle depth must be positive".into()));
    }
    let tables = SquareTables::new(l, depth)?;
    Ok(brute_oracle_with(q, &tables))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(d1: i128, c: i128, d2: i128) -> QuarticForm {
        QuarticForm::new(d1, c, d2).unwrap()
    }

    #[test]
    fn square_tables_are_exact() {
        let t = SquareTables::new(2, 4).unwrap();
        let squares: Vec<i128> = (0..16).filter(|&r| t.root(4, r).is_some()).collect();
        assert_eq!(squares, vec![0, 1, 4, 9]);
        for r in 0..16 {
            if let Some(w) = t.root(4, r) {
                assert_eq!(w * w % 16, r);
            }
        }
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(brute_oracle(&form(3, 0, 294), 2, 6).unwrap(), OracleVerdict::Solvable);
        assert_eq!(brute_oracle(&form(7, 0, 126), 2, 8).unwrap(), OracleVerdict::Unsolvable);
        // z = 0: -1 ≡ 2^2 mod 5 and v_5(2^2 + 1) = 1 > 2 v_5(2·2) = 0
        assert_eq!(brute_oracle(&form(-1, 0, -18), 5, 6).unwrap(), OracleVerdict::Solvable);
    }

    #[test]
    fn oracle_reports_unknown_when_too_shallow() {
        // w^2 = 2^7 + z^4·3 needs more than one 2-adic digit to decide
        let v = brute_oracle(&form(128, 0, 3), 2, 1).unwrap();
        assert_eq!(v, OracleVerdict::Unknown);
    }

    #[test]
    fn oracle_rejects_bad_input() {
        assert!(brute_oracle(&form(1, 0, 3), 4, 3).is_err());
        assert!(brute_oracle(&form(1, 0, 3), 3, 0).is_err());
        assert!(brute_oracle(&form(1, 0, 3), 3, 40).is_err());
    }
}
