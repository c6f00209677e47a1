//! 2-descent via 2-isogeny for elliptic curves `y^2 = x^3 + a x^2 + b x`.
//!
//! The [`arith`] and [`local`] layers are self-contained number theory; the
//! [`descent`] module builds Selmer groups and rank bounds on top of them,
//! and [`family`] specializes everything to `E_p: y^2 = x^3 + 18 p^2 x`.

pub mod arith;
pub mod descent;
pub mod error;
pub mod family;
pub mod local;

pub use error::{Error, Result};

/// Exact rationals used for all curve and homogeneous-space coordinates.
pub type Rational = num_rational::BigRational;
/// A rational point on a curve, arbitrary precision.
pub type Point = descent::CurvePoint<num_bigint::BigInt>;
/// A point with `i128` coordinates, for small-height work.
pub type SmallPoint = descent::CurvePoint<i128>;
