//! Points of the circle `R/Z` in 128-bit fixed point, and the rotation by alpha.
//!
//! A point is stored as an integer `v` standing for `v / 2^128`, so addition
//! is exact wrapping arithmetic and orbit points `x + j alpha` carry only the
//! error of the fixed-point alpha, about `j * 2^-128`.

use crate::contfrac::ContinuedFraction;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::ops::{Add, Neg, Sub};

pub(crate) const TWO_128: f64 = 340282366920938463463374607431768211456.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CirclePoint(u128);

impl CirclePoint {
  pub const ZERO: CirclePoint = CirclePoint(0);

  pub const fn from_raw(raw: u128) -> Self {
    CirclePoint(raw)
  }

  pub const fn raw(self) -> u128 {
    self.0
  }

  /// Reduces `x` mod 1; exact for every finite double.
  pub fn from_f64(x: f64) -> Self {
    let frac = x - x.floor();
    let scaled = frac * TWO_128;
    if scaled >= TWO_128 {
      CirclePoint(0)
    } else {
      CirclePoint(scaled as u128)
    }
  }

  /// `num / den` mod 1, rounded down to the fixed-point grid.
  pub fn from_ratio(num: i128, den: u128) -> Self {
    assert!(den > 0, "zero denominator");
    let r = BigRational::new(BigInt::from(num), BigInt::from(den));
    Self::from_rational(&r)
  }

  pub fn from_rational(r: &BigRational) -> Self {
    let frac = r - r.floor();
    let scaled = (frac * BigRational::from_integer(BigInt::one() << 128))
      .floor()
      .to_integer();
    CirclePoint(scaled.to_u128().unwrap_or(0))
  }

  /// Representative in `[0, 1)`.
  pub fn to_f64(self) -> f64 {
    self.0 as f64 / TWO_128
  }

  /// `1 - x` in `(0, 1]`, computed without cancellation.
  pub fn complement_f64(self) -> f64 {
    if self.0 == 0 {
      1.0
    } else {
      self.0.wrapping_neg() as f64 / TWO_128
    }
  }

  /// Representative in `[-1/2, 1/2)`.
  pub fn signed_f64(self) -> f64 {
    (self.0 as i128) as f64 / TWO_128
  }

  /// `||x||` in raw units.
  pub fn norm_raw(self) -> u128 {
    self.0.min(self.0.wrapping_neg())
  }

  /// `||x|| = min({x}, 1 - {x})`.
  pub fn norm(self) -> f64 {
    self.norm_raw() as f64 / TWO_128
  }
}

impl Add for CirclePoint {
  type Output = CirclePoint;
  fn add(self, o: CirclePoint) -> CirclePoint {
    CirclePoint(self.0.wrapping_add(o.0))
  }
}

impl Sub for CirclePoint {
  type Output = CirclePoint;
  fn sub(self, o: CirclePoint) -> CirclePoint {
    CirclePoint(self.0.wrapping_sub(o.0))
  }
}

impl Neg for CirclePoint {
  type Output = CirclePoint;
  fn neg(self) -> CirclePoint {
    CirclePoint(self.0.wrapping_neg())
  }
}

impl Serialize for CirclePoint {
  fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(self.to_f64())
  }
}

impl<'de> Deserialize<'de> for CirclePoint {
  fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
    f64::deserialize(d).map(CirclePoint::from_f64)
  }
}

/// Distance to the nearest integer.
pub fn dist_to_int(x: CirclePoint) -> f64 {
  x.norm()
}

/// `floor(2^128 / q)` and the remainder.
pub(crate) fn pow2_128_divmod(q: u128) -> (u128, u128) {
  assert!(q >= 2, "quotient 2^128 does not fit");
  let t = u128::MAX / q;
  let r = u128::MAX % q;
  if r + 1 == q {
    (t + 1, 0)
  } else {
    (t, r + 1)
  }
}

/// Accumulated fixed-point error allowed on any orbit point.
pub const ORBIT_ERROR_LIMIT: f64 = 1e-20;

/// Depth used for the fixed-point alpha: convergent denominators past 2^70.
const PRECISION_Q: f64 = 1.2e21;

/// Rotation by alpha with a fixed-point alpha accurate to about `2^-128`.
#[derive(Debug, Clone)]
pub struct Rotation {
  cf: ContinuedFraction,
  user_depth: usize,
  alpha: CirclePoint,
  step_error: f64,
}

impl Rotation {
  pub fn new(cf: &ContinuedFraction) -> Result<Self> {
    let user_depth = cf.depth();
    if cf.is_extendable() {
      let mut deep = cf.clone();
      while deep.q_f64(deep.depth())? < PRECISION_Q {
        deep = deep.extended(deep.depth() + 8)?;
      }
      let (lo, hi) = deep.enclosure();
      let mid = (lo + hi) / BigRational::from_integer(BigInt::from(2));
      let alpha = round_to_grid(&mid);
      Ok(Self {
        cf: deep,
        user_depth,
        alpha,
        step_error: 2.0 / TWO_128,
      })
    } else {
      let (lo, hi) = cf.enclosure();
      let width = (&hi - &lo).to_f64().unwrap_or(f64::INFINITY);
      let mid = (lo + hi) / BigRational::from_integer(BigInt::from(2));
      Ok(Self {
        cf: cf.clone(),
        user_depth,
        alpha: round_to_grid(&mid),
        step_error: width / 2.0 + 1.0 / TWO_128,
      })
    }
  }

  /// Continued fraction, possibly extended beyond the depth supplied.
  pub fn cf(&self) -> &ContinuedFraction {
    &self.cf
  }

  pub fn user_depth(&self) -> usize {
    self.user_depth
  }

  pub fn alpha(&self) -> CirclePoint {
    self.alpha
  }

  pub fn step_error(&self) -> f64 {
    self.step_error
  }

  /// `x + j alpha`.
  pub fn point(&self, x: CirclePoint, j: i64) -> CirclePoint {
    let shift = self.alpha.0.wrapping_mul(j.unsigned_abs() as u128);
    if j >= 0 {
      CirclePoint(x.0.wrapping_add(shift))
    } else {
      CirclePoint(x.0.wrapping_sub(shift))
    }
  }

  /// Fails when `len` rotation steps could drift by more than the orbit error limit.
  pub fn check_range(&self, len: u64) -> Result<()> {
    if len as f64 * self.step_error > ORBIT_ERROR_LIMIT {
      return Err(Error::InsufficientPrecision(format!(
        "{len} steps exceed the precision of alpha (step error {:e})",
        self.step_error
      )));
    }
    Ok(())
  }

  pub fn q(&self, n: usize) -> Result<u64> {
    self.cf.q_u64(n)
  }

  pub fn p(&self, n: usize) -> Result<u64> {
    self.cf.p_u64(n)
  }

  pub fn q_f64(&self, n: usize) -> Result<f64> {
    self.cf.q_f64(n)
  }
}

fn round_to_grid(r: &BigRational) -> CirclePoint {
  let half = BigRational::new(BigInt::one(), BigInt::from(2));
  let scaled = (r * BigRational::from_integer(BigInt::one() << 128) + half)
    .floor()
    .to_integer();
  CirclePoint(scaled.to_u128().unwrap_or(0))
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn distance_examples() {
    assert_eq!(dist_to_int(CirclePoint::from_f64(0.25)), 0.25);
    assert!((dist_to_int(CirclePoint::from_f64(0.9)) - 0.1).abs() < 1e-16);
    assert_eq!(dist_to_int(CirclePoint::ZERO), 0.0);
    assert_eq!(dist_to_int(CirclePoint::from_f64(-0.25)), 0.25);
  }

  #[test]
  fn complement_is_accurate_near_one() {
    let x = CirclePoint::from_f64(1.0) - CirclePoint::from_raw(1 << 40);
    assert_eq!(x.complement_f64(), (1u128 << 40) as f64 / TWO_128);
  }

  #[test]
  fn fixed_point_golden_alpha() {
    let cf = ContinuedFraction::from_quotients(&[1; 10]).unwrap();
    let rot = Rotation::new(&cf).unwrap();
    let alpha = (5f64.sqrt() - 1.0) / 2.0;
    assert!((rot.alpha().to_f64() - alpha).abs() < 1e-16);
    assert!(rot.cf().depth() > 10);
    assert_eq!(rot.user_depth(), 10);
    // F_n alpha is within 1/F_{n+1} of an integer
    let x = rot.point(CirclePoint::ZERO, 832040);
    assert!(x.norm() < 1.0 / 1346269.0);
    assert!(x.norm() > 0.5 / 1346269.0);
  }

  #[test]
  fn negative_steps_invert_positive_steps() {
    let cf = ContinuedFraction::from_quotients(&[2; 10]).unwrap();
    let rot = Rotation::new(&cf).unwrap();
    let x = CirclePoint::from_f64(0.3);
    assert_eq!(rot.point(rot.point(x, 12345), -12345), x);
  }

  #[test]
  fn pow2_division() {
    for q in [2u128, 3, 7, 1 << 20, 1_000_003] {
      let (t, r) = pow2_128_divmod(q);
      assert!(r < q);
      // t * q + r == 2^128, checked mod 2^128
      assert_eq!(t.wrapping_mul(q).wrapping_add(r), 0);
    }
  }
}
