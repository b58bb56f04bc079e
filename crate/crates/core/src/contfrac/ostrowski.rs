//! Ostrowski numeration `N = sum_j b_j q_j`.
//!
//! Digit `b_j` multiplies `q_j`. Admissible digits satisfy `b_0 <= a_1 - 1`,
//! `b_j <= a_{j+1}`, and a maximal digit `b_j = a_{j+1}` forces `b_{j-1} = 0`.
//! Greedy encoding produces exactly these digits.

use super::ContinuedFraction;
use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OstrowskiDigits {
  /// `digits[j]` is the coefficient of `q_j`; no trailing zeros.
  pub digits: Vec<u64>,
}

impl OstrowskiDigits {
  /// Nonzero digits as `(j, b_j)` pairs, highest first.
  pub fn terms(&self) -> Vec<(usize, u64)> {
    self
      .digits
      .iter()
      .enumerate()
      .rev()
      .filter(|(_, &b)| b > 0)
      .map(|(j, &b)| (j, b))
      .collect()
  }
}

pub fn ostrowski_encode(n: u64, cf: &ContinuedFraction) -> Result<OstrowskiDigits> {
  if n == 0 {
    return Err(Error::NotRepresentable(
      "0 has no highest nonzero digit".into(),
    ));
  }
  let k = cf.depth();
  let top = cf.q_u64(k).unwrap_or(u64::MAX);
  if n >= top {
    return Err(Error::NotRepresentable(format!("{n} >= q_{k} = {top}")));
  }
  let mut rest = n;
  let mut digits = vec![0u64; k];
  for j in (0..k).rev() {
    let qj = cf.q_u64(j)?;
    digits[j] = rest / qj;
    rest %= qj;
  }
  while digits.last() == Some(&0) {
    digits.pop();
  }
  Ok(OstrowskiDigits { digits })
}

pub fn ostrowski_decode(d: &OstrowskiDigits, cf: &ContinuedFraction) -> Result<u64> {
  let digits = &d.digits;
  if digits.iter().all(|&b| b == 0) {
    return Err(Error::InvalidDigits("no nonzero digit".into()));
  }
  if digits.len() > cf.depth() {
    return Err(Error::InvalidDigits(format!(
      "{} digits exceed depth {}",
      digits.len(),
      cf.depth()
    )));
  }
  let mut total: u64 = 0;
  for (j, &b) in digits.iter().enumerate() {
    let cap = if j == 0 { cf.a(1)? - 1 } else { cf.a(j + 1)? };
    if b > cap {
      return Err(Error::InvalidDigits(format!("b_{j} = {b} exceeds {cap}")));
    }
    if j > 0 && b == cap && digits[j - 1] != 0 {
      return Err(Error::InvalidDigits(format!(
        "b_{j} is maximal but b_{} != 0",
        j - 1
      )));
    }
    let term = cf
      .q_u64(j)?
      .checked_mul(b)
      .ok_or_else(|| Error::InvalidDigits("overflow".into()))?;
    total = total
      .checked_add(term)
      .ok_or_else(|| Error::InvalidDigits("overflow".into()))?;
  }
  Ok(total)
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::contfrac::{cf_expand, AlphaSource};
  use proptest::prelude::*;

  fn golden() -> ContinuedFraction {
    ContinuedFraction::from_quotients(&[1; 30]).unwrap()
  }

  #[test]
  fn ten_in_fibonacci_base() {
    let d = ostrowski_encode(10, &golden()).unwrap();
    assert_eq!(d.terms(), vec![(5, 1), (2, 1)]);
    assert_eq!(ostrowski_decode(&d, &golden()).unwrap(), 10);
  }

  #[test]
  fn single_denominator() {
    let cf = cf_expand(
      &AlphaSource::Quadratic {
        a: 0,
        b: 1,
        d: 13,
        c: 1,
      },
      20,
    )
    .unwrap();
    for m in 1..15 {
      let qm = cf.q_u64(m).unwrap();
      if qm == cf.q_u64(m - 1).unwrap() {
        continue;
      }
      let d = ostrowski_encode(qm, &cf).unwrap();
      assert_eq!(d.terms(), vec![(m, 1)], "q_{m}");
    }
  }

  #[test]
  fn invalid_digit_patterns() {
    let cf = golden();
    assert!(matches!(
      ostrowski_decode(
        &OstrowskiDigits {
          digits: vec![0, 0, 0]
        },
        &cf
      ),
      Err(Error::InvalidDigits(_))
    ));
    // b_1 = a_1 together with b_2 = 1
    assert!(matches!(
      ostrowski_decode(
        &OstrowskiDigits {
          digits: vec![0, 1, 1]
        },
        &cf
      ),
      Err(Error::InvalidDigits(_))
    ));
    // q_0 = q_1 when a_1 = 1, so b_0 must vanish
    assert!(ostrowski_decode(&OstrowskiDigits { digits: vec![1] }, &cf).is_err());
  }

  #[test]
  fn not_representable_past_depth() {
    let cf = ContinuedFraction::from_quotients(&[1; 10]).unwrap();
    assert!(ostrowski_encode(88, &cf).is_ok());
    assert!(matches!(
      ostrowski_encode(89, &cf),
      Err(Error::NotRepresentable(_))
    ));
  }

  proptest! {
    #[test]
    fn encode_decode_inverse(quotients in prop::collection::vec(1u64..6, 12..20), n in 1u64..5000) {
      let cf = ContinuedFraction::from_quotients(&quotients).unwrap();
      prop_assume!(n < cf.q_u64(cf.depth()).unwrap());
      let d = ostrowski_encode(n, &cf).unwrap();
      prop_assert_eq!(ostrowski_decode(&d, &cf).unwrap(), n);
    }

    #[test]
    fn decode_encode_inverse(quotients in prop::collection::vec(1u64..5, 8..12), seed in prop::collection::vec(0u64..6, 1..8)) {
      let cf = ContinuedFraction::from_quotients(&quotients).unwrap();
      let mut digits: Vec<u64> = seed.iter().enumerate().map(|(j, &b)| {
        let cap = if j == 0 { quotients[0] - 1 } else { quotients[j] };
        b.min(cap)
      }).collect();
      for j in 1..digits.len() {
        if digits[j] == quotients[j] { digits[j - 1] = 0; }
      }
      while digits.last() == Some(&0) { digits.pop(); }
      prop_assume!(!digits.is_empty());
      let d = OstrowskiDigits { digits };
      let n = ostrowski_decode(&d, &cf).unwrap();
      prop_assert_eq!(ostrowski_encode(n, &cf).unwrap(), d);
    }
  }
}
