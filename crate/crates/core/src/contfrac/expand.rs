//! Expansion of quadratic irrationals and decimal literals.

use super::{ContinuedFraction, SourceTag, Tail};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

/// Input forms accepted by [`cf_expand`].
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSource {
  Quotients(Vec<u64>),
  /// `(a + b sqrt d) / c`; only its fractional part is expanded.
  Quadratic {
    a: i64,
    b: i64,
    d: u64,
    c: i64,
  },
  Decimal(String),
}

impl FromStr for AlphaSource {
  type Err = Error;

  /// `quad:a,b,d,c`, a comma-separated quotient list (brackets optional),
  /// or a decimal literal containing a point.
  fn from_str(s: &str) -> Result<Self> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("quad:") {
      let v: Vec<i64> = rest
        .split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidInput(format!("quadratic spec: {e}")))?;
      if v.len() != 4 || v[2] < 0 {
        return Err(Error::InvalidInput(
          "expected quad:a,b,d,c with d >= 0".into(),
        ));
      }
      return Ok(AlphaSource::Quadratic {
        a: v[0],
        b: v[1],
        d: v[2] as u64,
        c: v[3],
      });
    }
    if s.contains('.') {
      return Ok(AlphaSource::Decimal(s.to_string()));
    }
    let body = s.trim_start_matches('[').trim_end_matches(']');
    let v: Vec<u64> = body
      .split(',')
      .map(|t| t.trim().parse::<u64>())
      .collect::<std::result::Result<_, _>>()
      .map_err(|e| Error::InvalidInput(format!("quotient list: {e}")))?;
    Ok(AlphaSource::Quotients(v))
  }
}

/// Expand `source` to `depth` partial quotients.
///
/// Explicit lists shorter than `depth` are continued with unit quotients.
pub fn cf_expand(source: &AlphaSource, depth: usize) -> Result<ContinuedFraction> {
  if depth < 2 {
    return Err(Error::InvalidInput("depth must be at least 2".into()));
  }
  match source {
    AlphaSource::Quotients(a) => ContinuedFraction::from_quotients(a)?.extended(depth),
    AlphaSource::Quadratic { a, b, d, c } => {
      let mut state = QuadState::new(*a, *b, *d, *c)?;
      state.next_quotient_raw()?; // integer part
      let mut quotients = Vec::with_capacity(depth);
      for _ in 0..depth {
        quotients.push(state.next_quotient()?);
      }
      ContinuedFraction::build(
        quotients,
        SourceTag::QuadraticIrrational,
        Tail::Quadratic(state),
        None,
      )
    }
    AlphaSource::Decimal(text) => expand_decimal(text, depth),
  }
}

/// State `(P + sqrt D) / Q` of the integer expansion algorithm, with
/// `Q | D - P^2` maintained.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct QuadState {
  p: i128,
  q: i128,
  d: i128,
  s: i128,
}

impl QuadState {
  fn new(a: i64, b: i64, d: u64, c: i64) -> Result<Self> {
    if b == 0 || c == 0 {
      return Err(Error::RationalInput(0));
    }
    let bound = 1i64 << 20;
    if [a, b, c].iter().any(|v| v.abs() > bound) || d > bound as u64 {
      return Err(Error::InvalidInput(
        "quadratic coefficients must be at most 2^20".into(),
      ));
    }
    let dd = (b as i128) * (b as i128) * (d as i128);
    let s = dd.sqrt();
    if s * s == dd {
      return Err(Error::RationalInput(0));
    }
    let (mut p, mut q, mut dd) = if b > 0 {
      (a as i128, c as i128, dd)
    } else {
      (-(a as i128), -(c as i128), dd)
    };
    if (dd - p * p) % q != 0 {
      let m = q.abs();
      p *= m;
      dd *= m * m;
      q *= m;
    }
    Ok(Self {
      p,
      q,
      d: dd,
      s: dd.sqrt(),
    })
  }

  fn next_quotient_raw(&mut self) -> Result<i128> {
    let num = if self.q > 0 {
      self.p + self.s
    } else {
      self.p + self.s + 1
    };
    let a = Integer::div_floor(&num, &self.q);
    let p_next = a * self.q - self.p;
    let rem = self.d - p_next * p_next;
    if rem % self.q != 0 {
      return Err(Error::InvalidInput(
        "quadratic state lost divisibility".into(),
      ));
    }
    self.q = rem / self.q;
    self.p = p_next;
    Ok(a)
  }

  pub(crate) fn next_quotient(&mut self) -> Result<u64> {
    let a = self.next_quotient_raw()?;
    u64::try_from(a)
      .ok()
      .filter(|&v| v > 0)
      .ok_or_else(|| Error::InvalidInput(format!("quadratic expansion produced quotient {a}")))
  }
}

fn parse_decimal(text: &str) -> Result<(BigInt, u32)> {
  let t = text.trim();
  let (int_part, frac_part) = t
    .split_once('.')
    .ok_or_else(|| Error::InvalidInput(format!("not a decimal literal: {t}")))?;
  if t.starts_with('-') || t.starts_with('+') {
    return Err(Error::InvalidInput(
      "decimal literal must be unsigned".into(),
    ));
  }
  let digits = format!("{int_part}{frac_part}");
  if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
    return Err(Error::InvalidInput(format!("not a decimal literal: {t}")));
  }
  let n = BigInt::from_str(&digits).map_err(|e| Error::InvalidInput(e.to_string()))?;
  Ok((n, frac_part.len() as u32))
}

/// Number of quotients in the terminating expansion of a rational in [0, 1).
fn exact_length(mut x: BigRational) -> usize {
  let mut len = 0;
  while !x.is_zero() {
    let y = x.recip();
    x = &y - y.floor();
    len += 1;
  }
  len
}

/// A k-digit literal stands for every number within half a unit of its last
/// digit. A quotient is emitted only when both ends of that interval agree.
fn expand_decimal(text: &str, depth: usize) -> Result<ContinuedFraction> {
  let (n, k) = parse_decimal(text)?;
  let scale = BigInt::from(10u32).pow(k);
  let center = BigRational::new(n, scale.clone());
  let half_ulp = BigRational::new(BigInt::one(), scale * 2);
  let int = center.floor();
  let center = &center - &int;
  let (mut lo, mut hi) = (&center - &half_ulp, &center + &half_ulp);
  let window = (lo.clone(), hi.clone());
  let mut quotients = Vec::with_capacity(depth);
  while quotients.len() < depth {
    if !lo.is_positive() || hi >= BigRational::one() {
      break;
    }
    let (ylo, yhi) = (hi.recip(), lo.recip());
    let a = ylo.floor();
    if a != yhi.floor() || ylo == a {
      break;
    }
    quotients.push(a.to_integer().to_u64().ok_or_else(|| {
      Error::InvalidInput("decimal expansion produced an oversized quotient".into())
    })?);
    lo = &ylo - &a;
    hi = &yhi - &a;
  }
  if quotients.len() < depth {
    let exact = exact_length(center);
    if exact <= quotients.len() + 1 {
      return Err(Error::RationalInput(exact));
    }
    return Err(Error::InsufficientPrecision(format!(
      "{} digits certify {} quotients, {} requested",
      k,
      quotients.len(),
      depth
    )));
  }
  ContinuedFraction::build(
    quotients,
    SourceTag::DecimalLiteral,
    Tail::Closed,
    Some(window),
  )
}
