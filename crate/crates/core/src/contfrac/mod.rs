//! Continued fractions of rotation numbers.
//!
//! A [`ContinuedFraction`] stores the partial quotients `a_1..a_K` together with
//! exact convergents `p_n/q_n` for `n = 0..=K`, so `q` and `p` always carry one
//! more entry than the quotient list. Orbit arithmetic never touches a single
//! float value of alpha; it goes through these convergents.

mod diophantine;
mod expand;
mod ostrowski;

pub use diophantine::{check_diophantine, construct_alpha_in_d, DiophantineReport};
pub use expand::{cf_expand, AlphaSource};
pub use ostrowski::{ostrowski_decode, ostrowski_encode, OstrowskiDigits};

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Where a rotation number came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceTag {
  ExplicitQuotients,
  QuadraticIrrational,
  DecimalLiteral,
}

/// Rule producing quotients past the stored depth.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tail {
  /// Explicit lists continue with unit quotients, which pins down a single
  /// irrational for orbit arithmetic.
  Unit,
  Quadratic(expand::QuadState),
  Constructed {
    gap: usize,
  },
  /// Decimal literals: nothing beyond the certified prefix.
  Closed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuedFraction {
  quotients: Vec<u64>,
  p: Vec<BigUint>,
  q: Vec<BigUint>,
  source: SourceTag,
  tail: Tail,
  /// Extra rational window known to contain alpha (decimal input).
  window: Option<(BigRational, BigRational)>,
}

/// An outward-rounded enclosure of `||q_n alpha||` plus the exact verdict on
/// `1/(2 q_{n+1}) < ||q_n alpha|| < 1/q_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifiedDistance {
  pub lower: f64,
  pub upper: f64,
  pub estimate: f64,
  pub within_bounds: bool,
}

impl ContinuedFraction {
  pub(crate) fn build(
    quotients: Vec<u64>,
    source: SourceTag,
    tail: Tail,
    window: Option<(BigRational, BigRational)>,
  ) -> Result<Self> {
    if quotients.contains(&0) {
      return Err(Error::InvalidInput(
        "partial quotients must be positive".into(),
      ));
    }
    let mut p = Vec::with_capacity(quotients.len() + 1);
    let mut q = Vec::with_capacity(quotients.len() + 1);
    p.push(BigUint::zero());
    q.push(BigUint::one());
    for (k, &a) in quotients.iter().enumerate() {
      let (pn, qn) = if k == 0 {
        (BigUint::one(), BigUint::from(a))
      } else {
        (&p[k] * a + &p[k - 1], &q[k] * a + &q[k - 1])
      };
      p.push(pn);
      q.push(qn);
    }
    Ok(Self {
      quotients,
      p,
      q,
      source,
      tail,
      window,
    })
  }

  /// Explicit quotient list; alpha is continued by unit quotients.
  pub fn from_quotients(a: &[u64]) -> Result<Self> {
    if a.is_empty() {
      return Err(Error::InvalidInput("empty quotient list".into()));
    }
    Self::build(a.to_vec(), SourceTag::ExplicitQuotients, Tail::Unit, None)
  }

  pub fn depth(&self) -> usize {
    self.quotients.len()
  }

  pub fn quotients(&self) -> &[u64] {
    &self.quotients
  }

  /// Partial quotient `a_j`, 1-indexed.
  pub fn a(&self, j: usize) -> Result<u64> {
    if j == 0 || j > self.depth() {
      return Err(Error::DepthExceeded {
        index: j,
        depth: self.depth(),
      });
    }
    Ok(self.quotients[j - 1])
  }

  pub fn p(&self, n: usize) -> Result<&BigUint> {
    self.p.get(n).ok_or(Error::DepthExceeded {
      index: n,
      depth: self.depth(),
    })
  }

  pub fn q(&self, n: usize) -> Result<&BigUint> {
    self.q.get(n).ok_or(Error::DepthExceeded {
      index: n,
      depth: self.depth(),
    })
  }

  pub fn p_all(&self) -> &[BigUint] {
    &self.p
  }

  pub fn q_all(&self) -> &[BigUint] {
    &self.q
  }

  /// `q_n` as a machine integer; fails past 2^63 so index arithmetic stays signed-safe.
  pub fn q_u64(&self, n: usize) -> Result<u64> {
    let q = self.q(n)?;
    q.to_u64()
      .filter(|&v| v < 1 << 63)
      .ok_or_else(|| Error::BudgetExceeded(format!("q_{n} does not fit in 63 bits")))
  }

  pub fn p_u64(&self, n: usize) -> Result<u64> {
    let p = self.p(n)?;
    p.to_u64()
      .filter(|&v| v < 1 << 63)
      .ok_or_else(|| Error::BudgetExceeded(format!("p_{n} does not fit in 63 bits")))
  }

  pub fn q_f64(&self, n: usize) -> Result<f64> {
    Ok(self.q(n)?.to_f64().unwrap_or(f64::INFINITY))
  }

  pub fn source(&self) -> SourceTag {
    self.source
  }

  pub fn is_extendable(&self) -> bool {
    self.tail != Tail::Closed
  }

  /// Largest `n` with `q_n <= limit`.
  pub fn scale_index(&self, limit: f64) -> Option<usize> {
    (0..self.q.len())
      .rev()
      .find(|&n| self.q_f64(n).map(|v| v <= limit).unwrap_or(false))
  }

  /// Smallest `n` with `q_n >= limit`.
  pub fn first_index_at_least(&self, limit: f64) -> Option<usize> {
    (0..self.q.len()).find(|&n| self.q_f64(n).map(|v| v >= limit).unwrap_or(false))
  }

  /// Same alpha carried to a larger depth using the tail rule.
  pub fn extended(&self, depth: usize) -> Result<Self> {
    if depth <= self.depth() {
      let mut out = self.clone();
      if depth < self.depth() {
        out.quotients.truncate(depth);
        out.p.truncate(depth + 1);
        out.q.truncate(depth + 1);
      }
      return Ok(out);
    }
    let mut quotients = self.quotients.clone();
    let mut tail = self.tail.clone();
    let mut qs: Vec<f64> = self
      .q
      .iter()
      .map(|v| v.to_f64().unwrap_or(f64::INFINITY))
      .collect();
    while quotients.len() < depth {
      let a = match &mut tail {
        Tail::Unit => 1,
        Tail::Quadratic(state) => state.next_quotient()?,
        Tail::Constructed { gap } => diophantine::constructed_quotient(*gap, quotients.len(), &qs),
        Tail::Closed => {
          return Err(Error::InsufficientPrecision(format!(
            "decimal input certifies only {} quotients",
            self.depth()
          )))
        }
      };
      quotients.push(a);
      let n = qs.len();
      let next = a as f64 * qs[n - 1] + if n >= 2 { qs[n - 2] } else { 0.0 };
      qs.push(next);
    }
    Self::build(quotients, self.source, tail, self.window.clone())
  }

  /// Rational interval known to contain alpha: the cylinder of all numbers
  /// sharing the stored quotients, intersected with the decimal window if any.
  pub fn enclosure(&self) -> (BigRational, BigRational) {
    let k = self.depth();
    let to_r =
      |n: &BigUint, d: &BigUint| BigRational::new(BigInt::from(n.clone()), BigInt::from(d.clone()));
    let a = to_r(&self.p[k], &self.q[k]);
    let b = to_r(
      &(&self.p[k] + &self.p[k - 1]),
      &(&self.q[k] + &self.q[k - 1]),
    );
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    if let Some((wl, wh)) = &self.window {
      if *wl > lo {
        lo = wl.clone();
      }
      if *wh < hi {
        hi = wh.clone();
      }
    }
    (lo, hi)
  }

  /// Certified `||q_n alpha||`. Requires `n + 1 < depth` so that the bound
  /// involves only stored quotients.
  pub fn dist_qn_alpha(&self, n: usize) -> Result<CertifiedDistance> {
    if n + 1 >= self.depth() {
      return Err(Error::DepthExceeded {
        index: n,
        depth: self.depth(),
      });
    }
    let (lo, hi) = self.enclosure();
    let qn = BigRational::from_integer(BigInt::from(self.q[n].clone()));
    let pn = BigRational::from_integer(BigInt::from(self.p[n].clone()));
    let v_lo = &qn * &lo - &pn;
    let v_hi = &qn * &hi - &pn;
    let (d_lo, d_hi) = norm_of_interval(&v_lo, &v_hi)?;
    let q1 = BigRational::from_integer(BigInt::from(self.q[n + 1].clone()));
    let upper_bound = q1.recip();
    let lower_bound = (BigRational::from_integer(BigInt::from(2)) * &q1).recip();
    let within_bounds = d_lo > lower_bound && d_hi < upper_bound;
    let lower = d_lo.to_f64().unwrap_or(0.0).next_down();
    let upper = d_hi.to_f64().unwrap_or(f64::INFINITY).next_up();
    let estimate = ((&d_lo + &d_hi) / BigRational::from_integer(BigInt::from(2)))
      .to_f64()
      .unwrap_or(f64::NAN);
    Ok(CertifiedDistance {
      lower,
      upper,
      estimate,
      within_bounds,
    })
  }
}

/// Range of `||v||` for `v` in `[a, b]`, provided the interval does not
/// straddle an integer or a half-integer.
fn norm_of_interval(a: &BigRational, b: &BigRational) -> Result<(BigRational, BigRational)> {
  let half = BigRational::new(BigInt::one(), BigInt::from(2));
  let (a, b) = if a <= b { (a, b) } else { (b, a) };
  let m = (a + &half).floor();
  let da = a - &m;
  let db = b - &m;
  let same_side = (da.is_negative() && db.is_negative()) || (!da.is_negative() && db.is_positive());
  if !same_side || da.abs() >= half || db.abs() >= half {
    return Err(Error::InsufficientPrecision(
      "enclosure straddles a break point".into(),
    ));
  }
  let (x, y) = (da.abs(), db.abs());
  Ok(if x <= y { (x, y) } else { (y, x) })
}
