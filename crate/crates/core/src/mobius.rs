//! The Möbius function and statistics pairing it with sequences sampled
//! along a special flow.

use crate::circle::{CirclePoint, Rotation};
use crate::error::{Error, Result};
use crate::roof::Roof;
use crate::specialflow::{evolve, FlowPoint};
use crate::summation::CompensatedSum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest sieve limit.
pub const SIEVE_LIMIT: u64 = 100_000_000;

/// `mu(0..=n)`, with `mu(0) = 0` as a placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MobiusTable {
  values: Vec<i8>,
}

impl MobiusTable {
  pub fn limit(&self) -> u64 {
    (self.values.len() - 1) as u64
  }

  pub fn mu(&self, n: u64) -> i8 {
    self.values[n as usize]
  }

  pub fn values(&self) -> &[i8] {
    &self.values
  }

  /// `sum_{k <= n} mu(k)`.
  pub fn mertens(&self, n: u64) -> i64 {
    self.values[1..=n as usize].iter().map(|&m| m as i64).sum()
  }
}

/// Linear sieve of `mu` up to `n`.
pub fn mobius_sieve(n: u64) -> Result<MobiusTable> {
  if n > SIEVE_LIMIT {
    return Err(Error::BudgetExceeded(format!(
      "sieve limit {n} exceeds {SIEVE_LIMIT}"
    )));
  }
  let n = n as usize;
  let mut mu = vec![0i8; n + 1];
  let mut composite = vec![false; n + 1];
  let mut primes: Vec<u32> = Vec::new();
  if n >= 1 {
    mu[1] = 1;
  }
  for i in 2..=n {
    if !composite[i] {
      primes.push(i as u32);
      mu[i] = -1;
    }
    for &p in &primes {
      let m = i * p as usize;
      if m > n {
        break;
      }
      composite[m] = true;
      if i % p as usize == 0 {
        mu[m] = 0;
        break;
      }
      mu[m] = -mu[i];
    }
  }
  Ok(MobiusTable { values: mu })
}

pub fn mertens(n: u64) -> Result<i64> {
  Ok(mobius_sieve(n)?.mertens(n))
}

pub fn is_prime(n: u64) -> bool {
  if n < 2 {
    return false;
  }
  let mut d = 2;
  while d * d <= n {
    if n % d == 0 {
      return false;
    }
    d += 1;
  }
  true
}

/// `(1/N) sum_{n=1..N} a_{pn} conj(a_{qn})` for distinct primes `p`, `q`.
pub fn kbsz_sum(seq: &[Complex64], p: u64, q: u64, n: u64) -> Result<Complex64> {
  if p == q || !is_prime(p) || !is_prime(q) || n == 0 {
    return Err(Error::InvalidInput(format!(
      "need distinct primes and N > 0, got {p}, {q}, {n}"
    )));
  }
  let need = (p.max(q) * n + 1) as usize;
  if seq.len() < need {
    return Err(Error::SequenceTooShort {
      needed: need,
      have: seq.len(),
    });
  }
  let mut re = CompensatedSum::new();
  let mut im = CompensatedSum::new();
  for k in 1..=n {
    let z = seq[(p * k) as usize] * seq[(q * k) as usize].conj();
    re.add(z.re);
    im.add(z.im);
  }
  Ok(Complex64::new(re.value(), im.value()) / n as f64)
}

/// Step functions of a point under the graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Observable {
  Constant {
    value: f64,
  },
  /// Indicator of `z in [a, b)`, minus its mean when `centered`.
  BaseInterval {
    a: f64,
    b: f64,
    centered: bool,
  },
  /// Indicator of `r in [lo, hi)`.
  HeightBand {
    lo: f64,
    hi: f64,
  },
}

impl Observable {
  pub fn eval(&self, p: &FlowPoint, offset: f64) -> f64 {
    let raw = match *self {
      Observable::Constant { value } => value,
      Observable::BaseInterval { a, b, .. } => {
        let z = p.z.to_f64();
        f64::from(u8::from(z >= a && z < b))
      }
      Observable::HeightBand { lo, hi } => f64::from(u8::from(p.r >= lo && p.r < hi)),
    };
    raw - offset
  }

  /// Mean under the invariant measure, `int_a^b f / int f` for a base interval.
  pub fn mean(&self, roof: &Roof) -> Option<f64> {
    match *self {
      Observable::Constant { value } => Some(value),
      Observable::BaseInterval { a, b, .. } => {
        Some((roof.antiderivative(b) - roof.antiderivative(a)) / roof.integral())
      }
      Observable::HeightBand { .. } => None,
    }
  }

  /// Value subtracted by [`Observable::eval`] to center it.
  pub fn offset(&self, roof: &Roof) -> f64 {
    match *self {
      Observable::BaseInterval { centered: true, .. } => self.mean(roof).unwrap_or(0.0),
      _ => 0.0,
    }
  }
}

/// `F(T_{n t0} x0)` for `n = 0..count`, stepping the flow by `t0` each time.
pub fn flow_samples(
  obs: &Observable,
  roof: &Roof,
  rot: &Rotation,
  x0: FlowPoint,
  t0: f64,
  count: usize,
) -> Result<Vec<f64>> {
  let offset = obs.offset(roof);
  let mut p = x0;
  let mut out = Vec::with_capacity(count);
  for k in 0..count {
    if k > 0 {
      p = evolve(roof, rot, p, t0)?.0;
    }
    out.push(obs.eval(&p, offset));
  }
  Ok(out)
}

/// `(1/N) sum_{n=1..N} seq[n] mu(n)`.
pub fn mobius_average(seq: &[f64], table: &MobiusTable, n: u64) -> Result<f64> {
  if seq.len() <= n as usize {
    return Err(Error::SequenceTooShort {
      needed: n as usize + 1,
      have: seq.len(),
    });
  }
  if table.limit() < n {
    return Err(Error::SequenceTooShort {
      needed: n as usize,
      have: table.limit() as usize,
    });
  }
  let mut acc = CompensatedSum::new();
  for k in 1..=n as usize {
    acc.add(seq[k] * f64::from(table.values[k]));
  }
  Ok(acc.value() / n as f64)
}

/// `(1/N) sum_{n=1..N} F(T_{n t0} x0) mu(n)`.
#[allow(clippy::too_many_arguments)]
pub fn orthogonality_sum(
  obs: &Observable,
  roof: &Roof,
  rot: &Rotation,
  x0: FlowPoint,
  t0: f64,
  table: &MobiusTable,
  n: u64,
) -> Result<f64> {
  let seq = flow_samples(obs, roof, rot, x0, t0, n as usize + 1)?;
  mobius_average(&seq, table, n)
}

/// `(1/M) sum_{M <= m < 2M} |(1/H) sum_{m <= h < m+H} seq[h] mu(h)|`.
pub fn usic_statistic(seq: &[f64], table: &MobiusTable, m: u64, h: u64) -> Result<f64> {
  if h < 2 || h > m / 10 {
    return Err(Error::InvalidInput(format!(
      "need 2 <= H <= M/10, got M={m}, H={h}"
    )));
  }
  let end = (2 * m + h) as usize;
  if seq.len() < end {
    return Err(Error::SequenceTooShort {
      needed: end,
      have: seq.len(),
    });
  }
  if (table.limit() as usize) < end {
    return Err(Error::SequenceTooShort {
      needed: end,
      have: table.limit() as usize,
    });
  }
  // exact prefix sums: for 0/1-valued sequences they stay integral
  let mut prefix = vec![0.0; end + 1];
  for k in 0..end {
    prefix[k + 1] = prefix[k] + seq[k] * f64::from(table.values[k]);
  }
  let mut acc = CompensatedSum::new();
  for start in m as usize..2 * m as usize {
    acc.add(((prefix[start + h as usize] - prefix[start]) / h as f64).abs());
  }
  Ok(acc.value() / m as f64)
}

/// `(1/b_K) sum_{k<K} |sum_{b_k <= n < b_{k+1}} f(T^n x_k) mu(n)|`, with the
/// orbit restarted at `x_k` in each block: `block(k, b_k, len)` returns the
/// samples `f(T^n x_k)` for `n = b_k..b_k + len`.
pub fn momo_statistic<F>(table: &MobiusTable, bounds: &[u64], block: F) -> Result<f64>
where
  F: Fn(usize, u64, usize) -> Result<Vec<f64>>,
{
  if bounds.len() < 2 || bounds.windows(2).any(|w| w[1] <= w[0]) {
    return Err(Error::InvalidInput("block bounds must increase".into()));
  }
  let last = *bounds.last().unwrap();
  if table.limit() < last {
    return Err(Error::SequenceTooShort {
      needed: last as usize,
      have: table.limit() as usize,
    });
  }
  let mut acc = CompensatedSum::new();
  for (k, w) in bounds.windows(2).enumerate() {
    let len = (w[1] - w[0]) as usize;
    let vals = block(k, w[0], len)?;
    if vals.len() < len {
      return Err(Error::SequenceTooShort {
        needed: len,
        have: vals.len(),
      });
    }
    let mut s = CompensatedSum::new();
    for (j, v) in vals.iter().take(len).enumerate() {
      s.add(v * f64::from(table.values[w[0] as usize + j]));
    }
    acc.add(s.value().abs());
  }
  Ok(acc.value() / last as f64)
}

/// Whether each value is at most the previous one.
pub fn non_increasing(values: &[f64]) -> bool {
  values.windows(2).all(|w| w[1] <= w[0])
}

/// Canonical starting point for flow samples: base point `z`, height 0.
pub fn base_start(z: f64) -> FlowPoint {
  FlowPoint::new(CirclePoint::from_f64(z), 0.0)
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::contfrac::ContinuedFraction;
  use crate::roof::RoofSpec;
  use rand::{Rng, SeedableRng};
  use rand_chacha::ChaCha8Rng;

  fn trial_mu(mut n: u64) -> i8 {
    let mut sign = 1;
    let mut d = 2;
    while d * d <= n {
      if n % d == 0 {
        n /= d;
        if n % d == 0 {
          return 0;
        }
        sign = -sign;
      }
      d += 1;
    }
    if n > 1 {
      sign = -sign;
    }
    sign
  }

  #[test]
  fn small_values() {
    let t = mobius_sieve(100).unwrap();
    assert_eq!(&t.values()[1..=8], &[1, -1, -1, 0, -1, 1, -1, 0]);
    assert_eq!(t.mu(30), -1);
    assert_eq!(t.mertens(10), -1);
    assert!(matches!(
      mobius_sieve(SIEVE_LIMIT + 1),
      Err(Error::BudgetExceeded(_))
    ));
  }

  #[test]
  fn sieve_matches_factorization() {
    let n = 1_000_000;
    let t = mobius_sieve(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
      let k = rng.gen_range(1..=n);
      assert_eq!(t.mu(k), trial_mu(k), "n={k}");
    }
    // multiplicativity on coprime pairs
    for _ in 0..1000 {
      let a = rng.gen_range(1..1000u64);
      let b = rng.gen_range(1..1000u64);
      if num_integer::gcd(a, b) == 1 {
        assert_eq!(t.mu(a * b), t.mu(a) * t.mu(b));
      }
    }
    let m = t.mertens(n);
    assert_eq!(m, 212);
    assert!((m as f64).abs() / (n as f64) < 1e-3);
  }

  #[test]
  fn kbsz_reductions() {
    let ones = vec![Complex64::new(1.0, 0.0); 400];
    assert_eq!(
      kbsz_sum(&ones, 2, 3, 100).unwrap(),
      Complex64::new(1.0, 0.0)
    );
    let alt: Vec<Complex64> = (0..400)
      .map(|n| Complex64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
      .collect();
    for n in [99, 100] {
      let z = kbsz_sum(&alt, 2, 3, n).unwrap();
      assert!(z.norm() <= 1.0 / n as f64 + 1e-15);
    }
    assert!(matches!(
      kbsz_sum(&ones, 2, 3, 200),
      Err(Error::SequenceTooShort { .. })
    ));
    assert!(kbsz_sum(&ones, 2, 4, 10).is_err());
  }

  fn flow() -> (Roof, Rotation) {
    let roof = Roof::Arnold(RoofSpec::canonical()).normalize().unwrap();
    let rot = Rotation::new(&ContinuedFraction::from_quotients(&[1; 40]).unwrap()).unwrap();
    (roof, rot)
  }

  #[test]
  fn constant_observable_reduces_to_mertens() {
    let (roof, rot) = flow();
    let t = mobius_sieve(2000).unwrap();
    let one = Observable::Constant { value: 1.0 };
    let s = orthogonality_sum(&one, &roof, &rot, base_start(0.3), 0.7, &t, 2000).unwrap();
    assert_eq!(s, t.mertens(2000) as f64 / 2000.0);
  }

  #[test]
  fn centered_interval_has_zero_mean() {
    let (roof, rot) = flow();
    let obs = Observable::BaseInterval {
      a: 0.2,
      b: 0.6,
      centered: true,
    };
    let mean = obs.mean(&roof).unwrap();
    // midpoint rule on the roof density
    let n = 200_000;
    let want: f64 = (0..n)
      .map(|k| (k as f64 + 0.5) / n as f64)
      .filter(|&z| (0.2..0.6).contains(&z))
      .map(|z| roof.eval_xy(z, 1.0 - z, 0) / n as f64)
      .sum();
    assert!((mean - want).abs() < 1e-6, "{mean} vs {want}");
    // the ergodic average of the centered observable is small
    let seq = flow_samples(&obs, &roof, &rot, base_start(0.3), 0.37, 100_001).unwrap();
    let avg: f64 = seq[1..].iter().sum::<f64>() / 100_000.0;
    assert!(avg.abs() < 0.01, "{avg}");
  }

  #[test]
  fn usic_edges() {
    let t = mobius_sieve(10_000).unwrap();
    let zeros = vec![0.0; 10_000];
    assert_eq!(usic_statistic(&zeros, &t, 1000, 31).unwrap(), 0.0);
    let ones = vec![1.0; 10_000];
    let small = usic_statistic(&ones, &t, 1000, 31).unwrap();
    assert!(small > 0.0 && small < 1.0);
    // short-interval averages of mu shrink as the scale grows
    let big_t = mobius_sieve(200_316).unwrap();
    let big = usic_statistic(&vec![1.0; 200_316], &big_t, 100_000, 316).unwrap();
    assert!(big < small, "{big} vs {small}");
    assert!(usic_statistic(&ones, &t, 1000, 1).is_err());
    assert!(matches!(
      usic_statistic(&ones[..100], &t, 1000, 31),
      Err(Error::SequenceTooShort { .. })
    ));
  }

  #[test]
  fn momo_with_fixed_orbit_matches_direct_sum() {
    let t = mobius_sieve(1000).unwrap();
    let bounds = [10u64, 50, 200, 1000];
    let seq: Vec<f64> = (0..1000).map(|n| ((n * 7) % 5) as f64 / 4.0).collect();
    let got = momo_statistic(&t, &bounds, |_, s, len| {
      Ok(seq[s as usize..s as usize + len].to_vec())
    })
    .unwrap();
    let want: f64 = bounds
      .windows(2)
      .map(|w| {
        (w[0]..w[1])
          .map(|n| seq[n as usize] * t.mu(n) as f64)
          .sum::<f64>()
          .abs()
      })
      .sum::<f64>()
      / 1000.0;
    assert!((got - want).abs() < 1e-12);
  }
}
