//! The three growth conditions on the denominators `q_n`, and a constructor
//! for rotation numbers that satisfy them.
//!
//! With `L = ln`:
//! - resonant set `K`: indices with `q_{n+1} <= q_n L(q_n)^{7/8}`;
//! - summability: `sum over i not in K of L(q_i)^{-7/8}` stays bounded;
//! - witnesses: `q_{n+1} >= q_n L(q_n) L(L(q_n))` along a subsequence;
//! - global bound: `q_{n+1} <= q_n L(q_n)^2`.

use super::{ContinuedFraction, SourceTag, Tail};
use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiophantineReport {
  /// `in_k_alpha[n]` for `n = 0..depth-1`.
  pub in_k_alpha: Vec<bool>,
  pub d2_witnesses: Vec<usize>,
  pub d3_violations: Vec<usize>,
  /// Running sums of `L(q_i)^{-7/8}` over `i <= n`, `i` outside `K`, `q_i >= 2`.
  pub d1_partial_sums: Vec<f64>,
  /// Mean increment of the partial sums over the later half does not exceed
  /// that of the earlier half.
  pub d1_trend_flattening: bool,
  /// `max q_{n+1} / (q_n L(q_n)^2)` over `n` with `q_n >= 2`, clamped at 1.
  pub d_alpha: f64,
  /// First index with `q_n >= 8`; the global bound is asserted past it.
  pub prefix: usize,
}

impl DiophantineReport {
  pub fn d3_violations_past_prefix(&self) -> usize {
    self
      .d3_violations
      .iter()
      .filter(|&&n| n >= self.prefix)
      .count()
  }
}

const PREFIX_Q: f64 = 8.0;

pub fn check_diophantine(cf: &ContinuedFraction) -> Result<DiophantineReport> {
  let k = cf.depth();
  if k < 4 {
    return Err(Error::InvalidInput("depth must be at least 4".into()));
  }
  let q: Vec<f64> = (0..=k).map(|n| cf.q_f64(n)).collect::<Result<_>>()?;
  let mut in_k_alpha = Vec::with_capacity(k);
  let mut d2_witnesses = Vec::new();
  let mut d3_violations = Vec::new();
  let mut d1_partial_sums = Vec::with_capacity(k);
  let mut d1 = 0.0;
  let mut d_alpha: f64 = 1.0;
  for n in 0..k {
    let (qn, qn1) = (q[n], q[n + 1]);
    let l = qn.ln();
    let in_k = qn1 <= qn * l.powf(7.0 / 8.0);
    in_k_alpha.push(in_k);
    if qn >= 2.0 && qn1 >= qn * l * l.ln() {
      d2_witnesses.push(n);
    }
    if qn1 > qn * l * l {
      d3_violations.push(n);
    }
    if qn >= 2.0 {
      d_alpha = d_alpha.max(qn1 / (qn * l * l));
      if !in_k {
        d1 += l.powf(-7.0 / 8.0);
      }
    }
    d1_partial_sums.push(d1);
  }
  let prefix = q.iter().position(|&v| v >= PREFIX_Q).unwrap_or(k);
  let increments: Vec<f64> = d1_partial_sums.windows(2).map(|w| w[1] - w[0]).collect();
  let half = increments.len() / 2;
  let mean = |s: &[f64]| {
    if s.is_empty() {
      0.0
    } else {
      s.iter().sum::<f64>() / s.len() as f64
    }
  };
  let d1_trend_flattening = mean(&increments[half..]) <= mean(&increments[..half]);
  Ok(DiophantineReport {
    in_k_alpha,
    d2_witnesses,
    d3_violations,
    d1_partial_sums,
    d1_trend_flattening,
    d_alpha,
    prefix,
  })
}

/// Quotient `a_{n+1}` of the constructed rotation number, given `q_0..=q_n`.
pub(crate) fn constructed_quotient(gap: usize, n: usize, q: &[f64]) -> u64 {
  let qn = q[n];
  if qn >= PREFIX_Q && n % gap == 0 {
    let l = qn.ln();
    (l * l.ln()).ceil().max(1.0) as u64
  } else {
    1
  }
}

/// Rotation number whose quotients are 1 except at indices `n` divisible by
/// `witness_gap` (once `q_n >= 8`), where `a_{n+1} = ceil(L(q_n) L(L(q_n)))`.
pub fn construct_alpha_in_d(witness_gap: usize, depth: usize) -> Result<ContinuedFraction> {
  if witness_gap < 2 {
    return Err(Error::InvalidInput("witness gap must be at least 2".into()));
  }
  if depth < 8 {
    return Err(Error::InvalidInput("depth must be at least 8".into()));
  }
  let mut quotients = Vec::with_capacity(depth);
  let mut q = vec![1.0f64];
  for n in 0..depth {
    let a = constructed_quotient(witness_gap, n, &q);
    quotients.push(a);
    let next = a as f64 * q[n] + if n >= 1 { q[n - 1] } else { 0.0 };
    q.push(next);
  }
  ContinuedFraction::build(
    quotients,
    SourceTag::ExplicitQuotients,
    Tail::Constructed { gap: witness_gap },
    None,
  )
}
