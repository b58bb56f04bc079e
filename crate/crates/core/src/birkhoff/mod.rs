//! Birkhoff sums `f^(n)(x) = sum_{j<n} f(x + j alpha)` of a roof and its
//! derivatives, and verifiers for the estimates that control them.
//!
//! Negative lengths follow the cocycle convention `f^(-n)(x) = -f^(n)(x - n alpha)`.

mod calibrate;
mod dk;
mod lemmas;

pub use calibrate::{
  calibrate, calibrate_then_test, smallest_passing_scale, CalibrationOutcome, Constants, HEADROOM,
  TEST_MAX_Q, TRAIN_MAX_Q,
};
pub use dk::{denjoy_koksma_check, BoundedVariation};
pub use lemmas::{
  resonant_decomposition, verify_dominated_derivatives, verify_f_bound, verify_fprime_far,
  verify_fprime_goodscale, verify_higher_derivatives, verify_intermediate_f2,
  verify_regular_derivatives, verify_special_times, FBoundOptions, GoodScaleInput,
  HigherDerivativeInput, ResonantReport, ResonantTerm,
};

use crate::circle::{CirclePoint, Rotation, TWO_128};
use crate::error::{Error, Result};
use crate::roof::{Roof, MAX_ORDER};
use crate::summation::CompensatedSum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Orbit points closer than this to the singularity abort the sum.
pub const SINGULAR_GUARD: f64 = 1e-15;
/// Longest sum either method will evaluate.
pub const SUM_BUDGET: u64 = 100_000_000;
/// Blocks at most this long are summed directly.
const LEAF_LEN: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumMethod {
  NaiveCompensated,
  OstrowskiBlocked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffRequest {
  pub roof: Roof,
  pub x: CirclePoint,
  pub n: i64,
  pub order: usize,
  pub method: SumMethod,
}

impl BirkhoffRequest {
  pub fn evaluate(&self, rot: &Rotation) -> Result<f64> {
    birkhoff_sum(&self.roof, rot, self.x, self.n, self.order, self.method)
  }
}

fn guard_raw() -> u128 {
  (SINGULAR_GUARD * TWO_128) as u128
}

fn check_len(len: u64) -> Result<()> {
  if len > SUM_BUDGET {
    return Err(Error::BudgetExceeded(format!("sum of {len} terms")));
  }
  Ok(())
}

fn check_order(order: usize) -> Result<()> {
  if order > MAX_ORDER {
    return Err(Error::InvalidInput(format!(
      "derivative order {order} exceeds {MAX_ORDER}"
    )));
  }
  Ok(())
}

/// Sums orders `0..=top` over `x + j alpha`, `start <= j < start + len`.
fn leaf_sums<const K: usize>(
  roof: &Roof,
  rot: &Rotation,
  x: CirclePoint,
  start: i64,
  len: u64,
  orders: [usize; K],
) -> Result<[CompensatedSum; K]> {
  let alpha = rot.alpha();
  let singular = roof.is_singular();
  let guard = guard_raw();
  let mut z = rot.point(x, start);
  let mut acc = [CompensatedSum::new(); K];
  for k in 0..len {
    if singular && z.norm_raw() < guard {
      return Err(Error::SingularOrbit {
        index: start + k as i64,
        guard: SINGULAR_GUARD,
      });
    }
    let (a, b) = (z.to_f64(), z.complement_f64());
    for (s, &o) in acc.iter_mut().zip(orders.iter()) {
      s.add(roof.eval_xy(a, b, o));
    }
    z = z + alpha;
  }
  Ok(acc)
}

/// Splits `[start, start + len)` into Ostrowski blocks of lengths `q_j`, each
/// further refined through `q_j = a_j q_{j-1} + q_{j-2}` down to short leaves.
fn ostrowski_leaves(rot: &Rotation, start: i64, len: u64) -> Result<Vec<(i64, u64)>> {
  let cf = rot.cf();
  let mut top = 0;
  while top < cf.depth() && rot.q(top + 1).map(|q| q <= len).unwrap_or(false) {
    top += 1;
  }
  let mut blocks = Vec::new();
  let mut offset = start;
  let mut rest = len;
  for j in (0..=top).rev() {
    let qj = rot.q(j)?;
    while rest >= qj {
      blocks.push((offset, j));
      offset += qj as i64;
      rest -= qj;
    }
  }
  blocks.reverse();
  let mut leaves = Vec::new();
  while let Some((s, j)) = blocks.pop() {
    let qj = rot.q(j)?;
    if qj <= LEAF_LEN || j < 2 {
      let mut o = 0;
      while o < qj {
        let l = (qj - o).min(LEAF_LEN);
        leaves.push((s + o as i64, l));
        o += l;
      }
      continue;
    }
    let (q1, q2) = (rot.q(j - 1)?, rot.q(j - 2)?);
    let mut o = s;
    let mut sub = Vec::new();
    for _ in 0..cf.a(j)? {
      sub.push((o, j - 1));
      o += q1 as i64;
    }
    sub.push((o, j - 2));
    debug_assert_eq!(o + q2 as i64, s + qj as i64);
    // stack order: push reversed so leaves come out left to right
    blocks.extend(sub.into_iter().rev());
  }
  Ok(leaves)
}

fn range_sums<const K: usize>(
  roof: &Roof,
  rot: &Rotation,
  x: CirclePoint,
  start: i64,
  len: u64,
  orders: [usize; K],
  method: SumMethod,
) -> Result<[f64; K]> {
  check_len(len)?;
  for &o in &orders {
    check_order(o)?;
  }
  rot.check_range(start.unsigned_abs() + len)?;
  let acc = match method {
    SumMethod::NaiveCompensated => leaf_sums(roof, rot, x, start, len, orders)?,
    SumMethod::OstrowskiBlocked => {
      let leaves = ostrowski_leaves(rot, start, len)?;
      let parts: Vec<Result<[CompensatedSum; K]>> = leaves
        .par_iter()
        .map(|&(s, l)| leaf_sums(roof, rot, x, s, l, orders))
        .collect();
      let mut acc = [CompensatedSum::new(); K];
      for p in parts {
        let p = p?;
        for (a, b) in acc.iter_mut().zip(p.iter()) {
          a.merge(b);
        }
      }
      acc
    }
  };
  Ok(acc.map(|s| s.value()))
}

/// `f^(order)` Birkhoff sum of length `n` starting at `x`.
pub fn birkhoff_sum(
  roof: &Roof,
  rot: &Rotation,
  x: CirclePoint,
  n: i64,
  order: usize,
  method: SumMethod,
) -> Result<f64> {
  if n == 0 {
    check_order(order)?;
    return Ok(0.0);
  }
  let len = n.unsigned_abs();
  let start = if n > 0 { 0 } else { n };
  let [v] = range_sums(roof, rot, x, start, len, [order], method)?;
  Ok(if n > 0 { v } else { -v })
}

/// All five orders `f, f', ..., f''''` summed over the same `n >= 0` points.
pub fn birkhoff_sums_all(
  roof: &Roof,
  rot: &Rotation,
  x: CirclePoint,
  n: u64,
  method: SumMethod,
) -> Result<[f64; 5]> {
  if n == 0 {
    return Ok([0.0; 5]);
  }
  range_sums(roof, rot, x, 0, n, [0, 1, 2, 3, 4], method)
}

/// `f^(c)(x)` for every checkpoint `c`, in one compensated pass. Checkpoints
/// need not be sorted; the output follows their order.
pub fn birkhoff_prefix(
  roof: &Roof,
  rot: &Rotation,
  x: CirclePoint,
  checkpoints: &[u64],
  order: usize,
) -> Result<Vec<f64>> {
  check_order(order)?;
  let last = checkpoints.iter().copied().max().unwrap_or(0);
  check_len(last)?;
  rot.check_range(last)?;
  let mut idx: Vec<usize> = (0..checkpoints.len()).collect();
  idx.sort_by_key(|&i| checkpoints[i]);
  let mut out = vec![0.0; checkpoints.len()];
  let mut acc = CompensatedSum::new();
  let mut done = 0u64;
  for i in idx {
    let c = checkpoints[i];
    if c > done {
      let [part] = leaf_sums(roof, rot, x, done as i64, c - done, [order])?;
      acc.merge(&part);
      done = c;
    }
    out[i] = acc.value();
  }
  Ok(out)
}
