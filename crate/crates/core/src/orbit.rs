//! Orbit queries for the rotation: closest returns, windows around the
//! singularity, spacing, and the forward/backward continuity test.
//!
//! Every query reduces to a range minimum `min_{start <= i < start+len} ||x + i alpha||`.
//! The naive path scans the range. The accelerated path splits the range into
//! Ostrowski blocks of lengths `q_j` and answers each block with a closest-return
//! query, which inverts `p_n` modulo `q_n` and tests seven candidate indices.
//! Both paths compare exact fixed-point distances, so they agree bit for bit.

use crate::circle::{pow2_128_divmod, CirclePoint, Rotation, TWO_128};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest range a naive scan will attempt.
pub const NAIVE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
  Naive,
  Accelerated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosestReturn {
  pub n: usize,
  /// Smallest `0 <= i < q_n` minimising `||x + i alpha||`.
  pub i: u64,
  /// `q_n ||x + i alpha||`.
  pub b: f64,
  #[serde(skip)]
  pub dist_raw: u128,
}

/// Minimum of `||x + i alpha||` over a range, with the smallest minimising index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RangeMin {
  pub dist_raw: u128,
  pub index: i64,
}

impl RangeMin {
  pub fn dist(&self) -> f64 {
    self.dist_raw as f64 / TWO_128
  }
}

fn better(a: RangeMin, b: RangeMin) -> RangeMin {
  if b.dist_raw < a.dist_raw || (b.dist_raw == a.dist_raw && b.index < a.index) {
    b
  } else {
    a
  }
}

fn naive_range_min(rot: &Rotation, x: CirclePoint, start: i64, len: u64) -> RangeMin {
  let alpha = rot.alpha();
  let mut z = rot.point(x, start);
  let mut best = RangeMin {
    dist_raw: u128::MAX,
    index: start,
  };
  for k in 0..len {
    let d = z.norm_raw();
    if d < best.dist_raw {
      best = RangeMin {
        dist_raw: d,
        index: start + k as i64,
      };
    }
    z = z + alpha;
  }
  best
}

fn mod_inverse(a: u64, m: u64) -> u64 {
  let (mut r0, mut r1) = (m as i128, (a % m) as i128);
  let (mut t0, mut t1) = (0i128, 1i128);
  while r1 != 0 {
    let qt = r0 / r1;
    (r0, r1) = (r1, r0 - qt * r1);
    (t0, t1) = (t1, t0 - qt * t1);
  }
  debug_assert_eq!(r0, 1, "p_n and q_n are coprime");
  t0.rem_euclid(m as i128) as u64
}

/// Minimum over `i in [start, start + q_n)` using the lattice structure of
/// `{ i alpha }` at scale `q_n`.
fn block_min(rot: &Rotation, x: CirclePoint, start: i64, n: usize) -> Result<RangeMin> {
  let q = rot.q(n)?;
  if q <= 16 {
    return Ok(naive_range_min(rot, x, start, q));
  }
  let p = rot.p(n)?;
  let inv = mod_inverse(p, q);
  let y = rot.point(x, start);
  let target = (-y).raw();
  // residue k with k / q closest to -y
  let (unit, _) = pow2_128_divmod(q as u128);
  let c = (target / unit).min(q as u128 - 1) as i128;
  let mut best = RangeMin {
    dist_raw: u128::MAX,
    index: i64::MAX,
  };
  for dk in -3i128..=3 {
    let k = (c + dk).rem_euclid(q as i128) as u128;
    let j = ((k * inv as u128) % q as u128) as i64;
    let d = rot.point(y, j).norm_raw();
    best = better(
      best,
      RangeMin {
        dist_raw: d,
        index: start + j,
      },
    );
  }
  Ok(best)
}

/// `min_{start <= i < start + len} ||x + i alpha||`, ties resolved to the smallest index.
pub fn range_min(
  rot: &Rotation,
  x: CirclePoint,
  start: i64,
  len: u64,
  method: Method,
) -> Result<RangeMin> {
  if len == 0 {
    return Err(Error::InvalidInput("empty range".into()));
  }
  rot.check_range(start.unsigned_abs() + len)?;
  match method {
    Method::Naive => {
      if len > NAIVE_BUDGET {
        return Err(Error::BudgetExceeded(format!("naive scan of {len} points")));
      }
      Ok(naive_range_min(rot, x, start, len))
    }
    Method::Accelerated => {
      let cf = rot.cf();
      let top = (0..=cf.depth())
        .rev()
        .find(|&j| cf.q_u64(j).map(|q| q <= len).unwrap_or(false))
        .unwrap_or(0);
      let mut best = RangeMin {
        dist_raw: u128::MAX,
        index: i64::MAX,
      };
      let mut offset = start;
      let mut rest = len;
      for j in (0..=top).rev() {
        let qj = cf.q_u64(j)?;
        while rest >= qj {
          best = better(best, block_min(rot, x, offset, j)?);
          offset += qj as i64;
          rest -= qj;
        }
      }
      Ok(best)
    }
  }
}

/// `B_{n,x} = q_n min_{0 <= j < q_n} ||x + j alpha||` and the minimising index.
pub fn closest_return(
  rot: &Rotation,
  x: CirclePoint,
  n: usize,
  method: Method,
) -> Result<ClosestReturn> {
  let q = rot.q(n)?;
  let m = match method {
    Method::Naive => range_min(rot, x, 0, q, Method::Naive)?,
    Method::Accelerated => {
      rot.check_range(q)?;
      block_min(rot, x, 0, n)?
    }
  };
  Ok(ClosestReturn {
    n,
    i: m.index as u64,
    b: q as f64 * m.dist(),
    dist_raw: m.dist_raw,
  })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpacingVerdict {
  pub min_gap: f64,
  pub max_gap: f64,
  /// Every pair of the first `q_n` orbit points is at least `1/(2 q_n)` apart.
  pub min_gap_ok: bool,
  /// Every closed interval of length `2/q_n` contains an orbit point.
  pub gap_cover_ok: bool,
}

/// Exhaustive spacing check for `q_n <= 10^6`.
pub fn spacing_check(rot: &Rotation, x: CirclePoint, n: usize) -> Result<SpacingVerdict> {
  let q = rot.q(n)?;
  if q > 1_000_000 {
    return Err(Error::BudgetExceeded(format!(
      "exhaustive spacing at q_n = {q}"
    )));
  }
  if q == 1 {
    return Ok(SpacingVerdict {
      min_gap: 1.0,
      max_gap: 1.0,
      min_gap_ok: true,
      gap_cover_ok: true,
    });
  }
  let mut pts: Vec<u128> = (0..q as i64).map(|j| rot.point(x, j).raw()).collect();
  pts.sort_unstable();
  let mut min_gap = u128::MAX;
  let mut max_gap = 0u128;
  for k in 0..pts.len() {
    let next = pts[(k + 1) % pts.len()];
    let gap = next.wrapping_sub(pts[k]);
    min_gap = min_gap.min(gap);
    max_gap = max_gap.max(gap);
  }
  // 1/(2q) = 2^127 / q and 2/q = 2^129 / q in raw units
  let (t, r) = pow2_128_divmod(q as u128);
  let half_unit_ceil = t / 2 + u128::from(t % 2 == 1 || r > 0);
  // at q = 2 the bound 2/q is the whole circle
  let two_units_floor = t
    .checked_mul(2)
    .map_or(u128::MAX, |v| v + (2 * r) / q as u128);
  Ok(SpacingVerdict {
    min_gap: min_gap as f64 / TWO_128,
    max_gap: max_gap as f64 / TWO_128,
    min_gap_ok: min_gap >= half_unit_ceil,
    gap_cover_ok: max_gap <= two_units_floor,
  })
}

/// Half-width `1/(q ln(q)^e)` of the windows around the singularity.
pub fn window_halfwidth(q: f64, exponent: f64) -> Result<f64> {
  if q < 2.0 {
    return Err(Error::ScaleOutOfRange(format!(
      "window at q = {q} (needs q >= 2)"
    )));
  }
  Ok(1.0 / (q * q.ln().powf(exponent)))
}

fn to_raw(w: f64) -> u128 {
  // saturating cast
  (w * TWO_128) as u128
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaVerdict {
  pub member: bool,
  /// Closest approach to 0 over the scanned orbit segment.
  pub min_distance: f64,
  pub closest_index: i64,
  /// The closest approach lies within the arithmetic error margin of the
  /// window edge; membership was then decided as inside.
  pub near_boundary: bool,
}

/// Is some `x + i alpha`, `0 <= i <= M q_{n+1}`, within `1/(q_n ln(q_n)^{7/8})` of 0?
pub fn sigma_membership(
  rot: &Rotation,
  x: CirclePoint,
  n: usize,
  m: f64,
  method: Method,
) -> Result<SigmaVerdict> {
  if m <= 0.0 {
    return Err(Error::InvalidInput("M must be positive".into()));
  }
  let len = (m * rot.q_f64(n + 1)?).floor() as u64 + 1;
  let w = window_halfwidth(rot.q_f64(n)?, 7.0 / 8.0)?;
  windowed_hit(rot, x, 0, len, w, method)
}

fn windowed_hit(
  rot: &Rotation,
  x: CirclePoint,
  start: i64,
  len: u64,
  w: f64,
  method: Method,
) -> Result<SigmaVerdict> {
  let found = range_min(rot, x, start, len, method)?;
  let w_raw = to_raw(w);
  let margin =
    to_raw((start.unsigned_abs() + len) as f64 * rot.step_error() + 4.0 * w * f64::EPSILON);
  let near_boundary = found.dist_raw.abs_diff(w_raw) <= margin;
  Ok(SigmaVerdict {
    member: found.dist_raw <= w_raw || near_boundary,
    min_distance: found.dist(),
    closest_index: found.index,
    near_boundary,
  })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GoodSet {
  /// Avoids `R^i [-1/(q_s ln^2 q_s), 1/(q_s ln^2 q_s)]` for `|i| <= q_s`.
  EPrime { s: usize },
  /// As `EPrime` with exponent 7/8.
  W { s: usize },
  /// Intersection of `EPrime(s)` over `s >= s0`.
  EIntersection { s0: usize },
  /// Intersection of `W(s)` over non-resonant `s >= s0`, together with `EIntersection(s0)`.
  Z { s0: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoodSetVerdict {
  pub member: bool,
  /// Last scale examined for intersections.
  pub truncated_at: Option<usize>,
  /// First scale whose window the point failed to avoid.
  pub failing_scale: Option<usize>,
}

fn avoids_symmetric(
  rot: &Rotation,
  x: CirclePoint,
  s: usize,
  exponent: f64,
  method: Method,
) -> Result<bool> {
  let q = rot.q(s)?;
  let w = window_halfwidth(q as f64, exponent)?;
  // ||x - i alpha|| for |i| <= q is ||(x - q alpha) + j alpha|| for 0 <= j <= 2q
  let v = windowed_hit(rot, x, -(q as i64), 2 * q + 1, w, method)?;
  Ok(!v.member)
}

/// Scales examined by the intersections: `q_s` between 2 and `index_budget`.
fn intersection_scales(rot: &Rotation, s0: usize, index_budget: u64) -> Vec<usize> {
  (s0..=rot.cf().depth())
    .filter(|&s| {
      rot
        .q(s)
        .map(|q| q >= 2 && 2 * q < index_budget)
        .unwrap_or(false)
    })
    .collect()
}

pub fn good_set_membership(
  rot: &Rotation,
  x: CirclePoint,
  kind: GoodSet,
  index_budget: u64,
  method: Method,
) -> Result<GoodSetVerdict> {
  let single = |s: usize, e: f64| -> Result<GoodSetVerdict> {
    if 2 * rot.q(s)? >= index_budget {
      return Err(Error::BudgetExceeded(format!("window scan at scale {s}")));
    }
    let ok = avoids_symmetric(rot, x, s, e, method)?;
    Ok(GoodSetVerdict {
      member: ok,
      truncated_at: None,
      failing_scale: (!ok).then_some(s),
    })
  };
  match kind {
    GoodSet::EPrime { s } => single(s, 2.0),
    GoodSet::W { s } => single(s, 7.0 / 8.0),
    GoodSet::EIntersection { s0 } | GoodSet::Z { s0 } => {
      let scales = intersection_scales(rot, s0, index_budget);
      let last = scales.last().copied();
      let with_w = matches!(kind, GoodSet::Z { .. });
      for &s in &scales {
        if !avoids_symmetric(rot, x, s, 2.0, method)? {
          return Ok(GoodSetVerdict {
            member: false,
            truncated_at: last,
            failing_scale: Some(s),
          });
        }
        if with_w && s < rot.cf().depth() {
          let (q, q1) = (rot.q_f64(s)?, rot.q_f64(s + 1)?);
          let resonant = q1 <= q * q.ln().powf(7.0 / 8.0);
          if !resonant && !avoids_symmetric(rot, x, s, 7.0 / 8.0, method)? {
            return Ok(GoodSetVerdict {
              member: false,
              truncated_at: last,
              failing_scale: Some(s),
            });
          }
        }
      }
      Ok(GoodSetVerdict {
        member: true,
        truncated_at: last,
        failing_scale: None,
      })
    }
  }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuityVerdict {
  /// `[y, y']` misses `R^{-i} W` for `0 <= i <= q_{s+1}/4`.
  pub forward_ok: bool,
  /// `[y, y']` misses `R^{i} W` for `0 <= i <= q_{s+1}/4`.
  pub backward_ok: bool,
  /// `q_{s+1} <= q_s ln(q_s)^{7/8}`.
  pub resonant: bool,
  /// `[y, y']` misses `R^i W` for `|i| <= q_s`.
  pub symmetric_avoidance: bool,
  pub admissible: bool,
  /// Admissible yet neither flag holds.
  pub violation: bool,
}

/// `W = [-1/(q_s ln(q_s)^{7/8}), 1/(q_s ln(q_s)^{7/8})]`, `[y, y']` the short arc.
pub fn forward_backward_classify(
  rot: &Rotation,
  y: CirclePoint,
  y2: CirclePoint,
  s: usize,
  method: Method,
) -> Result<ContinuityVerdict> {
  let diff = (y2 - y).raw() as i128;
  if diff == 0 {
    return Err(Error::InvalidInput("y and y' coincide".into()));
  }
  let half = CirclePoint::from_raw((diff / 2) as u128);
  let center = y + half;
  let h = diff.unsigned_abs() / 2;
  let (q, q1) = (rot.q_f64(s)?, rot.q_f64(s + 1)?);
  let w = window_halfwidth(q, 7.0 / 8.0)?;
  let reach = to_raw(w).saturating_add(h);
  let steps = (q1 / 4.0).floor() as u64 + 1;
  if steps > NAIVE_BUDGET && method == Method::Naive {
    return Err(Error::BudgetExceeded(format!(
      "continuity scan of {steps} points"
    )));
  }
  let fwd = range_min(rot, center, 0, steps, method)?;
  let bwd = range_min(rot, -center, 0, steps, method)?;
  let qs = rot.q(s)?;
  let sym = range_min(rot, center, -(qs as i64), 2 * qs + 1, method)?;
  let forward_ok = fwd.dist_raw > reach;
  let backward_ok = bwd.dist_raw > reach;
  let resonant = q1 <= q * q.ln().powf(7.0 / 8.0);
  let symmetric_avoidance = sym.dist_raw > reach;
  let admissible = resonant || symmetric_avoidance;
  Ok(ContinuityVerdict {
    forward_ok,
    backward_ok,
    resonant,
    symmetric_avoidance,
    admissible,
    violation: admissible && !forward_ok && !backward_ok,
  })
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::contfrac::{cf_expand, construct_alpha_in_d, AlphaSource, ContinuedFraction};
  use proptest::prelude::*;

  fn golden() -> Rotation {
    Rotation::new(&ContinuedFraction::from_quotients(&[1; 40]).unwrap()).unwrap()
  }

  fn silver() -> Rotation {
    Rotation::new(
      &cf_expand(
        &AlphaSource::Quadratic {
          a: -1,
          b: 1,
          d: 2,
          c: 1,
        },
        30,
      )
      .unwrap(),
    )
    .unwrap()
  }

  #[test]
  fn closest_return_small_golden_case() {
    let rot = golden();
    let alpha = (5f64.sqrt() - 1.0) / 2.0;
    let x = CirclePoint::from_f64(alpha / 3.0);
    let cr = closest_return(&rot, x, 4, Method::Naive).unwrap();
    // oracle: scan of the five points x + j alpha
    let d: Vec<f64> = (0..5)
      .map(|j| {
        let v = (alpha / 3.0 + j as f64 * alpha).fract();
        v.min(1.0 - v)
      })
      .collect();
    let (j_min, d_min) = d.iter().enumerate().fold(
      (0, 1.0),
      |acc, (j, &v)| if v < acc.1 { (j, v) } else { acc },
    );
    assert_eq!(cr.i, j_min as u64);
    assert!((cr.b - 5.0 * d_min).abs() < 1e-12);
    assert!(cr.b > 0.0 && cr.b < 1.0);
    assert_eq!(closest_return(&rot, x, 4, Method::Accelerated).unwrap(), cr);
  }

  #[test]
  fn closest_return_at_zero() {
    let rot = golden();
    let cr = closest_return(&rot, CirclePoint::ZERO, 10, Method::Accelerated).unwrap();
    assert_eq!(cr.i, 0);
    assert_eq!(cr.b, 0.0);
  }

  #[test]
  fn spacing_examples() {
    let rot = golden();
    let v = spacing_check(&rot, CirclePoint::from_f64(0.1), 5).unwrap();
    assert!(v.min_gap >= 1.0 / 16.0 && v.min_gap_ok && v.gap_cover_ok);
    let one = spacing_check(&rot, CirclePoint::from_f64(0.1), 1).unwrap();
    assert!(one.min_gap_ok && one.gap_cover_ok);
    // q_2 = 2: the cover bound is the whole circle
    let two = spacing_check(&rot, CirclePoint::from_f64(0.3), 2).unwrap();
    assert_eq!(rot.q(2).unwrap(), 2);
    assert!(two.min_gap_ok && two.gap_cover_ok);
  }

  #[test]
  fn gap_cover_matches_window_sweep() {
    let rot = silver();
    for x in [0.0, 0.37, 0.912] {
      let x = CirclePoint::from_f64(x);
      let v = spacing_check(&rot, x, 4).unwrap();
      // sweep oracle: windows [c, c + 2/29] with step 1/290
      let pts: Vec<f64> = (0..29).map(|j| rot.point(x, j).to_f64()).collect();
      let all_hit = (0..290).all(|k| {
        let c = k as f64 / 290.0;
        pts.iter().any(|&p| ((p - c).rem_euclid(1.0)) <= 2.0 / 29.0)
      });
      assert_eq!(v.gap_cover_ok, all_hit);
      assert!(all_hit);
    }
  }

  #[test]
  fn sigma_examples() {
    let rot = golden();
    assert!(
      sigma_membership(&rot, CirclePoint::ZERO, 8, 1.0, Method::Naive)
        .unwrap()
        .member
    );
    // exhaustive oracle on a small case: q_{n+1} <= 10^3
    let n = 14; // q_14 = 610, q_15 = 987
    let w = 1.0 / (610.0 * 610f64.ln().powf(0.875));
    let alpha = rot.alpha().to_f64();
    let mut checked_outside = 0;
    for k in 0..4000 {
      let x0 = (k as f64 + 0.5) / 4000.0;
      let dists: Vec<f64> = (0..=987)
        .map(|i| {
          let v = (x0 + i as f64 * alpha).rem_euclid(1.0);
          v.min(1.0 - v)
        })
        .collect();
      let got =
        sigma_membership(&rot, CirclePoint::from_f64(x0), n, 1.0, Method::Accelerated).unwrap();
      if dists.iter().all(|&d| d > 1.05 * w) {
        assert!(!got.member);
        checked_outside += 1;
      }
      if dists.iter().any(|&d| d < 0.95 * w) {
        assert!(got.member);
      }
    }
    assert!(checked_outside > 0);
  }

  #[test]
  fn good_set_examples() {
    let rot = golden();
    for s in 3..15 {
      let v = good_set_membership(
        &rot,
        CirclePoint::ZERO,
        GoodSet::EPrime { s },
        NAIVE_BUDGET,
        Method::Accelerated,
      )
      .unwrap();
      assert!(!v.member);
    }
    // x = 1/2, s = 3: the seven shifts |i| <= 3
    let q3 = 3.0f64;
    let w = 1.0 / (q3 * q3.ln().powi(2));
    let alpha = rot.alpha().to_f64();
    let oracle = (-3..=3).all(|i: i32| {
      let v = (0.5 - i as f64 * alpha).rem_euclid(1.0);
      v.min(1.0 - v) > w
    });
    let got = good_set_membership(
      &rot,
      CirclePoint::from_f64(0.5),
      GoodSet::EPrime { s: 3 },
      NAIVE_BUDGET,
      Method::Naive,
    )
    .unwrap();
    assert_eq!(got.member, oracle);
  }

  #[test]
  fn good_set_measure_is_large() {
    use rand::{Rng, SeedableRng};
    let rot = golden();
    let s = 11; // q_11 = 144
    let q = 144.0f64;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let inside = (0..10_000)
      .filter(|_| {
        let x = CirclePoint::from_f64(rng.gen::<f64>());
        good_set_membership(
          &rot,
          x,
          GoodSet::EPrime { s },
          NAIVE_BUDGET,
          Method::Accelerated,
        )
        .unwrap()
        .member
      })
      .count();
    let bound = 1.0 - 5.0 * (2.0 * q + 1.0) * 2.0 / (q * q.ln().powi(2));
    assert!(inside as f64 / 1e4 >= bound);
  }

  #[test]
  fn intersection_records_truncation() {
    let rot = golden();
    let v = good_set_membership(
      &rot,
      CirclePoint::from_f64(0.3),
      GoodSet::EIntersection { s0: 5 },
      1_000_000,
      Method::Accelerated,
    )
    .unwrap();
    let last = v.truncated_at.unwrap();
    assert!(rot.q(last).unwrap() * 2 < 1_000_000);
    assert!(rot.q(last + 1).unwrap() * 2 >= 1_000_000);
  }

  #[test]
  fn forward_hit_is_detected() {
    let rot = golden();
    let s = 10;
    let eps = CirclePoint::from_f64(1e-6);
    // y = -5 alpha + eps enters the window after five forward steps
    let y = rot.point(CirclePoint::ZERO, -5) + eps;
    let y2 = y + CirclePoint::from_f64(1e-7);
    let v = forward_backward_classify(&rot, y, y2, s, Method::Naive).unwrap();
    assert!(!v.forward_ok);
  }

  #[test]
  fn far_pair_passes_both_ways() {
    let cf = construct_alpha_in_d(3, 30).unwrap();
    let rot = Rotation::new(&cf).unwrap();
    let s = (1..30)
      .find(|&s| rot.q(s).unwrap() >= 100 && cf.a(s + 1).unwrap() == 1)
      .unwrap();
    let q1 = rot.q(s + 1).unwrap();
    let w = window_halfwidth(rot.q_f64(s).unwrap(), 0.875).unwrap();
    let alpha = rot.alpha().to_f64();
    let lim = q1 / 4;
    // search for a y far from every forward and backward preimage
    let y0 = (0..1000).map(|k| (k as f64 + 0.5) / 1000.0).find(|&y| {
      (0..=lim as i64).all(|i| {
        let a = (y + i as f64 * alpha).rem_euclid(1.0);
        let b = (y - i as f64 * alpha).rem_euclid(1.0);
        a.min(1.0 - a) > w + 1e-4 && b.min(1.0 - b) > w + 1e-4
      })
    });
    let y0 = y0.expect("some far point exists");
    let y = CirclePoint::from_f64(y0);
    let v = forward_backward_classify(&rot, y, y + CirclePoint::from_f64(1e-5), s, Method::Naive)
      .unwrap();
    assert!(v.forward_ok && v.backward_ok);
  }

  proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn accelerated_matches_naive(xr in any::<u128>(), n in 2usize..25, quotients in prop::collection::vec(1u64..7, 30..31)) {
      let rot = Rotation::new(&ContinuedFraction::from_quotients(&quotients).unwrap()).unwrap();
      prop_assume!(rot.q(n).unwrap() <= 200_000);
      let x = CirclePoint::from_raw(xr);
      let a = closest_return(&rot, x, n, Method::Naive).unwrap();
      let b = closest_return(&rot, x, n, Method::Accelerated).unwrap();
      prop_assert_eq!(a, b);
      prop_assert!(a.b < 1.0);
    }

    #[test]
    fn range_min_methods_agree(xr in any::<u128>(), start in -5000i64..5000, len in 1u64..20_000) {
      let rot = silver();
      let x = CirclePoint::from_raw(xr);
      prop_assert_eq!(
        range_min(&rot, x, start, len, Method::Naive).unwrap(),
        range_min(&rot, x, start, len, Method::Accelerated).unwrap()
      );
    }

    #[test]
    fn sigma_is_monotone_in_m(xr in any::<u128>(), m in 0.1f64..2.0, extra in 0.0f64..2.0) {
      let rot = golden();
      let x = CirclePoint::from_raw(xr);
      let small = sigma_membership(&rot, x, 12, m, Method::Accelerated).unwrap();
      let large = sigma_membership(&rot, x, 12, m + extra, Method::Accelerated).unwrap();
      prop_assert!(!small.member || large.member);
      let naive = sigma_membership(&rot, x, 12, m, Method::Naive).unwrap();
      prop_assert_eq!(small.member, naive.member);
    }
  }
}
