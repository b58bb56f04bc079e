//! Shearing diagnostics for pairs of rescaled flows: the drift between paired
//! Birkhoff-sum differences, when it first reaches a prescribed shift, which
//! variation scales a pair of nearby points live at, and the two auxiliary
//! checks used alongside them (almost linear reparametrizations and the
//! two-expression lower bound).

mod combinatorial;
mod reparam;

pub use combinatorial::{
  combinatorial_search, excluded_family, min_over_ratio, CombinatorialReport, GridPoint, GridSpec,
};
pub use reparam::{almost_linear_check, GoodTriple, Piece, Reparam, StepProbe};

use crate::birkhoff::birkhoff_prefix;
use crate::circle::{CirclePoint, Rotation};
use crate::error::{Error, Result};
use crate::roof::Roof;
use serde::{Deserialize, Serialize};

/// Shift `r_{p,q}` used when none is configured.
pub const DEFAULT_RPQ: f64 = 0.01;
/// Time-scale factor `c_{p,q}` used when none is configured.
pub const DEFAULT_CPQ: f64 = 0.1;

/// The two pairs of points whose Birkhoff sums are compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftPoints {
  pub x: CirclePoint,
  pub x2: CirclePoint,
  pub y: CirclePoint,
  pub y2: CirclePoint,
}

/// `a_w = p(f^(w)(x) - f^(w)(x')) - q(f^([zeta w])(y) - f^([zeta w])(y'))`
/// for `w = 0..=w_max`, with `f` normalized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftSeries {
  pub p: f64,
  pub q: f64,
  pub zeta: f64,
  pub points: DriftPoints,
  pub values: Vec<f64>,
  /// Largest `|a_{w+1} - a_w|` minus its one-step bound; at most rounding.
  pub continuity_excess: f64,
}

impl DriftSeries {
  pub fn w_max(&self) -> u64 {
    self.values.len().saturating_sub(1) as u64
  }
}

/// `floor(p w / q)`, the y-side length paired with `w`.
pub fn paired_len(p: f64, q: f64, w: i64) -> i64 {
  if p == q {
    return w;
  }
  (p * w as f64 / q).floor() as i64
}

fn prefix_diff(
  roof: &Roof,
  rot: &Rotation,
  a: CirclePoint,
  b: CirclePoint,
  checkpoints: &[u64],
) -> Result<Vec<f64>> {
  let sa = birkhoff_prefix(roof, rot, a, checkpoints, 0)?;
  let sb = birkhoff_prefix(roof, rot, b, checkpoints, 0)?;
  Ok(sa.iter().zip(&sb).map(|(u, v)| u - v).collect())
}

/// Drift series of the normalized `roof`.
pub fn drift_sequence(
  roof: &Roof,
  rot: &Rotation,
  p: f64,
  q: f64,
  pts: DriftPoints,
  w_max: u64,
) -> Result<DriftSeries> {
  if !(p > 0.0 && q > 0.0) {
    return Err(Error::InvalidInput(format!(
      "need positive p and q, got p={p}, q={q}"
    )));
  }
  let f = roof.normalize()?;
  let zeta = p / q;
  let xs: Vec<u64> = (0..=w_max).collect();
  let ys: Vec<u64> = xs
    .iter()
    .map(|&w| paired_len(p, q, w as i64) as u64)
    .collect();
  let dx = prefix_diff(&f, rot, pts.x, pts.x2, &xs)?;
  let dy = prefix_diff(&f, rot, pts.y, pts.y2, &ys)?;
  let values: Vec<f64> = dx.iter().zip(&dy).map(|(a, b)| p * a - q * b).collect();

  let mut excess = f64::NEG_INFINITY;
  for w in 0..w_max as usize {
    let j = w as i64;
    let mut bound = p * (f.eval(rot.point(pts.x, j), 0)? - f.eval(rot.point(pts.x2, j), 0)?).abs();
    for k in ys[w]..ys[w + 1] {
      let k = k as i64;
      bound += q * (f.eval(rot.point(pts.y, k), 0)? - f.eval(rot.point(pts.y2, k), 0)?).abs();
    }
    excess = excess.max((values[w + 1] - values[w]).abs() - bound);
  }
  Ok(DriftSeries {
    p,
    q,
    zeta,
    points: pts,
    values,
    continuity_excess: excess.max(0.0),
  })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Splitting {
  /// First `w` with `|a_w - sign r| < 2 eps^{3/2}`.
  pub m: u64,
  /// `floor(kappa M)`.
  pub l: u64,
  pub shift_sign: i8,
  /// Whether `|a_s - a_M| < eps^{3/2}` on `[M, M+L]`; `None` when the window
  /// runs past the series.
  pub plateau: Option<bool>,
  pub plateau_excess: f64,
}

/// First time `w >= 1` the drift comes within `2 eps^{3/2}` of `+r` or `-r`,
/// with the plateau after it checked against `eps^{3/2}`.
pub fn splitting_time(series: &DriftSeries, r_pq: f64, eps: f64, kappa: f64) -> Option<Splitting> {
  let hit = 2.0 * eps.powf(1.5);
  let flat = eps.powf(1.5);
  let (m, sign) = series
    .values
    .iter()
    .enumerate()
    .skip(1)
    .find_map(|(w, &a)| {
      if (a - r_pq).abs() < hit {
        Some((w, 1i8))
      } else if (a + r_pq).abs() < hit {
        Some((w, -1i8))
      } else {
        None
      }
    })?;
  let l = (kappa * m as f64).floor() as usize;
  let am = series.values[m];
  let end = m + l;
  let window = &series.values[m..=end.min(series.values.len() - 1)];
  let worst = window.iter().map(|a| (a - am).abs()).fold(0.0, f64::max);
  let plateau = if end < series.values.len() {
    Some(worst < flat)
  } else {
    None
  };
  Some(Splitting {
    m: m as u64,
    l: l as u64,
    shift_sign: sign,
    plateau,
    plateau_excess: worst - flat,
  })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShearCase {
  /// The two pairs vary at different scales.
  Asynchronous,
  /// Both pairs vary at the same scale.
  SecondOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseReport {
  pub x_scale: usize,
  pub v_scale: usize,
  pub case: ShearCase,
  pub t: f64,
}

/// `n` with `1/(q_{n+1} log q_{n+1}) < d <= 1/(q_n log q_n)`, `n >= 2`.
pub fn variation_scale(rot: &Rotation, d: f64) -> Result<usize> {
  let theta = |n: usize| -> Result<f64> {
    let q = rot.q_f64(n)?;
    Ok(1.0 / (q * q.ln()))
  };
  if !(d > 0.0 && d < theta(2)?) {
    return Err(Error::ScaleOutOfRange(format!(
      "distance {d:e} is not in (0, 1/(q_2 log q_2))"
    )));
  }
  let mut n = 2;
  loop {
    if n + 1 > rot.cf().depth() {
      return Err(Error::ScaleOutOfRange(format!(
        "distance {d:e} is below the computed depth"
      )));
    }
    if theta(n + 1)? < d {
      return Ok(n);
    }
    n += 1;
  }
}

/// Variation scales of `x' - x` and `y' - y` and the time horizon
/// `T = zeta c_pq min(1/|x-x'|, 1/|y-y'|, q_{v+1})`.
pub fn classify_case(
  rot: &Rotation,
  pts: &DriftPoints,
  p: f64,
  q: f64,
  c_pq: f64,
) -> Result<CaseReport> {
  let dx = (pts.x2 - pts.x).norm();
  let dy = (pts.y2 - pts.y).norm();
  let x_scale = variation_scale(rot, dx)?;
  let v_scale = variation_scale(rot, dy)?;
  let qv1 = rot.q_f64(v_scale + 1)?;
  let t = p / q * c_pq * (1.0 / dx).min(1.0 / dy).min(qv1);
  let case = if x_scale == v_scale {
    ShearCase::SecondOrder
  } else {
    ShearCase::Asynchronous
  };
  Ok(CaseReport {
    x_scale,
    v_scale,
    case,
    t,
  })
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::birkhoff::{birkhoff_sum, SumMethod};
  use crate::contfrac::{construct_alpha_in_d, ContinuedFraction};
  use crate::roof::RoofSpec;

  fn golden() -> Rotation {
    Rotation::new(&ContinuedFraction::from_quotients(&[1; 40]).unwrap()).unwrap()
  }

  fn canonical() -> Roof {
    Roof::Arnold(RoofSpec::canonical())
  }

  fn pt(x: f64) -> CirclePoint {
    CirclePoint::from_f64(x)
  }

  fn synthetic(values: Vec<f64>) -> DriftSeries {
    let z = CirclePoint::ZERO;
    DriftSeries {
      p: 1.0,
      q: 2.0,
      zeta: 0.5,
      points: DriftPoints {
        x: z,
        x2: z,
        y: z,
        y2: z,
      },
      values,
      continuity_excess: 0.0,
    }
  }

  #[test]
  fn identical_pairs_do_not_drift() {
    let rot = golden();
    let pts = DriftPoints {
      x: pt(0.31),
      x2: pt(0.31),
      y: pt(0.77),
      y2: pt(0.77),
    };
    let s = drift_sequence(&canonical(), &rot, 1.0, 1.5, pts, 500).unwrap();
    assert!(s.values.iter().all(|&a| a == 0.0));
  }

  #[test]
  fn equal_weights_cancel() {
    let rot = golden();
    let pts = DriftPoints {
      x: pt(0.31),
      x2: pt(0.42),
      y: pt(0.31),
      y2: pt(0.42),
    };
    let s = drift_sequence(&canonical(), &rot, 1.3, 1.3, pts, 300).unwrap();
    assert!(s.values.iter().all(|&a| a == 0.0));
  }

  #[test]
  fn drift_matches_recomputation() {
    let cf = construct_alpha_in_d(3, 30).unwrap();
    let rot = Rotation::new(&cf).unwrap();
    let q7 = rot.q(7).unwrap() as u128;
    let x = pt(0.2718);
    let y = pt(0.5772);
    let pts = DriftPoints {
      x,
      x2: x + CirclePoint::from_ratio(1, q7),
      y,
      y2: y + CirclePoint::from_ratio(1, 3 * q7),
    };
    let (p, q) = (1.0, 1.25);
    let w_max = 2000;
    let s = drift_sequence(&canonical(), &rot, p, q, pts, w_max).unwrap();
    let f = canonical().normalize().unwrap();
    // same path: prefix sums with the same checkpoints
    let xs: Vec<u64> = (0..=w_max).collect();
    let ys: Vec<u64> = xs
      .iter()
      .map(|&w| paired_len(p, q, w as i64) as u64)
      .collect();
    let bx = birkhoff_prefix(&f, &rot, pts.x, &xs, 0).unwrap();
    let bx2 = birkhoff_prefix(&f, &rot, pts.x2, &xs, 0).unwrap();
    let by = birkhoff_prefix(&f, &rot, pts.y, &ys, 0).unwrap();
    let by2 = birkhoff_prefix(&f, &rot, pts.y2, &ys, 0).unwrap();
    for w in 0..=w_max as usize {
      let want = p * (bx[w] - bx2[w]) - q * (by[w] - by2[w]);
      assert_eq!(s.values[w].to_bits(), want.to_bits(), "w={w}");
    }
    // independent route: one Birkhoff sum per term
    for w in [1i64, 17, 333, 1999, 2000] {
      let k = paired_len(p, q, w);
      let b = |z, n| birkhoff_sum(&f, &rot, z, n, 0, SumMethod::NaiveCompensated).unwrap();
      let want = p * (b(pts.x, w) - b(pts.x2, w)) - q * (b(pts.y, k) - b(pts.y2, k));
      assert!(
        (s.values[w as usize] - want).abs() < 1e-11 * (1.0 + w as f64),
        "w={w}"
      );
    }
    assert!(s.continuity_excess < 1e-9, "{}", s.continuity_excess);
  }

  #[test]
  fn constructed_alpha_splits_with_plateau() {
    let cf = construct_alpha_in_d(3, 30).unwrap();
    let rot = Rotation::new(&cf).unwrap();
    let q = rot.q(16).unwrap() as u128;
    let x = pt(0.2718);
    let y = pt(0.5772);
    let pts = DriftPoints {
      x,
      x2: x + CirclePoint::from_ratio(1, q),
      y,
      y2: y + CirclePoint::from_ratio(1, 2 * q),
    };
    let s = drift_sequence(&canonical(), &rot, 1.0, 2.0, pts, 80_000).unwrap();
    let split = splitting_time(&s, 0.01, 0.01, 0.01).unwrap();
    assert!(split.m > 1000, "{split:?}");
    assert_eq!(split.plateau, Some(true));
    assert!(s.continuity_excess < 1e-9);
  }

  #[test]
  fn paired_length_floors() {
    assert_eq!(paired_len(1.0, 3.0, 3), 1);
    assert_eq!(paired_len(1.0, 3.0, 2), 0);
    assert_eq!(paired_len(1.0, 3.0, -1), -1);
    assert_eq!(paired_len(2.0, 1.0, 5), 10);
  }

  #[test]
  fn zero_series_never_splits() {
    assert_eq!(
      splitting_time(&synthetic(vec![0.0; 1000]), 0.01, 1e-3, 0.005),
      None
    );
  }

  #[test]
  fn linear_drift_splits_at_hundred() {
    let series = synthetic((0..=1000).map(|w| w as f64 * 1e-4).collect());
    let s = splitting_time(&series, 0.01, 1e-3, 0.005).unwrap();
    assert_eq!((s.m, s.l, s.shift_sign), (100, 0, 1));
    assert_eq!(s.plateau, Some(true));
    // kappa M >= 1 takes in a_101, which is 1e-4 > eps^{3/2} away
    let s = splitting_time(&series, 0.01, 1e-3, 0.01).unwrap();
    assert_eq!((s.m, s.l, s.plateau), (100, 1, Some(false)));
    // window past the end
    let s = splitting_time(&series, 0.01, 1e-3, 20.0).unwrap();
    assert_eq!(s.plateau, None);
    let neg = synthetic((0..=1000).map(|w| -(w as f64) * 1e-4).collect());
    assert_eq!(
      splitting_time(&neg, 0.01, 1e-3, 0.005).unwrap().shift_sign,
      -1
    );
  }

  #[test]
  fn boundary_distance_takes_the_closed_side() {
    let rot = golden();
    let q5 = rot.q_f64(5).unwrap();
    let d = 1.0 / (q5 * q5.ln());
    let y = pt(0.4);
    let y2 = y + CirclePoint::from_f64(d);
    assert_eq!((y2 - y).norm(), d);
    assert_eq!(variation_scale(&rot, d).unwrap(), 5);
    assert_eq!(variation_scale(&rot, d * (1.0 + 1e-12)).unwrap(), 4);
    assert_eq!(variation_scale(&rot, d * (1.0 - 1e-12)).unwrap(), 5);
  }

  #[test]
  fn cases() {
    let rot = golden();
    let th = |n: usize| {
      let q = rot.q_f64(n).unwrap();
      1.0 / (q * q.ln())
    };
    let x = pt(0.1);
    let y = pt(0.6);
    let at = |z: CirclePoint, n: usize| z + CirclePoint::from_f64(0.9 * th(n));
    let pts = DriftPoints {
      x,
      x2: at(x, 6),
      y,
      y2: at(y, 9),
    };
    let c = classify_case(&rot, &pts, 1.0, 2.0, 0.1).unwrap();
    assert_eq!(
      (c.x_scale, c.v_scale, c.case),
      (6, 9, ShearCase::Asynchronous)
    );
    let pts = DriftPoints {
      x,
      x2: at(x, 8),
      y,
      y2: at(y, 8),
    };
    let c = classify_case(&rot, &pts, 1.0, 2.0, 0.1).unwrap();
    assert_eq!(c.case, ShearCase::SecondOrder);
    let d = 0.9 * th(8);
    let want = 0.5 * 0.1 * (1.0 / d).min(rot.q_f64(9).unwrap());
    assert!((c.t - want).abs() < 1e-9 * want);
    let far = DriftPoints {
      x,
      x2: x + CirclePoint::from_f64(0.3),
      y,
      y2: y,
    };
    assert!(matches!(
      classify_case(&rot, &far, 1.0, 2.0, 0.1),
      Err(Error::ScaleOutOfRange(_))
    ));
  }
}
