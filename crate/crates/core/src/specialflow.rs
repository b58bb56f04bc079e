//! The special flow under a roof over the rotation, its hit counts, and the
//! rescaling identities relating flows under `f` and `c f`.

use crate::birkhoff::{birkhoff_sum, Constants, SumMethod};
use crate::circle::{CirclePoint, Rotation};
use crate::error::{Error, Result};
use crate::orbit::{good_set_membership, GoodSet, Method};
use crate::report::LemmaReport;
use crate::roof::Roof;
use crate::summation::CompensatedSum;
use serde::{Deserialize, Serialize};

/// Partial sums closer than this (relative to `max(1, |t + s|)`) flag a boundary hit.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;
/// Tolerance of the flow identities.
pub const FLOW_TOLERANCE: f64 = 1e-8;
/// Longest orbit segment the flow will step through.
const HIT_BUDGET: u64 = 100_000_000;

/// A point `(z, r)` under the graph: `0 <= r < f(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowPoint {
  pub z: CirclePoint,
  pub r: f64,
}

impl FlowPoint {
  pub fn new(z: CirclePoint, r: f64) -> Self {
    FlowPoint { z, r }
  }

  pub fn check(&self, roof: &Roof) -> Result<()> {
    let top = roof.eval(self.z, 0)?;
    if !(self.r >= 0.0 && self.r < top) {
      return Err(Error::InvalidInput(format!(
        "height {} outside [0, f(z) = {top})",
        self.r
      )));
    }
    Ok(())
  }

  /// Distance on the circle in the base plus the height difference.
  pub fn distance(&self, o: &FlowPoint) -> f64 {
    (self.z - o.z).norm() + (self.r - o.r).abs()
  }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HitCount {
  /// The `n` with `f^(n)(x) <= t + s < f^(n+1)(x)`.
  pub n: i64,
  /// `f^(n)(x)`.
  pub partial_sum: f64,
  /// `t + s` lies within the boundary tolerance of `f^(n)(x)` or `f^(n+1)(x)`.
  pub ambiguous: bool,
}

fn roof_at(roof: &Roof, z: CirclePoint) -> Result<f64> {
  if roof.is_singular() && z.raw() == 0 {
    return Err(Error::SingularOrbit {
      index: 0,
      guard: 0.0,
    });
  }
  Ok(roof.eval_xy(z.to_f64(), z.complement_f64(), 0))
}

/// Walks from a known `(n, f^(n)(x))` to the `n` satisfying the sandwich.
/// Floating comparisons decide; of two candidates straddling a boundary the
/// smaller one is the one whose sandwich holds in floating point.
fn correct(
  roof: &Roof,
  rot: &Rotation,
  x: CirclePoint,
  target: f64,
  n0: i64,
  s0: f64,
) -> Result<HitCount> {
  let mut n = n0;
  let mut acc = CompensatedSum::new();
  acc.add(s0);
  let mut steps = 0u64;
  loop {
    steps += 1;
    if steps > HIT_BUDGET {
      return Err(Error::BudgetExceeded("hit-count correction".into()));
    }
    if acc.value() > target {
      n -= 1;
      acc.add(-roof_at(roof, rot.point(x, n))?);
      continue;
    }
    let f_n = roof_at(roof, rot.point(x, n))?;
    let mut next = acc;
    next.add(f_n);
    if next.value() <= target {
      acc = next;
      n += 1;
      continue;
    }
    let tol = BOUNDARY_TOLERANCE * target.abs().max(1.0);
    let ambiguous = (target - acc.value()).abs() <= tol || (next.value() - target).abs() <= tol;
    return Ok(HitCount {
      n,
      partial_sum: acc.value(),
      ambiguous,
    });
  }
}

/// Number of roof crossings `n(x, s, t)` for the flow started at `(x, s)` and run for time `t`.
pub fn hit_count(roof: &Roof, rot: &Rotation, x: CirclePoint, s: f64, t: f64) -> Result<HitCount> {
  FlowPoint::new(x, s).check(roof)?;
  let target = t + s;
  let mean = roof.integral();
  let est = (target / mean).floor();
  if est.abs() > HIT_BUDGET as f64 {
    return Err(Error::BudgetExceeded(format!("t = {t}")));
  }
  let n0 = est as i64;
  let s0 = birkhoff_sum(roof, rot, x, n0, 0, SumMethod::OstrowskiBlocked)?;
  correct(roof, rot, x, target, n0, s0)
}

/// Oracle for [`hit_count`]: steps one roof at a time from `n = 0`.
pub fn hit_count_incremental(
  roof: &Roof,
  rot: &Rotation,
  x: CirclePoint,
  s: f64,
  t: f64,
) -> Result<HitCount> {
  FlowPoint::new(x, s).check(roof)?;
  correct(roof, rot, x, t + s, 0, 0.0)
}

/// `R^f_t (z, r) = (z + n alpha, r + t - f^(n)(z))` with `n = n(z, r, t)`.
pub fn evolve(roof: &Roof, rot: &Rotation, p: FlowPoint, t: f64) -> Result<(FlowPoint, HitCount)> {
  let h = hit_count(roof, rot, p.z, p.r, t)?;
  let z = rot.point(p.z, h.n);
  let r = (p.r + t) - h.partial_sum;
  Ok((FlowPoint { z, r }, h))
}

/// Time change of the suspension (the flow under the roof 1) by a positive
/// function `v` of the base point: the state `(z, h)`, `0 <= h < 1`, moves to
/// `R_u(z, h)` where `int_0^u v(R_s(z, h)) ds = t`.
pub fn suspension_time_change(
  v: &Roof,
  rot: &Rotation,
  z: CirclePoint,
  h: f64,
  t: f64,
) -> Result<(CirclePoint, f64)> {
  if !(0.0..1.0).contains(&h) {
    return Err(Error::InvalidInput(format!(
      "suspension height {h} outside [0, 1)"
    )));
  }
  let mut z = z;
  let mut rest = t;
  let mut vz = roof_at(v, z)?;
  let mut steps = 0u64;
  if rest >= 0.0 {
    // cost of finishing the current fibre
    let mut cost = (1.0 - h) * vz;
    let mut h0 = h;
    while rest >= cost {
      rest -= cost;
      z = z + rot.alpha();
      vz = roof_at(v, z)?;
      cost = vz;
      h0 = 0.0;
      steps += 1;
      if steps > HIT_BUDGET {
        return Err(Error::BudgetExceeded("time change".into()));
      }
    }
    Ok((z, h0 + rest / vz))
  } else {
    let mut cost = h * vz;
    let mut top = h;
    while -rest > cost {
      rest += cost;
      z = z - rot.alpha();
      vz = roof_at(v, z)?;
      cost = vz;
      top = 1.0;
      steps += 1;
      if steps > HIT_BUDGET {
        return Err(Error::BudgetExceeded("time change".into()));
      }
    }
    Ok((z, top + rest / vz))
  }
}

fn suspension_distance(a: (CirclePoint, f64), b: (CirclePoint, f64)) -> f64 {
  (a.0 - b.0).norm() + (a.1 - b.1).abs()
}

/// Rescaling checks for the factor `c > 0`:
/// - conjugacy: `(z, r) -> (z, c r)` carries `R^f_{t/c}` to `R^{cf}_t`;
/// - time change: on the suspension, the time change by `c v` at time `t`
///   equals the time change by `v` at time `t/c`, for `v = f` and for `v = 1`;
/// - the time change of the suspension by `f` is the special flow under `f`.
pub fn verify_rescaling(
  roof: &Roof,
  rot: &Rotation,
  c: f64,
  p: FlowPoint,
  t: f64,
) -> Result<LemmaReport> {
  if !(c > 0.0) {
    return Err(Error::InvalidInput(format!("rescaling factor {c}")));
  }
  let cf = roof.scaled(c);
  let (a, _) = evolve(roof, rot, p, t / c)?;
  let (b, _) = evolve(&cf, rot, FlowPoint::new(p.z, c * p.r), t)?;
  let conj = FlowPoint::new(a.z, c * a.r).distance(&b);

  let h = p.r / roof_at(roof, p.z)?;
  let lhs = suspension_time_change(&cf, rot, p.z, h, t)?;
  let rhs = suspension_time_change(roof, rot, p.z, h, t / c)?;
  let tc = suspension_distance(lhs, rhs);

  let unit = Roof::constant(1.0);
  let lhs_c = suspension_time_change(&Roof::constant(c), rot, p.z, h, t)?;
  let rhs_c = suspension_time_change(&unit, rot, p.z, h, t / c)?;
  let tc_const = suspension_distance(lhs_c, rhs_c);

  let (sz, sh) = suspension_time_change(roof, rot, p.z, h, t)?;
  let (fp, _) = evolve(roof, rot, p, t)?;
  let susp = (sz - fp.z).norm() + (sh * roof_at(roof, sz)? - fp.r).abs();

  let tag = |r: LemmaReport| {
    r.with_input("c", c)
      .with_input("t", t)
      .with_input("x", p.z.to_f64())
      .with_input("s", p.r)
  };
  let subs = vec![
    tag(LemmaReport::upper(
      "rescaling.conjugacy",
      conj,
      1.0,
      FLOW_TOLERANCE,
    )),
    tag(LemmaReport::upper(
      "rescaling.time-change",
      tc,
      1.0,
      FLOW_TOLERANCE,
    )),
    tag(LemmaReport::upper(
      "rescaling.time-change-constant",
      tc_const,
      1.0,
      FLOW_TOLERANCE,
    )),
    tag(LemmaReport::upper(
      "rescaling.suspension",
      susp,
      1.0,
      FLOW_TOLERANCE,
    )),
  ];
  Ok(tag(LemmaReport::combine("rescaling", subs)))
}

/// Semigroup residual `|R_{t2}(R_{t1} p) - R_{t1+t2} p|`.
pub fn flow_property_residual(
  roof: &Roof,
  rot: &Rotation,
  p: FlowPoint,
  t1: f64,
  t2: f64,
) -> Result<f64> {
  let (a, _) = evolve(roof, rot, p, t1)?;
  let (b, _) = evolve(roof, rot, a, t2)?;
  let (c, _) = evolve(roof, rot, p, t1 + t2)?;
  Ok(b.distance(&c))
}

/// `|n(x, s, t) int f - t| < C |t|^(1/3)` for the normalised roof. Membership of
/// `x` in the intersection of the `E'(s)` sets from scale `s0` is reported
/// (`good`), not enforced.
pub fn verify_hit_linearity(
  roof: &Roof,
  rot: &Rotation,
  p: FlowPoint,
  t: f64,
  s0: usize,
  consts: &Constants,
) -> Result<LemmaReport> {
  if t.abs() < 1.0 {
    return Err(Error::HypothesisFailed(format!(
      "|t| = {} below 1",
      t.abs()
    )));
  }
  let f = roof.normalize()?;
  let mean = roof.integral();
  let p = FlowPoint::new(p.z, p.r / mean);
  let h = hit_count(&f, rot, p.z, p.r, t)?;
  let budget = (2.0 * t.abs()).clamp(1e4, 1e7) as u64;
  let good = good_set_membership(
    rot,
    p.z,
    GoodSet::EIntersection { s0 },
    budget,
    Method::Accelerated,
  )?;
  let (c, cal) = consts.get_or("hit-linearity", 1.0);
  Ok(
    LemmaReport::upper("hit-linearity", h.n as f64 - t, t.abs().cbrt(), c)
      .calibrated(cal)
      .with_input("x", p.z.to_f64())
      .with_input("s", p.r)
      .with_input("t", t)
      .with_input("n", h.n as f64)
      .with_input("good", if good.member { 1.0 } else { 0.0 })
      .with_input("ambiguous", if h.ambiguous { 1.0 } else { 0.0 }),
  )
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::contfrac::{construct_alpha_in_d, ContinuedFraction};
  use crate::roof::RoofSpec;
  use proptest::prelude::*;

  fn golden() -> Rotation {
    Rotation::new(&ContinuedFraction::from_quotients(&[1; 40]).unwrap()).unwrap()
  }

  fn canonical() -> Roof {
    Roof::Arnold(RoofSpec::canonical())
  }

  #[test]
  fn unit_roof_hits_are_floors() {
    let rot = golden();
    let one = Roof::constant(1.0);
    let x = CirclePoint::from_f64(0.2);
    assert_eq!(hit_count(&one, &rot, x, 0.0, 7.3).unwrap().n, 7);
    assert_eq!(hit_count(&one, &rot, x, 0.0, 0.0).unwrap().n, 0);
    assert_eq!(hit_count(&one, &rot, x, 0.5, -2.2).unwrap().n, -2);
    let (p, _) = evolve(&one, &rot, FlowPoint::new(x, 0.0), 2.5).unwrap();
    assert_eq!(p.z, rot.point(x, 2));
    assert!((p.r - 0.5).abs() < 1e-15);
  }

  #[test]
  fn zero_time_is_identity() {
    let rot = golden();
    let p = FlowPoint::new(CirclePoint::from_f64(0.37), 0.4);
    let (q, h) = evolve(&canonical(), &rot, p, 0.0).unwrap();
    assert_eq!(h.n, 0);
    assert_eq!(q, p);
  }

  #[test]
  fn invalid_heights_rejected() {
    let rot = golden();
    let x = CirclePoint::from_f64(0.5);
    assert!(hit_count(&canonical(), &rot, x, -0.1, 1.0).is_err());
    assert!(hit_count(&canonical(), &rot, x, 100.0, 1.0).is_err());
  }

  #[test]
  fn boundary_flag() {
    let rot = golden();
    let one = Roof::constant(1.0);
    let h = hit_count(&one, &rot, CirclePoint::from_f64(0.1), 0.0, 3.0).unwrap();
    assert_eq!(h.n, 3);
    assert!(h.ambiguous);
  }

  #[test]
  fn unit_roof_rescaling_by_hand() {
    // under f = 1 at time 1.5 and under 2f at time 3, (x, 0) reaches (x + alpha, 0.5) and (x + alpha, 1)
    let rot = golden();
    let one = Roof::constant(1.0);
    let x = CirclePoint::from_f64(0.3);
    let (a, _) = evolve(&one, &rot, FlowPoint::new(x, 0.0), 1.5).unwrap();
    let (b, _) = evolve(&Roof::constant(2.0), &rot, FlowPoint::new(x, 0.0), 3.0).unwrap();
    assert_eq!(a.z, rot.point(x, 1));
    assert_eq!(b.z, rot.point(x, 1));
    assert!((a.r - 0.5).abs() < 1e-15 && (b.r - 1.0).abs() < 1e-15);
    let r = verify_rescaling(&one, &rot, 2.0, FlowPoint::new(x, 0.0), 3.0).unwrap();
    assert!(r.pass);
  }

  #[test]
  fn identity_rescaling_has_zero_residual() {
    let rot = golden();
    let r = verify_rescaling(
      &canonical(),
      &rot,
      1.0,
      FlowPoint::new(CirclePoint::from_f64(0.71), 0.2),
      55.5,
    )
    .unwrap();
    assert_eq!(r.sub_reports[0].measured, 0.0);
    assert_eq!(r.sub_reports[1].measured, 0.0);
  }

  #[test]
  fn hit_linearity_unit_roof() {
    let rot = golden();
    let one = Roof::constant(1.0);
    for t in [1.5, 10.0, 999.9, -47.25] {
      let r = verify_hit_linearity(
        &one,
        &rot,
        FlowPoint::new(CirclePoint::from_f64(0.3), 0.0),
        t,
        6,
        &Constants::new(),
      )
      .unwrap();
      assert!(r.measured.abs() < 1.0);
    }
  }

  #[test]
  fn hit_linearity_backward_matches_cocycle() {
    let rot = Rotation::new(&construct_alpha_in_d(3, 30).unwrap()).unwrap();
    let roof = canonical();
    let x = CirclePoint::from_f64(0.4142);
    let f = roof.normalize().unwrap();
    let h = hit_count(&f, &rot, x, 0.0, -5000.0).unwrap();
    assert!(h.n < 0);
    let s = birkhoff_sum(&f, &rot, x, h.n, 0, SumMethod::NaiveCompensated).unwrap();
    let s1 = birkhoff_sum(&f, &rot, x, h.n + 1, 0, SumMethod::NaiveCompensated).unwrap();
    assert!(s <= -5000.0 && -5000.0 < s1);
  }

  proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn estimate_matches_incremental(xf in 0.001f64..0.999, frac in 0.0f64..0.999, t in -2e4f64..1e5) {
      let rot = golden();
      let roof = canonical();
      let x = CirclePoint::from_f64(xf);
      let s = frac * roof.eval(x, 0).unwrap();
      let a = hit_count(&roof, &rot, x, s, t);
      prop_assume!(a.is_ok());
      let b = hit_count_incremental(&roof, &rot, x, s, t).unwrap();
      prop_assert_eq!(a.unwrap().n, b.n);
    }

    #[test]
    fn semigroup(xf in 0.001f64..0.999, frac in 0.0f64..0.999, t1 in -1e3f64..1e3, t2 in -1e3f64..1e3) {
      let rot = golden();
      let roof = canonical();
      let x = CirclePoint::from_f64(xf);
      let p = FlowPoint::new(x, frac * roof.eval(x, 0).unwrap());
      let res = flow_property_residual(&roof, &rot, p, t1, t2);
      prop_assume!(res.is_ok());
      prop_assert!(res.unwrap() < FLOW_TOLERANCE);
      let (q, _) = evolve(&roof, &rot, p, t1).unwrap();
      prop_assert!(q.check(&roof).is_ok());
    }

    #[test]
    fn rescaling(xf in 0.001f64..0.999, frac in 0.0f64..0.999, t in -1e3f64..1e3, k in 0usize..3) {
      let rot = golden();
      let roof = canonical();
      let c = [0.5, std::f64::consts::PI / 3.0, 2.0][k];
      let x = CirclePoint::from_f64(xf);
      let p = FlowPoint::new(x, frac * roof.eval(x, 0).unwrap());
      let r = verify_rescaling(&roof, &rot, c, p, t);
      prop_assume!(r.is_ok());
      let r = r.unwrap();
      prop_assert!(r.pass, "{:?}", r);
    }
  }
}
