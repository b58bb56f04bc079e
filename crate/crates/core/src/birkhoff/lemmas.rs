//! Verifiers for the growth estimates of Birkhoff sums of a logarithmic roof.
//!
//! Each verifier checks its hypotheses, computes the measured deviation and the
//! scale it is compared with, and reads the constant from a [`Constants`] table.
//! Missing constants default to 1 and the report is flagged uncalibrated.
//! The growth constant of `f'` sums is `A+ - A-` (see [`RoofSpec::growth_constant`]).

use super::calibrate::Constants;
use super::{birkhoff_prefix, birkhoff_sum, birkhoff_sums_all, SumMethod};
use crate::circle::{CirclePoint, Rotation};
use crate::error::{Error, Result};
use crate::orbit::{
  closest_return, range_min, sigma_membership, window_halfwidth, ClosestReturn, Method,
};
use crate::report::LemmaReport;
use crate::roof::{Roof, RoofSpec};
use crate::summation::CompensatedSum;
use serde::Serialize;

const SCALE_BUDGET: u64 = 10_000_000;

fn upper(id: &str, measured: f64, scale: f64, consts: &Constants) -> LemmaReport {
  let (c, cal) = consts.get_or(id, 1.0);
  LemmaReport::upper(id, measured, scale, c).calibrated(cal)
}

fn lower(id: &str, measured: f64, scale: f64, consts: &Constants) -> LemmaReport {
  let (c, cal) = consts.get_or(id, 1.0);
  LemmaReport::lower(id, measured, scale, c).calibrated(cal)
}

fn at(roof: &RoofSpec, z: CirclePoint, order: usize) -> f64 {
  roof.eval_xy(z.to_f64(), z.complement_f64(), order)
}

fn scale_q(rot: &Rotation, n: usize) -> Result<u64> {
  let q = rot.q(n)?;
  if q < 2 {
    return Err(Error::ScaleOutOfRange(format!("q_{n} = {q} is below 2")));
  }
  if q > SCALE_BUDGET {
    return Err(Error::BudgetExceeded(format!("q_{n} = {q}")));
  }
  Ok(q)
}

fn hyp(msg: String) -> Error {
  Error::HypothesisFailed(msg)
}

fn with_closest(
  r: LemmaReport,
  x: CirclePoint,
  n: usize,
  q: u64,
  cr: &ClosestReturn,
) -> LemmaReport {
  r.with_input("x", x.to_f64())
    .with_input("n", n as f64)
    .with_input("q_n", q as f64)
    .with_input("B", cr.b)
    .with_input("i", cr.i as f64)
}

/// Five estimates at the return time `q_n` for the normalised roof:
/// `f`, `f'` against the `(A+ - A-) q_n log q_n` drift, and `f'', f''', f''''`
/// against the term of the closest visit `x + i_{n,x} alpha`.
pub fn verify_special_times(
  roof: &RoofSpec,
  rot: &Rotation,
  x: CirclePoint,
  n: usize,
  consts: &Constants,
) -> Result<LemmaReport> {
  let f = roof.normalize()?;
  let q = scale_q(rot, n)?;
  let cr = closest_return(rot, x, n, Method::Accelerated)?;
  let s = birkhoff_sums_all(
    &Roof::Arnold(f.clone()),
    rot,
    x,
    q,
    SumMethod::OstrowskiBlocked,
  )?;
  let z = rot.point(x, cr.i as i64);
  let (qf, b) = (q as f64, cr.b);
  let lq = qf.ln();
  let mut subs = vec![
    upper("special-times.f", s[0] - qf, lq + b.ln().abs(), consts),
    upper(
      "special-times.f1",
      s[1] - f.growth_constant() * qf * lq,
      qf * (1.0 + 1.0 / b),
      consts,
    ),
  ];
  for j in 2..=4 {
    subs.push(upper(
      &format!("special-times.f{j}"),
      s[j] - at(&f, z, j),
      qf.powi(j as i32),
      consts,
    ));
  }
  let subs = subs
    .into_iter()
    .map(|r| with_closest(r, x, n, q, &cr))
    .collect();
  Ok(with_closest(
    LemmaReport::combine("special-times", subs),
    x,
    n,
    q,
    &cr,
  ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FBoundOptions {
  /// Check every `n <= T` instead of a geometric sample.
  pub exhaustive: bool,
  pub samples: usize,
}

impl Default for FBoundOptions {
  fn default() -> Self {
    FBoundOptions {
      exhaustive: false,
      samples: 200,
    }
  }
}

/// `|f^(n)(x) - n| < C T^(1/5)` for `n <= T` (normalised roof), when the orbit
/// `x + j alpha`, `j <= T`, avoids the window of half-width `1/(2 T log^4 T)`.
pub fn verify_f_bound(
  roof: &RoofSpec,
  rot: &Rotation,
  x: CirclePoint,
  t: u64,
  consts: &Constants,
  opts: FBoundOptions,
) -> Result<LemmaReport> {
  if !(3..=SCALE_BUDGET).contains(&t) {
    return Err(Error::ScaleOutOfRange(format!("T = {t}")));
  }
  let f = Roof::Arnold(roof.normalize()?);
  let tf = t as f64;
  let w = 1.0 / (2.0 * tf * tf.ln().powi(4));
  let m = range_min(rot, x, 0, t + 1, Method::Accelerated)?;
  if m.dist() <= w {
    return Err(hyp(format!(
      "orbit point {} lies within {w:e} of 0",
      m.index
    )));
  }
  let (worst_n, dev, checked) = if opts.exhaustive {
    let alpha = rot.alpha();
    let mut z = x;
    let mut acc = CompensatedSum::new();
    let (mut wn, mut wd) = (0u64, 0.0f64);
    for k in 1..=t {
      acc.add(f.eval_xy(z.to_f64(), z.complement_f64(), 0));
      z = z + alpha;
      let d = acc.value() - k as f64;
      if d.abs() > wd.abs() {
        (wn, wd) = (k, d);
      }
    }
    (wn, wd, t)
  } else {
    let mut cps: Vec<u64> = (0..opts.samples.max(2))
      .map(|k| tf.powf(k as f64 / (opts.samples.max(2) - 1) as f64).round() as u64)
      .collect();
    cps.extend(
      (0..=rot.cf().depth())
        .filter_map(|j| rot.q(j).ok())
        .filter(|&q| q <= t),
    );
    cps.push(t);
    cps.sort_unstable();
    cps.dedup();
    let sums = birkhoff_prefix(&f, rot, x, &cps, 0)?;
    let (mut wn, mut wd) = (0u64, 0.0f64);
    for (&c, s) in cps.iter().zip(sums) {
      let d = s - c as f64;
      if d.abs() > wd.abs() {
        (wn, wd) = (c, d);
      }
    }
    (wn, wd, cps.len() as u64)
  };
  Ok(
    upper("f-bound", dev, tf.powf(0.2), consts)
      .with_input("x", x.to_f64())
      .with_input("T", tf)
      .with_input("worst_n", worst_n as f64)
      .with_input("checked", checked as f64)
      .with_input("window", w)
      .with_input("min_dist", m.dist()),
  )
}

/// Sandwich `|f'^(r)(x) - (A+ - A-) r log r| <= eps^2 r log r` for
/// `eps^4 q_n <= r <= M q_{n+1}`, and `|f'^(r)(x)| < eps^2 q_n log q_n` below
/// that range, for `x` outside `Sigma_n(M)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_fprime_far(
  roof: &RoofSpec,
  rot: &Rotation,
  x: CirclePoint,
  r: u64,
  n: usize,
  m: f64,
  eps: f64,
  method: Method,
) -> Result<LemmaReport> {
  let sv = sigma_membership(rot, x, n, m, method)?;
  if sv.member {
    return Err(hyp(format!("x lies in Sigma_{n}({m})")));
  }
  let (q, q1) = (rot.q_f64(n)?, rot.q_f64(n + 1)?);
  let rf = r as f64;
  let s1 = birkhoff_sum(
    &Roof::Arnold(roof.clone()),
    rot,
    x,
    r as i64,
    1,
    SumMethod::OstrowskiBlocked,
  )?;
  let e2 = eps * eps;
  let report = if rf >= eps.powi(4) * q && rf <= m * q1 && r >= 2 {
    let rl = rf * rf.ln();
    LemmaReport::upper("fprime-far.main", s1 - roof.growth_constant() * rl, rl, e2)
      .with_input("ratio", s1 / rl)
  } else if rf <= eps.powi(4) * q {
    LemmaReport::upper("fprime-far.small", s1, q * q.ln(), e2)
  } else {
    return Err(hyp(format!("r = {r} exceeds M q_(n+1)")));
  };
  Ok(
    report
      .with_input("x", x.to_f64())
      .with_input("n", n as f64)
      .with_input("q_n", q)
      .with_input("r", rf)
      .with_input("M", m)
      .with_input("eps", eps),
  )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoodScaleInput {
  pub x: CirclePoint,
  pub n: usize,
  pub t: u64,
  pub r: u64,
  pub s: u64,
  pub m: f64,
  pub eps: f64,
}

/// Drift of `f'` sums at a time scale `q_n log q_n <= T < q_{n+1}`:
/// `|f'^(r)(x) - (A+ - A-) r log q_n| <= C T` for `r < B_{n,x} T / 2`, and the
/// short-difference bound for `|r - s| <= eps^3 B_{n,x} T`.
///
/// At such scales every point lies in `Sigma_n(M)` for `M >= 1`, so that
/// condition is recorded (`sigma_member`) but not enforced. The enforced
/// hypothesis is that `x + j alpha`, `j < T`, avoids the window of half-width
/// `1/(q_n log^(7/8) q_n)`.
pub fn verify_fprime_goodscale(
  roof: &RoofSpec,
  rot: &Rotation,
  inp: &GoodScaleInput,
  consts: &Constants,
  method: Method,
) -> Result<LemmaReport> {
  let GoodScaleInput {
    x,
    n,
    t,
    r,
    s,
    m,
    eps,
  } = *inp;
  let q = scale_q(rot, n)?;
  let q1 = rot.q_f64(n + 1)?;
  let (qf, tf) = (q as f64, t as f64);
  let lq = qf.ln();
  if !(qf * lq <= tf && tf < q1) {
    return Err(hyp(format!("T = {t} outside [q_n log q_n, q_(n+1))")));
  }
  if t > SCALE_BUDGET {
    return Err(Error::BudgetExceeded(format!("T = {t}")));
  }
  let cr = closest_return(rot, x, n, method)?;
  let b = cr.b;
  if !((r as f64) < b * tf / 2.0) || s >= t {
    return Err(hyp(format!(
      "r = {r} or s = {s} outside the admissible range"
    )));
  }
  if (r.abs_diff(s) as f64) > eps.powi(3) * b * tf {
    return Err(hyp("|r - s| exceeds eps^3 B T".to_string()));
  }
  let w = window_halfwidth(qf, 7.0 / 8.0)?;
  let near = range_min(rot, x, 0, t, method)?;
  if near.dist() <= w {
    return Err(hyp(format!(
      "orbit point {} enters the window {w:e}",
      near.index
    )));
  }
  let literal = sigma_membership(rot, x, n, m, method)?.member;
  let sums = birkhoff_prefix(&Roof::Arnold(roof.clone()), rot, x, &[r, s], 1)?;
  let kappa = roof.growth_constant();
  let canc = upper(
    "fprime-goodscale.canc",
    sums[0] - kappa * r as f64 * lq,
    tf,
    consts,
  );
  let dshort = sums[0] - sums[1] - kappa * (r as f64 - s as f64) * lq;
  let (c, cal) = consts.get_or("fprime-goodscale.short", eps * eps);
  let short = LemmaReport::upper("fprime-goodscale.short", dshort, tf, c)
    .calibrated(cal)
    .with_input("eps_eff", (dshort.abs() / tf).sqrt());
  let tag = |rep: LemmaReport| {
    with_closest(rep, x, n, q, &cr)
      .with_input("T", tf)
      .with_input("r", r as f64)
      .with_input("s", s as f64)
      .with_input("sigma_member", if literal { 1.0 } else { 0.0 })
  };
  let subs = vec![tag(canc), tag(short)];
  Ok(tag(LemmaReport::combine("fprime-goodscale", subs)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResonantTerm {
  /// `(r / q_j) max 1/||x + i alpha||`.
  Proportional,
  /// `max 1/||x + i alpha|| + 2 q_{j+1} log(r / q_j)`.
  Logarithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonantReport {
  pub j_r: usize,
  pub main_term: f64,
  pub r_term: f64,
  pub delta_term: f64,
  pub res_bound_1: f64,
  pub res_bound_2: f64,
  pub res_used: ResonantTerm,
  /// Index of the closest approach to 0 among `x + i alpha`, `i < r`.
  pub closest_index: i64,
  pub measured_residual: f64,
  pub report: LemmaReport,
}

/// Splits `f'^(r)(x) - (A+ - A-) r log q_{j_r}` against
/// `C (r + delta q_{j_r} log q_{j_r} + Res(x, r))`, with `q_{j_r} <= r < q_{j_r+1}`.
pub fn resonant_decomposition(
  roof: &RoofSpec,
  rot: &Rotation,
  x: CirclePoint,
  r: u64,
  delta: f64,
  consts: &Constants,
  method: Method,
) -> Result<ResonantReport> {
  if r < 2 {
    return Err(Error::ScaleOutOfRange(format!("r = {r}")));
  }
  if r > SCALE_BUDGET {
    return Err(Error::BudgetExceeded(format!("r = {r}")));
  }
  let cf = rot.cf();
  let j = (0..cf.depth())
    .take_while(|&j| rot.q(j + 1).map(|q| q <= r).unwrap_or(false))
    .count();
  let (qj, qj1) = (rot.q_f64(j)?, rot.q_f64(j + 1)?);
  let rf = r as f64;
  let s1 = birkhoff_sum(
    &Roof::Arnold(roof.clone()),
    rot,
    x,
    r as i64,
    1,
    SumMethod::OstrowskiBlocked,
  )?;
  let main_term = roof.growth_constant() * rf * qj.ln();
  let near = range_min(rot, x, 0, r, method)?;
  if near.dist_raw == 0 {
    return Err(Error::SingularOrbit {
      index: near.index,
      guard: 0.0,
    });
  }
  let max_inv = 1.0 / near.dist();
  let res_bound_1 = rf / qj * max_inv;
  let res_bound_2 = max_inv + 2.0 * qj1 * (rf / qj).ln();
  let (res, res_used) = if res_bound_1 <= res_bound_2 {
    (res_bound_1, ResonantTerm::Proportional)
  } else {
    (res_bound_2, ResonantTerm::Logarithmic)
  };
  let delta_term = delta * qj * qj.ln();
  let measured_residual = s1 - main_term;
  let report = upper("resonant", measured_residual, rf + delta_term + res, consts)
    .with_input("x", x.to_f64())
    .with_input("r", rf)
    .with_input("j_r", j as f64)
    .with_input("q_j", qj)
    .with_input("delta", delta)
    .with_input(
      "res_logarithmic",
      if res_used == ResonantTerm::Logarithmic {
        1.0
      } else {
        0.0
      },
    );
  Ok(ResonantReport {
    j_r: j,
    main_term,
    r_term: rf,
    delta_term,
    res_bound_1,
    res_bound_2,
    res_used,
    closest_index: near.index,
    measured_residual,
    report,
  })
}

struct KBlock {
  cr: ClosestReturn,
  z: CirclePoint,
}

fn k_block(rot: &Rotation, x: CirclePoint, n: usize, k: u64, kmax: f64) -> Result<KBlock> {
  scale_q(rot, n)?;
  let cr = closest_return(rot, x, n, Method::Accelerated)?;
  if k < 1 || k as f64 > kmax {
    return Err(hyp(format!("k = {k} outside [1, {kmax:.3}]")));
  }
  Ok(KBlock {
    cr,
    z: rot.point(x, cr.i as i64),
  })
}

/// For `B_{n,x} >= eps^(1/5)` and `1 <= k <= B^5 q_{n+1} / (6 q_n)`:
/// `|f^(j)(k q_n)(x) - k f^(j)(x + i alpha)| <= C k q_n^j`, `j = 2, 3, 4`.
pub fn verify_regular_derivatives(
  roof: &RoofSpec,
  rot: &Rotation,
  x: CirclePoint,
  n: usize,
  k: u64,
  eps: f64,
  consts: &Constants,
) -> Result<LemmaReport> {
  let q = scale_q(rot, n)?;
  let b = closest_return(rot, x, n, Method::Accelerated)?.b;
  if b < eps.powf(0.2) {
    return Err(hyp(format!("B = {b} below eps^(1/5)")));
  }
  let kmax = b.powi(5) * rot.q_f64(n + 1)? / (6.0 * q as f64);
  let kb = k_block(rot, x, n, k, kmax)?;
  let s = birkhoff_sums_all(
    &Roof::Arnold(roof.clone()),
    rot,
    x,
    k * q,
    SumMethod::OstrowskiBlocked,
  )?;
  let kf = k as f64;
  let subs = (2..=4)
    .map(|j| {
      let id = format!("higher-derivatives.regular.f{j}");
      let rep = upper(
        &id,
        s[j] - kf * at(roof, kb.z, j),
        kf * (q as f64).powi(j as i32),
        consts,
      );
      with_closest(rep, x, n, q, &kb.cr).with_input("k", kf)
    })
    .collect();
  Ok(LemmaReport::combine("higher-derivatives.regular", subs))
}

/// For `B_{n,x} < b_max` and `1 <= k <= B q_{n+1} / (6 q_n)`:
/// `c k |f^(j)(x + i alpha)| <= |f^(j)(k q_n)(x)| <= C k |f^(j)(x + i alpha)|`.
pub fn verify_dominated_derivatives(
  roof: &RoofSpec,
  rot: &Rotation,
  x: CirclePoint,
  n: usize,
  k: u64,
  b_max: f64,
  consts: &Constants,
) -> Result<LemmaReport> {
  let q = scale_q(rot, n)?;
  let b = closest_return(rot, x, n, Method::Accelerated)?.b;
  if b >= b_max {
    return Err(hyp(format!("B = {b} not below {b_max}")));
  }
  let kmax = b * rot.q_f64(n + 1)? / (6.0 * q as f64);
  let kb = k_block(rot, x, n, k, kmax)?;
  let s = birkhoff_sums_all(
    &Roof::Arnold(roof.clone()),
    rot,
    x,
    k * q,
    SumMethod::OstrowskiBlocked,
  )?;
  let kf = k as f64;
  let mut subs = Vec::new();
  for j in 2..=4 {
    let scale = kf * at(roof, kb.z, j).abs();
    let up = upper(
      &format!("higher-derivatives.dominated.f{j}.upper"),
      s[j].abs(),
      scale,
      consts,
    );
    let lo = lower(
      &format!("higher-derivatives.dominated.f{j}.lower"),
      s[j].abs(),
      scale,
      consts,
    );
    for rep in [up, lo] {
      subs.push(
        with_closest(rep, x, n, q, &kb.cr)
          .with_input("k", kf)
          .with_input("b_max", b_max),
      );
    }
  }
  Ok(LemmaReport::combine("higher-derivatives.dominated", subs))
}

/// For `q_n <= w <= max(B q_{n+1} / 4 - q_n, 0)`:
/// `|f''^(w)(x)| <= D (w / q_n) f''(x + i alpha)`.
pub fn verify_intermediate_f2(
  roof: &RoofSpec,
  rot: &Rotation,
  x: CirclePoint,
  n: usize,
  w: u64,
  consts: &Constants,
) -> Result<LemmaReport> {
  let q = scale_q(rot, n)?;
  let cr = closest_return(rot, x, n, Method::Accelerated)?;
  let wmax = (cr.b * rot.q_f64(n + 1)? / 4.0 - q as f64).max(0.0);
  if w < q || w as f64 > wmax {
    return Err(hyp(format!("w = {w} outside [q_n, {wmax:.1}]")));
  }
  let s = birkhoff_sum(
    &Roof::Arnold(roof.clone()),
    rot,
    x,
    w as i64,
    2,
    SumMethod::OstrowskiBlocked,
  )?;
  let z = rot.point(x, cr.i as i64);
  let scale = w as f64 / q as f64 * at(roof, z, 2);
  let rep = upper("higher-derivatives.intermediate", s.abs(), scale, consts);
  Ok(with_closest(rep, x, n, q, &cr).with_input("w", w as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HigherDerivativeInput {
  pub x: CirclePoint,
  pub n: usize,
  pub k: u64,
  pub w: u64,
  pub eps: f64,
  pub b_max: f64,
}

/// Runs whichever of the regular, dominated and intermediate checks have
/// their hypotheses met; fails only when none applies.
pub fn verify_higher_derivatives(
  roof: &RoofSpec,
  rot: &Rotation,
  inp: &HigherDerivativeInput,
  consts: &Constants,
) -> Result<LemmaReport> {
  let HigherDerivativeInput {
    x,
    n,
    k,
    w,
    eps,
    b_max,
  } = *inp;
  let attempts = [
    verify_regular_derivatives(roof, rot, x, n, k, eps, consts),
    verify_dominated_derivatives(roof, rot, x, n, k, b_max, consts),
    verify_intermediate_f2(roof, rot, x, n, w, consts),
  ];
  let mut subs = Vec::new();
  let mut reasons = Vec::new();
  for a in attempts {
    match a {
      Ok(r) => subs.push(r),
      Err(Error::HypothesisFailed(m)) => reasons.push(m),
      Err(e) => return Err(e),
    }
  }
  if subs.is_empty() {
    return Err(hyp(reasons.join("; ")));
  }
  Ok(LemmaReport::combine("higher-derivatives", subs))
}
