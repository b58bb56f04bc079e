//! Roofs `f(x) = A- (-ln x) + A+ (-ln(1 - x)) + g(x)` with `g` a trigonometric
//! polynomial, their derivatives up to order 4, truncations and variations.

use crate::circle::CirclePoint;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};

pub const MAX_ORDER: usize = 4;

/// `c0 + sum_k (c_k cos 2 pi k x + d_k sin 2 pi k x)`, `k = 1, 2, ...`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigPoly {
  #[serde(default)]
  pub c0: f64,
  #[serde(default)]
  pub cos_coeffs: Vec<f64>,
  #[serde(default)]
  pub sin_coeffs: Vec<f64>,
}

impl TrigPoly {
  pub fn constant(c: f64) -> Self {
    TrigPoly {
      c0: c,
      ..Default::default()
    }
  }

  pub fn degree(&self) -> usize {
    self.cos_coeffs.len().max(self.sin_coeffs.len())
  }

  fn coeff(v: &[f64], k: usize) -> f64 {
    v.get(k - 1).copied().unwrap_or(0.0)
  }

  /// `order`-th derivative at `x`.
  pub fn eval(&self, x: f64, order: usize) -> f64 {
    let mut s = if order == 0 { self.c0 } else { 0.0 };
    let phase = order as f64 * FRAC_PI_2;
    for k in 1..=self.degree() {
      let (c, d) = (
        Self::coeff(&self.cos_coeffs, k),
        Self::coeff(&self.sin_coeffs, k),
      );
      if c == 0.0 && d == 0.0 {
        continue;
      }
      let w = TAU * k as f64;
      let arg = w * x + phase;
      s += w.powi(order as i32) * (c * arg.cos() + d * arg.sin());
    }
    s
  }

  /// An antiderivative of the order-0 function.
  pub fn antiderivative(&self, x: f64) -> f64 {
    let mut s = self.c0 * x;
    for k in 1..=self.degree() {
      let w = TAU * k as f64;
      s += (Self::coeff(&self.cos_coeffs, k) * (w * x).sin()
        - Self::coeff(&self.sin_coeffs, k) * (w * x).cos())
        / w;
    }
    s
  }

  /// `sup |g^(order)|` bound `sum_k (2 pi k)^order (|c_k| + |d_k|)` (plus `|c0|` at order 0).
  pub fn derivative_bound(&self, order: usize) -> f64 {
    let mut s = if order == 0 { self.c0.abs() } else { 0.0 };
    for k in 1..=self.degree() {
      let w = TAU * k as f64;
      s += w.powi(order as i32)
        * (Self::coeff(&self.cos_coeffs, k).abs() + Self::coeff(&self.sin_coeffs, k).abs());
    }
    s
  }

  pub fn scaled(&self, c: f64) -> Self {
    TrigPoly {
      c0: self.c0 * c,
      cos_coeffs: self.cos_coeffs.iter().map(|v| v * c).collect(),
      sin_coeffs: self.sin_coeffs.iter().map(|v| v * c).collect(),
    }
  }

  /// Total variation of the `order`-th derivative over one period.
  pub fn variation(&self, order: usize) -> f64 {
    let n = 4000 * self.degree().max(1);
    let f = |x: f64| self.eval(x, order);
    let df = |x: f64| self.eval(x, order + 1);
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    monotone_variation(&f, &df, &grid)
  }
}

/// Variation of `f` over the span of `grid`, summing `|f|` increments between
/// consecutive zeros of `df` located by sign change and bisection.
pub(crate) fn monotone_variation(
  f: &dyn Fn(f64) -> f64,
  df: &dyn Fn(f64) -> f64,
  grid: &[f64],
) -> f64 {
  let mut knots = vec![grid[0]];
  let mut prev = df(grid[0]);
  for w in grid.windows(2) {
    let cur = df(w[1]);
    if prev != 0.0 && cur != 0.0 && (prev < 0.0) != (cur < 0.0) {
      let (mut a, mut b) = (w[0], w[1]);
      let sa = prev < 0.0;
      for _ in 0..80 {
        let m = 0.5 * (a + b);
        if (df(m) < 0.0) == sa {
          a = m;
        } else {
          b = m;
        }
      }
      knots.push(0.5 * (a + b));
    }
    if cur != 0.0 {
      prev = cur;
    }
  }
  knots.push(*grid.last().unwrap());
  knots.windows(2).map(|w| (f(w[1]) - f(w[0])).abs()).sum()
}

/// Logarithmic roof with asymmetric singular coefficients at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoofSpec {
  #[serde(rename = "A_minus")]
  pub a_minus: f64,
  #[serde(rename = "A_plus")]
  pub a_plus: f64,
  #[serde(flatten)]
  pub smooth: TrigPoly,
}

const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

impl RoofSpec {
  pub fn new(a_minus: f64, a_plus: f64, smooth: TrigPoly) -> Result<Self> {
    let r = RoofSpec {
      a_minus,
      a_plus,
      smooth,
    };
    r.validate()?;
    Ok(r)
  }

  /// `A- = 0.6`, `A+ = 0.3`, `g = 0.1`; integral 1.
  pub fn canonical() -> Self {
    RoofSpec {
      a_minus: 0.6,
      a_plus: 0.3,
      smooth: TrigPoly::constant(0.1),
    }
  }

  pub fn validate(&self) -> Result<()> {
    if !(self.a_minus > 0.0 && self.a_plus > 0.0) {
      return Err(Error::NonPositiveRoof("A- and A+ must be positive".into()));
    }
    if self.a_minus == self.a_plus {
      return Err(Error::InvalidInput("A- and A+ must differ".into()));
    }
    if !self.certify_positive() {
      return Err(Error::NonPositiveRoof(
        "f takes a non-positive value".into(),
      ));
    }
    Ok(())
  }

  /// Grid of 10^4 cells; on each cell the log parts are bounded below by
  /// monotonicity and `g` by its value minus width times `sup |g'|`. Cells that
  /// fail the bound are bisected.
  fn certify_positive(&self) -> bool {
    let g1 = self.smooth.derivative_bound(1);
    let lower = |a: f64, b: f64| {
      self.a_minus * -b.ln() + self.a_plus * -(1.0 - a).ln() + self.smooth.eval(a, 0) - (b - a) * g1
    };
    let mut stack: Vec<(f64, f64, u32)> = (0..10_000)
      .map(|i| (i as f64 / 1e4, (i + 1) as f64 / 1e4, 0))
      .collect();
    while let Some((a, b, depth)) = stack.pop() {
      if lower(a, b) > 0.0 {
        continue;
      }
      let m = 0.5 * (a + b);
      if self.eval_xy(m, 1.0 - m, 0) <= 0.0 || depth > 30 {
        return false;
      }
      stack.push((a, m, depth + 1));
      stack.push((m, b, depth + 1));
    }
    true
  }

  /// Growth constant of `f'` Birkhoff sums: `f'^(r)(x) ~ (A+ - A-) r ln r`.
  pub fn growth_constant(&self) -> f64 {
    self.a_plus - self.a_minus
  }

  /// Evaluation from `x` and `1 - x` supplied separately, so that both
  /// singular ends keep full relative precision.
  #[inline]
  pub fn eval_xy(&self, x: f64, y: f64, order: usize) -> f64 {
    let g = self.smooth.eval(x, order);
    if order == 0 {
      return -self.a_minus * x.ln() - self.a_plus * y.ln() + g;
    }
    let j = order as i32;
    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
    FACT[order - 1] * (sign * self.a_minus / x.powi(j) + self.a_plus / y.powi(j)) + g
  }

  pub fn eval(&self, x: CirclePoint, order: usize) -> Result<f64> {
    check_order(order)?;
    if x.raw() == 0 {
      return Err(Error::SingularPoint("x = 0".into()));
    }
    Ok(self.eval_xy(x.to_f64(), x.complement_f64(), order))
  }

  pub fn eval_f64(&self, x: f64, order: usize) -> Result<f64> {
    self.eval(CirclePoint::from_f64(x), order)
  }

  /// `A- + A+ + c0`.
  pub fn integral(&self) -> f64 {
    self.a_minus + self.a_plus + self.smooth.c0
  }

  pub fn scaled(&self, c: f64) -> Self {
    RoofSpec {
      a_minus: self.a_minus * c,
      a_plus: self.a_plus * c,
      smooth: self.smooth.scaled(c),
    }
  }

  pub fn normalize(&self) -> Result<Self> {
    let i = self.integral();
    if !(i > 0.0) {
      return Err(Error::NonPositiveAfterNormalize);
    }
    let r = self.scaled(1.0 / i);
    r.validate().map_err(|_| Error::NonPositiveAfterNormalize)?;
    Ok(r)
  }

  /// Antiderivative of `f` on `[0, 1]`, continuous at both ends.
  pub fn antiderivative(&self, x: f64) -> f64 {
    let xl = if x > 0.0 { x * x.ln() } else { 0.0 };
    let y = 1.0 - x;
    let yl = if y > 0.0 { y * y.ln() } else { 0.0 };
    self.a_minus * (x - xl) + self.a_plus * (yl + x) + self.smooth.antiderivative(x)
  }

  /// `int_a^b f` for `0 <= a <= b <= 1`.
  pub fn integral_between(&self, a: f64, b: f64) -> f64 {
    self.antiderivative(b) - self.antiderivative(a)
  }

  pub fn truncate(&self, q_n: u64, order: usize) -> Result<TruncatedRoof> {
    check_order(order)?;
    if q_n == 0 {
      return Err(Error::InvalidInput("q_n must be positive".into()));
    }
    Ok(TruncatedRoof {
      base: Roof::Arnold(self.clone()),
      q_n,
      order,
    })
  }
}

fn check_order(order: usize) -> Result<()> {
  if order > MAX_ORDER {
    return Err(Error::InvalidInput(format!(
      "derivative order {order} exceeds {MAX_ORDER}"
    )));
  }
  Ok(())
}

/// Either a logarithmic roof or a smooth positive trigonometric roof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Roof {
  Arnold(RoofSpec),
  Trig(TrigPoly),
}

impl Roof {
  pub fn constant(c: f64) -> Self {
    Roof::Trig(TrigPoly::constant(c))
  }

  #[inline]
  pub fn eval_xy(&self, x: f64, y: f64, order: usize) -> f64 {
    match self {
      Roof::Arnold(r) => r.eval_xy(x, y, order),
      Roof::Trig(t) => t.eval(x, order),
    }
  }

  pub fn eval(&self, x: CirclePoint, order: usize) -> Result<f64> {
    match self {
      Roof::Arnold(r) => r.eval(x, order),
      Roof::Trig(t) => {
        check_order(order)?;
        Ok(t.eval(x.to_f64(), order))
      }
    }
  }

  pub fn is_singular(&self) -> bool {
    matches!(self, Roof::Arnold(_))
  }

  pub fn integral(&self) -> f64 {
    match self {
      Roof::Arnold(r) => r.integral(),
      Roof::Trig(t) => t.c0,
    }
  }

  pub fn antiderivative(&self, x: f64) -> f64 {
    match self {
      Roof::Arnold(r) => r.antiderivative(x),
      Roof::Trig(t) => t.antiderivative(x),
    }
  }

  pub fn scaled(&self, c: f64) -> Self {
    match self {
      Roof::Arnold(r) => Roof::Arnold(r.scaled(c)),
      Roof::Trig(t) => Roof::Trig(t.scaled(c)),
    }
  }

  pub fn normalize(&self) -> Result<Self> {
    match self {
      Roof::Arnold(r) => r.normalize().map(Roof::Arnold),
      Roof::Trig(t) => {
        if !(t.c0 > 0.0) {
          return Err(Error::NonPositiveAfterNormalize);
        }
        Ok(Roof::Trig(t.scaled(1.0 / t.c0)))
      }
    }
  }

  pub fn truncate(&self, q_n: u64, order: usize) -> Result<TruncatedRoof> {
    check_order(order)?;
    Ok(TruncatedRoof {
      base: self.clone(),
      q_n,
      order,
    })
  }
}

impl From<RoofSpec> for Roof {
  fn from(r: RoofSpec) -> Self {
    Roof::Arnold(r)
  }
}

/// `f^(order)` outside `[-1/(4 q_n), 1/(4 q_n)]` and 0 inside.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedRoof {
  pub base: Roof,
  pub q_n: u64,
  pub order: usize,
}

impl TruncatedRoof {
  pub fn halfwidth(&self) -> f64 {
    0.25 / self.q_n as f64
  }

  fn inside(&self, x: CirclePoint) -> bool {
    // ||x|| <= 1/(4 q_n) decided in raw units
    let h = (crate::circle::TWO_128 * self.halfwidth()) as u128;
    x.norm_raw() <= h
  }

  pub fn eval(&self, x: CirclePoint) -> f64 {
    if self.inside(x) {
      0.0
    } else {
      self
        .base
        .eval_xy(x.to_f64(), x.complement_f64(), self.order)
    }
  }

  pub fn integral(&self) -> f64 {
    let h = self.halfwidth();
    if self.order == 0 {
      self.base.antiderivative(1.0 - h) - self.base.antiderivative(h)
    } else {
      let o = self.order - 1;
      self.base.eval_xy(1.0 - h, h, o) - self.base.eval_xy(h, 1.0 - h, o)
    }
  }

  /// Total variation on the circle: the monotone decomposition of `f^(order)`
  /// on `[h, 1 - h]` plus the two jumps at the window edges.
  pub fn variation(&self) -> f64 {
    let h = self.halfwidth();
    let o = self.order;
    let f = |x: f64| self.base.eval_xy(x, 1.0 - x, o);
    let df = |x: f64| self.base.eval_xy(x, 1.0 - x, o + 1);
    let grid = edge_refined_grid(h, 4000 * degree_of(&self.base).max(1));
    monotone_variation(&f, &df, &grid) + f(h).abs() + f(1.0 - h).abs()
  }

  /// Upper bound: exact variation of the logarithmic part on `[h, 1 - h]`
  /// (monotone pieces), the trigonometric bound `2 sum_k (2 pi k)^{order+1}(|c_k| + |d_k|)`,
  /// and the edge jumps.
  pub fn variation_bound(&self) -> f64 {
    let h = self.halfwidth();
    let o = self.order;
    let (log_part, trig) = match &self.base {
      Roof::Arnold(r) => {
        let pure = RoofSpec {
          a_minus: r.a_minus,
          a_plus: r.a_plus,
          smooth: TrigPoly::default(),
        };
        let f = |x: f64| pure.eval_xy(x, 1.0 - x, o);
        let df = |x: f64| pure.eval_xy(x, 1.0 - x, o + 1);
        (
          monotone_variation(&f, &df, &edge_refined_grid(h, 4000)),
          r.smooth.clone(),
        )
      }
      Roof::Trig(t) => (0.0, t.clone()),
    };
    // Var g^(o) on [0, 1] is at most sup |g^(o+1)|
    let trig_bound = trig.derivative_bound(o + 1);
    let f = |x: f64| self.base.eval_xy(x, 1.0 - x, o);
    log_part + trig_bound + f(h).abs() + f(1.0 - h).abs()
  }
}

fn degree_of(r: &Roof) -> usize {
  match r {
    Roof::Arnold(s) => s.smooth.degree(),
    Roof::Trig(t) => t.degree(),
  }
}

/// Uniform grid on `[h, 1 - h]` augmented with geometric points toward both ends.
fn edge_refined_grid(h: f64, n: usize) -> Vec<f64> {
  let mut g: Vec<f64> = (0..=n)
    .map(|i| h + (1.0 - 2.0 * h) * i as f64 / n as f64)
    .collect();
  let mut t = h;
  while t < 0.01 {
    g.push(t);
    g.push(1.0 - t);
    t *= 1.05;
  }
  g.sort_by(|a, b| a.partial_cmp(b).unwrap());
  g.dedup();
  g
}
