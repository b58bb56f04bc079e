//! 2x2 real matrices and the identities between the horocycle, geodesic and
//! opposite horocycle subgroups of `SL(2, R)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
  pub a: f64,
  pub b: f64,
  pub c: f64,
  pub d: f64,
}

impl Mat2 {
  pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
  /// Generator of the horocycle flow.
  pub const U: Mat2 = Mat2::new(0.0, 1.0, 0.0, 0.0);
  /// Generator of the opposite horocycle flow.
  pub const V: Mat2 = Mat2::new(0.0, 0.0, 1.0, 0.0);
  /// Generator of the geodesic flow.
  pub const X: Mat2 = Mat2::new(1.0, 0.0, 0.0, -1.0);

  pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
    Mat2 { a, b, c, d }
  }

  pub fn det(&self) -> f64 {
    self.a * self.d - self.b * self.c
  }

  /// Inverse through the adjugate; exact up to rounding when `det = 1`.
  pub fn inverse(&self) -> Self {
    let k = 1.0 / self.det();
    Mat2::new(self.d * k, -self.b * k, -self.c * k, self.a * k)
  }

  pub fn scale(&self, k: f64) -> Self {
    Mat2::new(self.a * k, self.b * k, self.c * k, self.d * k)
  }

  pub fn max_norm(&self) -> f64 {
    self
      .a
      .abs()
      .max(self.b.abs())
      .max(self.c.abs())
      .max(self.d.abs())
  }

  /// `exp(M)` for traceless `M`, via `exp(M) = cosh(l) I + sinh(l)/l M`
  /// where `l^2 = -det M`.
  pub fn exp_traceless(&self) -> Self {
    let l2 = -self.det();
    let (ch, sh) = if l2 > 0.0 {
      let l = l2.sqrt();
      (l.cosh(), l.sinh() / l)
    } else if l2 < 0.0 {
      let l = (-l2).sqrt();
      (l.cos(), l.sin() / l)
    } else {
      (1.0, 1.0)
    };
    Mat2::IDENTITY.scale(ch) + self.scale(sh)
  }
}

impl Mul for Mat2 {
  type Output = Mat2;
  fn mul(self, o: Mat2) -> Mat2 {
    Mat2::new(
      self.a * o.a + self.b * o.c,
      self.a * o.b + self.b * o.d,
      self.c * o.a + self.d * o.c,
      self.c * o.b + self.d * o.d,
    )
  }
}

impl Add for Mat2 {
  type Output = Mat2;
  fn add(self, o: Mat2) -> Mat2 {
    Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
  }
}

impl Sub for Mat2 {
  type Output = Mat2;
  fn sub(self, o: Mat2) -> Mat2 {
    Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
  }
}

/// `h_t`.
pub fn horocycle(t: f64) -> Mat2 {
  Mat2::new(1.0, t, 0.0, 1.0)
}

/// `g_s`.
pub fn geodesic(s: f64) -> Mat2 {
  Mat2::new(s.exp(), 0.0, 0.0, (-s).exp())
}

/// `v_r`.
pub fn opposite(r: f64) -> Mat2 {
  Mat2::new(1.0, 0.0, r, 1.0)
}

/// `|h_t g_s - g_s h_{e^{-2s} t}|_max`.
pub fn renorm_residual(t: f64, s: f64) -> f64 {
  let lhs = horocycle(t) * geodesic(s);
  let rhs = geodesic(s) * horocycle((-2.0 * s).exp() * t);
  (lhs - rhs).max_norm()
}

/// Tolerance on [`renorm_residual`].
pub fn renorm_contract(t: f64, s: f64) -> f64 {
  1e-10 * (1.0 + t.abs() * s.abs().exp())
}

/// `X Y^{-1} = h_vbar [[e^s, 0], [r, e^{-s}]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalCoords {
  pub vbar: f64,
  pub s: f64,
  pub r: f64,
  /// `|X Y^{-1} - h_vbar P|_max`.
  pub residual: f64,
}

impl LocalCoords {
  pub fn lower(&self) -> Mat2 {
    Mat2::new(self.s.exp(), 0.0, self.r, (-self.s).exp())
  }

  pub fn matrix(&self) -> Mat2 {
    horocycle(self.vbar) * self.lower()
  }
}

const COORD_TOL: f64 = 1e-10;

/// Solves `X Y^{-1} = h_vbar [[e^s, 0], [r, e^{-s}]]`: `r` is the lower left
/// entry, `e^{-s}` the lower right and `vbar = b e^s`.
pub fn local_coords(x: &Mat2, y: &Mat2) -> Result<LocalCoords> {
  let m = *x * y.inverse();
  if !(m.d > 0.0 && m.d.is_finite() && m.c.is_finite() && m.b.is_finite()) {
    return Err(Error::DecompositionFailed(format!(
      "lower right entry {} is not positive",
      m.d
    )));
  }
  let s = -m.d.ln();
  let mut out = LocalCoords {
    vbar: m.b * s.exp(),
    s,
    r: m.c,
    residual: 0.0,
  };
  out.residual = (m - out.matrix()).max_norm();
  if !(out.residual < COORD_TOL * m.max_norm().max(1.0)) {
    return Err(Error::DecompositionFailed(format!(
      "reconstitution residual {:e} (det {})",
      out.residual,
      m.det()
    )));
  }
  Ok(out)
}

/// `chi(t) = e^{-2s} t - e^{-3s} r t^2`.
pub fn chi_eval(s: f64, r: f64, t: f64) -> f64 {
  (-2.0 * s).exp() * t - (-3.0 * s).exp() * r * t * t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductIdentity {
  pub t: f64,
  /// `h_T (X Y^{-1}) h_{-chi(T)}`.
  pub lhs: Mat2,
  /// `h_vbar [[e^s + rT, v], [r, e^{-s} - r chi(T)]]` with `v = e^{-3s} r^2 T^3`.
  pub rhs: Mat2,
  pub v: f64,
  /// `|lhs - rhs|_max / |rhs|_max`.
  pub relative_residual: f64,
}

/// Pushes `X Y^{-1}` through `h_T` on the left and `h_{-chi(T)}` on the right.
pub fn product_identity(x: &Mat2, y: &Mat2, lc: &LocalCoords, t: f64) -> ProductIdentity {
  let (s, r) = (lc.s, lc.r);
  let chi = chi_eval(s, r, t);
  let lhs = horocycle(t) * (*x * y.inverse()) * horocycle(-chi);
  let v = (-3.0 * s).exp() * r * r * t * t * t;
  let inner = Mat2::new(s.exp() + r * t, v, r, (-s).exp() - r * chi);
  let rhs = horocycle(lc.vbar) * inner;
  let relative_residual = (lhs - rhs).max_norm() / rhs.max_norm();
  ProductIdentity {
    t,
    lhs,
    rhs,
    v,
    relative_residual,
  }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftQuadraticReport {
  /// `(T, chi(T) - T)` for each grid point.
  pub table: Vec<(f64, f64)>,
  /// First grid `T` with `|chi(T) - T| >= shift`.
  pub first_split: Option<f64>,
  /// Smallest positive root of `|chi(T) - T| = shift`.
  pub closed_form_split: Option<f64>,
  /// Largest `|(chi(T) - e^{-2s}T)/T^2 + e^{-3s} r|` over nonzero grid points;
  /// passes at `1e-10`.
  pub quadratic_residual: f64,
  pub pass: bool,
}

/// Relative slack on `|chi(T) - T| >= shift` so that a grid point sitting on
/// the exact root is not lost to rounding.
const SPLIT_SLACK: f64 = 1e-12;

/// Tabulates `chi(T) - T` over `t_grid` and compares the quadratic term with
/// its closed form.
pub fn drift_quadratic_check(s: f64, r: f64, t_grid: &[f64], shift: f64) -> DriftQuadraticReport {
  let table: Vec<(f64, f64)> = t_grid.iter().map(|&t| (t, chi_eval(s, r, t) - t)).collect();
  let first_split = table
    .iter()
    .find(|(_, g)| g.abs() >= shift * (1.0 - SPLIT_SLACK))
    .map(|&(t, _)| t);
  let coeff = (-3.0 * s).exp() * r;
  let quadratic_residual = t_grid
    .iter()
    .filter(|&&t| t != 0.0)
    .map(|&t| ((chi_eval(s, r, t) - (-2.0 * s).exp() * t) / (t * t) + coeff).abs())
    .fold(0.0, f64::max);
  let pass = quadratic_residual <= 1e-10;
  DriftQuadraticReport {
    table,
    first_split,
    closed_form_split: split_root(s, r, shift),
    quadratic_residual,
    pass,
  }
}

/// Smallest `T > 0` with `|(e^{-2s} - 1)T - e^{-3s} r T^2| = shift`.
pub fn split_root(s: f64, r: f64, shift: f64) -> Option<f64> {
  let a = -(-3.0 * s).exp() * r;
  let b = (-2.0 * s).exp() - 1.0;
  let mut best: Option<f64> = None;
  for target in [shift, -shift] {
    let roots: Vec<f64> = if a == 0.0 {
      if b == 0.0 {
        vec![]
      } else {
        vec![target / b]
      }
    } else {
      let disc = b * b + 4.0 * a * target;
      if disc < 0.0 {
        vec![]
      } else {
        let sq = disc.sqrt();
        // stable pair of roots of a T^2 + b T - target = 0
        let qv = -0.5 * (b + b.signum() * sq);
        let qv = if qv == 0.0 { -0.5 * sq } else { qv };
        let mut v = vec![qv / a];
        if qv != 0.0 {
          v.push(-target / qv);
        }
        v
      }
    };
    for t in roots.into_iter().filter(|&t| t > 0.0 && t.is_finite()) {
      best = Some(best.map_or(t, |b: f64| b.min(t)));
    }
  }
  best
}

#[cfg(test)]
mod tests {
  use super::*;
  use proptest::prelude::*;

  fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
    (*a - *b).max_norm() <= tol
  }

  #[test]
  fn generators() {
    assert_eq!(horocycle(0.0), Mat2::IDENTITY);
    let g = geodesic(2f64.ln());
    assert!(close(&g, &Mat2::new(2.0, 0.0, 0.0, 0.5), 1e-15));
    assert!((g.det() - 1.0).abs() < 1e-15);
    // one-parameter subgroups are exponentials of the algebra generators
    for t in [-1.5, 0.3, 2.0] {
      assert!(close(
        &Mat2::U.scale(t).exp_traceless(),
        &horocycle(t),
        1e-15
      ));
      assert!(close(
        &Mat2::V.scale(t).exp_traceless(),
        &opposite(t),
        1e-15
      ));
      assert!(close(
        &Mat2::X.scale(t).exp_traceless(),
        &geodesic(t),
        1e-12 * t.exp()
      ));
    }
  }

  #[test]
  fn det_survives_long_products() {
    let mut m = Mat2::IDENTITY;
    for k in 0..1000 {
      let x = (k as f64 * 0.7).sin();
      m = m
        * match k % 3 {
          0 => horocycle(0.05 * x),
          1 => geodesic(0.01 * x),
          _ => opposite(0.05 * x),
        };
    }
    assert!((m.det() - 1.0).abs() < 1e-12, "{}", m.det());
  }

  #[test]
  fn renormalization() {
    assert_eq!(renorm_residual(1.0, 0.0), 0.0);
    let s = 2f64.ln();
    let lhs = horocycle(1.0) * geodesic(s);
    assert!(close(&lhs, &Mat2::new(2.0, 0.5, 0.0, 0.5), 1e-15));
    assert!(renorm_residual(1.0, s) < 1e-15);
  }

  #[test]
  fn coords_of_equal_points() {
    let x = horocycle(0.3) * geodesic(0.2) * opposite(-0.4);
    let lc = local_coords(&x, &x).unwrap();
    assert!(lc.vbar.abs() < 1e-15 && lc.s.abs() < 1e-15 && lc.r.abs() < 1e-15);
    assert_eq!(chi_eval(0.0, 0.0, 3.5), 3.5);
  }

  #[test]
  fn coords_of_opposite_shift() {
    let y = horocycle(0.7) * geodesic(-0.1) * opposite(0.25);
    for k in [2.0, 10.0, 1e4] {
      let x = opposite(1.0 / k) * y;
      let lc = local_coords(&x, &y).unwrap();
      assert!(lc.vbar.abs() < 1e-12 && lc.s.abs() < 1e-12, "{lc:?}");
      assert!((lc.r - 1.0 / k).abs() < 1e-12);
    }
  }

  #[test]
  fn decomposition_failure() {
    let x = Mat2::new(0.0, 1.0, -1.0, 0.0);
    assert!(matches!(
      local_coords(&x, &Mat2::IDENTITY),
      Err(Error::DecompositionFailed(_))
    ));
    let bad = Mat2::new(2.0, 0.0, 0.0, 1.0);
    assert!(local_coords(&bad, &Mat2::IDENTITY).is_err());
  }

  #[test]
  fn quadratic_law() {
    let flat = drift_quadratic_check(0.1, 0.0, &[1.0, 10.0, 1e3], 1.0);
    assert!(flat.quadratic_residual == 0.0);
    let grid: Vec<f64> = (1..=200).map(f64::from).collect();
    let rep = drift_quadratic_check(0.0, 1e-4, &grid, 1.0);
    assert_eq!(rep.first_split, Some(100.0));
    assert!((rep.closed_form_split.unwrap() - 100.0).abs() < 1e-9);
    assert!(rep.pass && rep.quadratic_residual < 1e-10);
    let t1 = split_root(0.0, 1e-4, 1.0).unwrap();
    let t2 = split_root(0.0, 2e-4, 1.0).unwrap();
    assert!((t1 / t2 - 2f64.sqrt()).abs() < 1e-12);
    // with s != 0 the linear term competes
    let t = split_root(0.01, 1e-6, 1.0).unwrap();
    let g = chi_eval(0.01, 1e-6, t) - t;
    assert!((g.abs() - 1.0).abs() < 1e-9, "{g}");
  }

  proptest! {
    #[test]
    fn renorm_within_contract(t in -1e6..1e6f64, s in -50.0..50.0f64) {
      prop_assert!(renorm_residual(t, s) < renorm_contract(t, s));
    }

    #[test]
    fn product_identity_holds(
      h in -2.0..2.0f64, g in -1.0..1.0f64, o in -2.0..2.0f64,
      vbar in -1e-3..1e-3f64, s in -1e-3..1e-3f64, r in 1e-8..1e-3f64, neg in any::<bool>(),
      frac in -1.0..1.0f64,
    ) {
      let r = if neg { -r } else { r };
      let y = horocycle(h) * geodesic(g) * opposite(o);
      let p = horocycle(vbar) * Mat2::new(s.exp(), 0.0, r, (-s).exp());
      let x = p * y;
      let lc = local_coords(&x, &y).unwrap();
      prop_assert!(lc.residual < 1e-10);
      prop_assert!((lc.r - r).abs() < 1e-10 && (lc.s - s).abs() < 1e-10);
      let t = frac / r.abs().sqrt();
      let pi = product_identity(&x, &y, &lc, t);
      prop_assert!(pi.relative_residual < 1e-9, "{:?}", pi);
    }
  }
}
