//! Lower bound `max(|q j1 A^-2 - p j2 B^-2|, |q^2 j1 A^-3 - p^2 j2 B^-3|) >= K`
//! for small `A`, any `B != 0` and `j1, j2 in {U, V}`.
//!
//! Two routes are kept apart: a log grid over `A` and `B = +-C A`, and an
//! exact minimisation over `C` for each `A`, which works because both
//! expressions are monotone on either side of their zeros.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Relative tolerance for deciding that `p/q` is one of the excluded ratios.
const RATIO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
  pub a_points: usize,
  /// Ratios `C = B/A` per sign.
  pub c_points: usize,
  pub a_min: f64,
  pub a_max: f64,
  pub c_min: f64,
  pub c_max: f64,
}

impl Default for GridSpec {
  /// 1000 values of `A` times 2 x 500 values of `B`.
  fn default() -> Self {
    Self {
      a_points: 1000,
      c_points: 500,
      a_min: 1e-4,
      a_max: 10.0,
      c_min: 1e-3,
      c_max: 1e3,
    }
  }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
  if n == 1 {
    return vec![lo];
  }
  let (a, b) = (lo.ln(), hi.ln());
  (0..n)
    .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
  pub a: f64,
  pub b: f64,
  pub j1: f64,
  pub j2: f64,
  pub value: f64,
}

/// Both differences at one point.
pub fn differences(p: f64, q: f64, j1: f64, j2: f64, a: f64, b: f64) -> (f64, f64) {
  let e1 = (q * j1 / (a * a) - p * j2 / (b * b)).abs();
  let e2 = (q * q * j1 / (a * a * a) - p * p * j2 / (b * b * b)).abs();
  (e1, e2)
}

fn pairs(u: f64, v: f64) -> [(f64, f64); 4] {
  [(u, u), (u, v), (v, u), (v, v)]
}

/// Exact minimum over `B != 0` of the larger difference at fixed `A`.
///
/// With `B = C A` the differences are `|q j1 - p j2 C^-2| / A^2` and
/// `|q^2 j1 - p^2 j2 C^-3| / A^3`. Negative `C` only enlarges the second, and
/// on `C > 0` each is V-shaped around its zero, so the minimum sits where they
/// cross between the two zeros.
pub fn min_over_ratio(u: f64, v: f64, p: f64, q: f64, a: f64) -> GridPoint {
  let mut best = GridPoint {
    a,
    b: f64::NAN,
    j1: u,
    j2: u,
    value: f64::INFINITY,
  };
  for (j1, j2) in pairs(u, v) {
    let h = |c: f64| {
      let (e1, e2) = differences(p, q, j1, j2, a, c * a);
      (e1, e2)
    };
    let cu = (p * j2 / (q * j1)).sqrt();
    let cw = (p * p * j2 / (q * q * j1)).cbrt();
    let (lo, hi) = if cu <= cw { (cu, cw) } else { (cw, cu) };
    // sign of e1 - e2 at lo and hi decides whether a crossing is inside
    let gap = |c: f64| {
      let (e1, e2) = h(c);
      e1 - e2
    };
    let c = if gap(lo) * gap(hi) >= 0.0 {
      let vl = h(lo).0.max(h(lo).1);
      let vh = h(hi).0.max(h(hi).1);
      if vl <= vh {
        lo
      } else {
        hi
      }
    } else {
      let (mut l, mut r) = (lo.ln(), hi.ln());
      let sl = gap(lo).signum();
      for _ in 0..200 {
        let mid = 0.5 * (l + r);
        if gap(mid.exp()).signum() == sl {
          l = mid;
        } else {
          r = mid;
        }
      }
      (0.5 * (l + r)).exp()
    };
    let (e1, e2) = h(c);
    let value = e1.max(e2);
    if value < best.value {
      best = GridPoint {
        a,
        b: c * a,
        j1,
        j2,
        value,
      };
    }
  }
  best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow {
  pub grid_min: GridPoint,
  pub exact_min: GridPoint,
}

fn grid_row(u: f64, v: f64, p: f64, q: f64, a: f64, ratios: &[f64]) -> GridRow {
  let mut best = GridPoint {
    a,
    b: f64::NAN,
    j1: u,
    j2: u,
    value: f64::INFINITY,
  };
  for (j1, j2) in pairs(u, v) {
    for &c in ratios {
      for b in [c * a, -c * a] {
        let (e1, e2) = differences(p, q, j1, j2, a, b);
        let value = e1.max(e2);
        if value < best.value {
          best = GridPoint {
            a,
            b,
            j1,
            j2,
            value,
          };
        }
      }
    }
  }
  GridRow {
    grid_min: best,
    exact_min: min_over_ratio(u, v, p, q, a),
  }
}

fn close(x: f64, y: f64) -> bool {
  (x - y).abs() <= RATIO_TOL * x.abs().max(y.abs())
}

/// Largest difference along the family `j2/j1 = p/q`, `B = (p/q) A`, over `a_values`,
/// or `None` when no pair in `{U, V}` has that ratio.
pub fn excluded_family(u: f64, v: f64, p: f64, q: f64, a_values: &[f64]) -> Option<f64> {
  let (j1, j2) = pairs(u, v)
    .into_iter()
    .find(|&(j1, j2)| close(j2 * q, j1 * p))?;
  let worst = a_values
    .iter()
    .map(|&a| {
      let (e1, e2) = differences(p, q, j1, j2, a, p / q * a);
      e1.max(e2)
    })
    .fold(0.0, f64::max);
  Some(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinatorialReport {
  /// Whether `p/q` is one of `1, U/V, V/U`.
  pub excluded: bool,
  /// Largest `c` such that every grid `A <= 10c` has minimum at least `K`.
  pub threshold_c: Option<f64>,
  /// Grid minimum over `A <= 10c`.
  pub min_over_grid_of_max: f64,
  /// Exact-in-`B` minimum over the same `A`.
  pub exact_min: f64,
  /// First grid point with `A <= 10c` where the larger difference is below `K`.
  pub counterexample: Option<GridPoint>,
  /// Largest difference along the vanishing family, when excluded.
  pub family_residual: Option<f64>,
  pub points: usize,
  pub pass: bool,
}

pub fn combinatorial_search(
  u: f64,
  v: f64,
  p: f64,
  q: f64,
  k: f64,
  c: f64,
  grid: &GridSpec,
) -> CombinatorialReport {
  let a_values = log_grid(grid.a_min, grid.a_max, grid.a_points);
  let ratios = log_grid(grid.c_min, grid.c_max, grid.c_points);
  let rows: Vec<GridRow> = a_values
    .par_iter()
    .map(|&a| grid_row(u, v, p, q, a, &ratios))
    .collect();
  let row_min = |r: &GridRow| r.grid_min.value.min(r.exact_min.value);

  let first_bad = rows.iter().position(|r| row_min(r) < k);
  let threshold_c = match first_bad {
    None => Some(grid.a_max / 10.0),
    Some(0) => None,
    Some(i) => Some(a_values[i - 1] / 10.0),
  };

  let inside: Vec<&GridRow> = rows.iter().filter(|r| r.grid_min.a <= 10.0 * c).collect();
  let min_grid = inside
    .iter()
    .map(|r| r.grid_min.value)
    .fold(f64::INFINITY, f64::min);
  let min_exact = inside
    .iter()
    .map(|r| r.exact_min.value)
    .fold(f64::INFINITY, f64::min);
  let counterexample = inside.iter().find(|r| row_min(r) < k).map(|r| {
    if r.exact_min.value <= r.grid_min.value {
      r.exact_min
    } else {
      r.grid_min
    }
  });

  let ratio = p / q;
  let excluded = close(ratio, 1.0) || close(ratio, u / v) || close(ratio, v / u);
  let family_residual = if excluded {
    excluded_family(u, v, p, q, &a_values)
  } else {
    None
  };
  let pass = if excluded {
    family_residual.is_some_and(|r| r <= 1e-12)
  } else {
    counterexample.is_none()
  };
  CombinatorialReport {
    excluded,
    threshold_c,
    min_over_grid_of_max: min_grid,
    exact_min: min_exact,
    counterexample,
    family_residual,
    points: a_values.len() * ratios.len() * 2,
    pass,
  }
}
