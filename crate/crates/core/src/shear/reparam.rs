//! Almost linear reparametrizations `t -> a(t)` of `[M, M+L]` and the bound
//! `(1/L) int f(a(t)) dt < (1/L) int f(s) ds + 9 xi / d` for `f` into `(0, 1]`.

use crate::error::{Error, Result};
use crate::report::LemmaReport;
use serde::{Deserialize, Serialize};

/// Step function into `(0, 1]`: `values[k]` on `[knots[k-1], knots[k])`,
/// with `values[0]` left of the first knot and the last value right of the last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepProbe {
  knots: Vec<f64>,
  values: Vec<f64>,
}

impl StepProbe {
  pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
    if values.len() != knots.len() + 1 {
      return Err(Error::InvalidInput(
        "a step probe needs one more value than knots".into(),
      ));
    }
    if knots.windows(2).any(|w| !(w[0] < w[1])) || knots.iter().any(|k| !k.is_finite()) {
      return Err(Error::InvalidInput(
        "probe knots must be finite and increasing".into(),
      ));
    }
    if values.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
      return Err(Error::InvalidInput(
        "probe values must lie in (0, 1]".into(),
      ));
    }
    Ok(Self { knots, values })
  }

  /// Indicator-like probe: `high` on `[a, b)`, `low` elsewhere.
  pub fn window(a: f64, b: f64, low: f64, high: f64) -> Result<Self> {
    Self::new(vec![a, b], vec![low, high, low])
  }

  pub fn eval(&self, s: f64) -> f64 {
    self.values[self.knots.partition_point(|&k| k <= s)]
  }

  /// `int_a^b f`, exact up to rounding of the overlap lengths.
  pub fn integral(&self, a: f64, b: f64) -> f64 {
    if b < a {
      return -self.integral(b, a);
    }
    let mut total = 0.0;
    let mut lo = a;
    let start = self.knots.partition_point(|&k| k <= a);
    for (k, &v) in self.values.iter().enumerate().skip(start) {
      let hi = self.knots.get(k).copied().unwrap_or(f64::INFINITY).min(b);
      if hi > lo {
        total += v * (hi - lo);
        lo = hi;
      }
      if hi >= b {
        break;
      }
    }
    total
  }
}

/// `a(t) = t + shift` on `(start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
  pub start: f64,
  pub end: f64,
  pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Reparam {
  /// Translations on disjoint pieces; `a(t) = t + gap_shift` off the pieces,
  /// where the bound does not constrain `a`.
  Pal { pieces: Vec<Piece>, gap_shift: f64 },
  /// Values of `a` on a uniform grid of `[M, M+L]`, linear in between.
  Sal { samples: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodTriple {
  pub m: f64,
  pub l: f64,
  pub d: f64,
  pub xi: f64,
  pub reparam: Reparam,
}

impl GoodTriple {
  pub fn validate(&self) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidTriple(m));
    let (m, l, d, xi) = (self.m, self.l, self.d, self.xi);
    if !(m.is_finite() && l > 0.0 && l.is_finite()) {
      return bad(format!("interval [{m}, {m}+{l}] is not proper"));
    }
    if !(d > 0.0 && d < 1.0 && xi > 0.0 && xi < 1.0) {
      return bad(format!("need d, xi in (0, 1), got d={d}, xi={xi}"));
    }
    match &self.reparam {
      Reparam::Pal { pieces, gap_shift } => {
        if pieces.is_empty() || !gap_shift.is_finite() {
          return bad("no pieces".into());
        }
        if pieces.len() as f64 > l / d {
          return bad(format!("{} pieces exceed |I|/d = {}", pieces.len(), l / d));
        }
        let mut prev = m;
        for p in pieces {
          if !(p.start >= prev && p.end > p.start && p.shift.is_finite()) {
            return bad(format!(
              "piece ({}, {}) overlaps or is empty",
              p.start, p.end
            ));
          }
          prev = p.end;
        }
        if prev > m + l {
          return bad("pieces leave the interval".into());
        }
        let covered: f64 = pieces.iter().map(|p| p.end - p.start).sum();
        if !(covered > (1.0 - xi) * l) {
          return bad(format!(
            "pieces cover {covered}, need more than {}",
            (1.0 - xi) * l
          ));
        }
        if pieces[0].shift.abs() > xi * l {
          return bad(format!("first shift {} exceeds xi |I|", pieces[0].shift));
        }
        if let Some(w) = pieces
          .windows(2)
          .find(|w| !((w[1].shift - w[0].shift).abs() < xi))
        {
          return bad(format!(
            "shift jump {} is not below xi",
            w[1].shift - w[0].shift
          ));
        }
      }
      Reparam::Sal { samples } => {
        if samples.len() < 2 || samples.iter().any(|v| !v.is_finite()) {
          return bad("need at least two finite samples".into());
        }
        let h = l / (samples.len() - 1) as f64;
        if (samples[0] - m).abs() > xi * l || (samples[samples.len() - 1] - (m + l)).abs() > xi * l
        {
          return bad("endpoint deviation exceeds xi |I|".into());
        }
        for w in samples.windows(2) {
          let slope = (w[1] - w[0]) / h;
          if !(slope > 1.0 - xi && slope <= 1.0 + xi) {
            return bad(format!("slope {slope} outside (1-xi, 1+xi]"));
          }
        }
      }
    }
    Ok(())
  }

  /// `(1/L) int_M^{M+L} f(a(t)) dt`, exact for the step probe.
  pub fn reparam_average(&self, f: &StepProbe) -> f64 {
    let (m, l) = (self.m, self.l);
    let total = match &self.reparam {
      Reparam::Pal { pieces, gap_shift } => {
        let mut sum = 0.0;
        let mut prev = m;
        for p in pieces {
          sum += f.integral(prev + gap_shift, p.start + gap_shift);
          sum += f.integral(p.start + p.shift, p.end + p.shift);
          prev = p.end;
        }
        sum + f.integral(prev + gap_shift, m + l + gap_shift)
      }
      Reparam::Sal { samples } => {
        let h = l / (samples.len() - 1) as f64;
        // substitute u = a(t) on each linear segment
        samples
          .windows(2)
          .map(|w| h / (w[1] - w[0]) * f.integral(w[0], w[1]))
          .sum()
      }
    };
    total / l
  }
}

/// Checks the almost-linear bound for a validated triple; the measured value
/// is the signed excess of the reparametrized average over the plain one.
pub fn almost_linear_check(triple: &GoodTriple, f: &StepProbe) -> Result<LemmaReport> {
  triple.validate()?;
  let lhs = triple.reparam_average(f);
  let rhs = f.integral(triple.m, triple.m + triple.l) / triple.l;
  let (kind, pieces) = match &triple.reparam {
    Reparam::Pal { pieces, .. } => (0.0, pieces.len()),
    Reparam::Sal { samples } => (1.0, samples.len()),
  };
  Ok(
    LemmaReport::signed("almost-linear", lhs - rhs, triple.xi / triple.d, 9.0)
      .with_input("M", triple.m)
      .with_input("L", triple.l)
      .with_input("d", triple.d)
      .with_input("xi", triple.xi)
      .with_input("sal", kind)
      .with_input("pieces", pieces as f64)
      .with_input("lhs", lhs)
      .with_input("rhs", rhs),
  )
}
