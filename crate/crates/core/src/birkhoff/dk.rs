use crate::circle::{CirclePoint, Rotation};
use crate::error::{Error, Result};
use crate::report::LemmaReport;
use crate::roof::{TrigPoly, TruncatedRoof};
use crate::summation::CompensatedSum;

/// A function of bounded variation on the circle.
pub trait BoundedVariation: Sync {
  fn value(&self, x: CirclePoint) -> f64;
  fn mean(&self) -> f64;
  fn total_variation(&self) -> f64;
}

impl BoundedVariation for TruncatedRoof {
  fn value(&self, x: CirclePoint) -> f64 {
    self.eval(x)
  }

  fn mean(&self) -> f64 {
    self.integral()
  }

  fn total_variation(&self) -> f64 {
    self.variation()
  }
}

impl BoundedVariation for TrigPoly {
  fn value(&self, x: CirclePoint) -> f64 {
    self.eval(x.to_f64(), 0)
  }

  fn mean(&self) -> f64 {
    self.c0
  }

  fn total_variation(&self) -> f64 {
    self.variation(0)
  }
}

/// `|f^(q_n)(x) - q_n int f| <= 2 Var(f)`.
pub fn denjoy_koksma_check(
  f: &dyn BoundedVariation,
  rot: &Rotation,
  x: CirclePoint,
  n: usize,
) -> Result<LemmaReport> {
  let q = rot.q(n)?;
  if q > 10_000_000 {
    return Err(Error::BudgetExceeded(format!("q_{n} = {q}")));
  }
  let alpha = rot.alpha();
  let mut z = x;
  let mut s = CompensatedSum::new();
  for _ in 0..q {
    s.add(f.value(z));
    z = z + alpha;
  }
  let measured = s.value() - q as f64 * f.mean();
  Ok(
    LemmaReport::upper("denjoy-koksma", measured, f.total_variation(), 2.0)
      .with_input("x", x.to_f64())
      .with_input("n", n as f64)
      .with_input("q_n", q as f64),
  )
}
