//! Compensated (Neumaier) accumulation.

use std::iter::Sum;

/// Running sum with an error-compensation term. Terms near the singularity
/// span many orders of magnitude, so plain accumulation would lose the small ones.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
  sum: f64,
  comp: f64,
}

impl CompensatedSum {
  pub fn new() -> Self {
    Self::default()
  }

  #[inline]
  pub fn add(&mut self, v: f64) {
    let t = self.sum + v;
    if self.sum.abs() >= v.abs() {
      self.comp += (self.sum - t) + v;
    } else {
      self.comp += (v - t) + self.sum;
    }
    self.sum = t;
  }

  pub fn merge(&mut self, other: &CompensatedSum) {
    self.add(other.sum);
    self.add(other.comp);
  }

  #[inline]
  pub fn value(&self) -> f64 {
    self.sum + self.comp
  }
}

impl Sum<f64> for CompensatedSum {
  fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
    let mut s = CompensatedSum::new();
    for v in iter {
      s.add(v);
    }
    s
  }
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn recovers_small_terms() {
    let mut s = CompensatedSum::new();
    s.add(1e16);
    for _ in 0..1000 {
      s.add(1.0);
    }
    s.add(-1e16);
    assert_eq!(s.value(), 1000.0);
  }

  #[test]
  fn merge_matches_sequential() {
    let v: Vec<f64> = (1..2000).map(|k| 1.0 / k as f64).collect();
    let all: CompensatedSum = v.iter().copied().sum();
    let mut a: CompensatedSum = v[..700].iter().copied().sum();
    let b: CompensatedSum = v[700..].iter().copied().sum();
    a.merge(&b);
    assert!((a.value() - all.value()).abs() < 1e-15);
  }
}
