//! Structured verdicts for estimate checks.

use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
  /// `|measured| <= bound`.
  Upper,
  /// `|measured| >= bound`.
  Lower,
  /// `measured <= bound`, sign kept.
  Signed,
}

/// One checked inequality. `bound = constant * scale`, and the check passes
/// exactly when `margin >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
  pub lemma_id: String,
  pub inputs: BTreeMap<String, f64>,
  pub measured: f64,
  pub scale: f64,
  pub constant: f64,
  pub bound: f64,
  pub margin: f64,
  pub pass: bool,
  pub kind: BoundKind,
  /// Set when the constant was frozen by calibration rather than given explicitly.
  pub calibrated: bool,
  #[serde(skip_serializing_if = "Vec::is_empty")]
  pub sub_reports: Vec<LemmaReport>,
}

impl LemmaReport {
  pub fn upper(id: impl Into<String>, measured: f64, scale: f64, constant: f64) -> Self {
    Self::build(id.into(), measured, scale, constant, BoundKind::Upper)
  }

  pub fn lower(id: impl Into<String>, measured: f64, scale: f64, constant: f64) -> Self {
    Self::build(id.into(), measured, scale, constant, BoundKind::Lower)
  }

  pub fn signed(id: impl Into<String>, measured: f64, scale: f64, constant: f64) -> Self {
    Self::build(id.into(), measured, scale, constant, BoundKind::Signed)
  }

  fn build(lemma_id: String, measured: f64, scale: f64, constant: f64, kind: BoundKind) -> Self {
    let bound = constant * scale;
    let margin = match kind {
      BoundKind::Upper => bound - measured.abs(),
      BoundKind::Lower => measured.abs() - bound,
      BoundKind::Signed => bound - measured,
    };
    LemmaReport {
      lemma_id,
      inputs: BTreeMap::new(),
      measured,
      scale,
      constant,
      bound,
      margin,
      pass: margin >= 0.0,
      kind,
      calibrated: false,
      sub_reports: Vec::new(),
    }
  }

  /// Parent report whose verdict is the conjunction of its children; its
  /// margin is the smallest child margin.
  pub fn combine(id: impl Into<String>, subs: Vec<LemmaReport>) -> Self {
    let worst = subs
      .iter()
      .min_by(|a, b| {
        a.margin
          .partial_cmp(&b.margin)
          .unwrap_or(std::cmp::Ordering::Less)
      })
      .cloned();
    let mut r = match worst {
      Some(w) => LemmaReport {
        lemma_id: String::new(),
        sub_reports: Vec::new(),
        ..w
      },
      None => LemmaReport::upper("", 0.0, 0.0, 0.0),
    };
    r.lemma_id = id.into();
    r.pass = subs.iter().all(|s| s.pass);
    r.sub_reports = subs;
    r
  }

  pub fn with_input(mut self, key: &str, value: f64) -> Self {
    self.inputs.insert(key.to_string(), value);
    self
  }

  pub fn calibrated(mut self, yes: bool) -> Self {
    self.calibrated = yes;
    self
  }

  /// `|measured| / scale`, the smallest constant that would make an upper bound pass.
  pub fn ratio(&self) -> f64 {
    if self.scale == 0.0 {
      if self.measured == 0.0 {
        0.0
      } else {
        f64::INFINITY
      }
    } else {
      self.measured.abs() / self.scale
    }
  }

  /// All leaf reports, depth first.
  pub fn leaves(&self) -> Vec<&LemmaReport> {
    if self.sub_reports.is_empty() {
      vec![self]
    } else {
      self.sub_reports.iter().flat_map(|s| s.leaves()).collect()
    }
  }
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn pass_iff_margin_nonnegative() {
    let r = LemmaReport::upper("t", -3.0, 2.0, 1.5);
    assert_eq!(r.margin, 0.0);
    assert!(r.pass);
    let l = LemmaReport::lower("t", 1.0, 2.0, 1.0);
    assert_eq!(l.margin, -1.0);
    assert!(!l.pass);
    let c = LemmaReport::combine("both", vec![r, l]);
    assert!(!c.pass);
    assert_eq!(c.margin, -1.0);
    assert_eq!(c.leaves().len(), 2);
  }
}
