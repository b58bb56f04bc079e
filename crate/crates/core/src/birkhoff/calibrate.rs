//! Two-phase constants: fit on small scales, freeze, then test on larger ones.

use crate::error::Result;
use crate::report::{BoundKind, LemmaReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Safety factor applied to the extreme training ratio.
pub const HEADROOM: f64 = 2.0;
/// Training instances use `q_n <= TRAIN_MAX_Q`.
pub const TRAIN_MAX_Q: f64 = 1e3;
/// Test instances use `TRAIN_MAX_Q < q_n <= TEST_MAX_Q`.
pub const TEST_MAX_Q: f64 = 1e6;

/// Frozen constants keyed by report id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Constants(pub BTreeMap<String, f64>);

impl Constants {
  pub fn new() -> Self {
    Self::default()
  }

  /// The frozen constant for `id`, or `fallback` when none is stored.
  pub fn get_or(&self, id: &str, fallback: f64) -> (f64, bool) {
    match self.0.get(id) {
      Some(&c) => (c, true),
      None => (fallback, false),
    }
  }

  pub fn insert(&mut self, id: impl Into<String>, c: f64) {
    self.0.insert(id.into(), c);
  }

  pub fn len(&self) -> usize {
    self.0.len()
  }

  pub fn is_empty(&self) -> bool {
    self.0.is_empty()
  }
}

/// Upper constants become `HEADROOM * max ratio`, lower ones `min ratio / HEADROOM`.
/// Ids listed in `skip` carry explicit constants and are left out.
pub fn calibrate(reports: &[LemmaReport], skip: &[&str]) -> Constants {
  let mut ext: BTreeMap<String, (BoundKind, f64)> = BTreeMap::new();
  for r in reports {
    for leaf in r.leaves() {
      if skip.contains(&leaf.lemma_id.as_str()) {
        continue;
      }
      let ratio = leaf.ratio();
      if !ratio.is_finite() {
        continue;
      }
      let e = ext
        .entry(leaf.lemma_id.clone())
        .or_insert((leaf.kind, ratio));
      e.1 = match leaf.kind {
        BoundKind::Upper | BoundKind::Signed => e.1.max(ratio),
        BoundKind::Lower => e.1.min(ratio),
      };
    }
  }
  Constants(
    ext
      .into_iter()
      .map(|(id, (kind, v))| {
        let c = match kind {
          BoundKind::Upper | BoundKind::Signed => HEADROOM * v,
          BoundKind::Lower => v / HEADROOM,
        };
        (id, c)
      })
      .collect(),
  )
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationOutcome {
  pub constants: Constants,
  pub train_reports: Vec<LemmaReport>,
  pub test_reports: Vec<LemmaReport>,
  /// Instances whose hypotheses failed, as `(phase, index, message)`.
  pub skipped: Vec<(String, usize, String)>,
}

impl CalibrationOutcome {
  /// Test leaves with a negative margin.
  pub fn failures(&self) -> Vec<&LemmaReport> {
    self
      .test_reports
      .iter()
      .flat_map(|r| r.leaves())
      .filter(|l| !l.pass)
      .collect()
  }

  pub fn worst_margin(&self) -> Option<f64> {
    self
      .test_reports
      .iter()
      .flat_map(|r| r.leaves())
      .map(|l| l.margin)
      .min_by(|a, b| a.total_cmp(b))
  }
}

/// Runs `verify` on the training instances with no stored constants, freezes
/// the fitted constants, and reruns on the test instances with them.
/// Instances whose hypotheses fail are recorded and skipped.
pub fn calibrate_then_test<I, F>(
  train: &[I],
  test: &[I],
  skip: &[&str],
  verify: F,
) -> Result<CalibrationOutcome>
where
  I: Sync,
  F: Fn(&I, &Constants) -> Result<LemmaReport> + Sync,
{
  let mut skipped = Vec::new();
  let mut run = |phase: &str, set: &[I], c: &Constants| -> Result<Vec<LemmaReport>> {
    let results: Vec<Result<LemmaReport>> = set.par_iter().map(|inst| verify(inst, c)).collect();
    let mut out = Vec::new();
    for (k, res) in results.into_iter().enumerate() {
      match res {
        Ok(r) => out.push(r),
        Err(e @ crate::Error::HypothesisFailed(_)) => {
          skipped.push((phase.into(), k, e.to_string()))
        }
        Err(e) => return Err(e),
      }
    }
    Ok(out)
  };
  let empty = Constants::new();
  let train_reports = run("train", train, &empty)?;
  let constants = calibrate(&train_reports, skip);
  let test_reports = run("test", test, &constants)?;
  Ok(CalibrationOutcome {
    constants,
    train_reports,
    test_reports,
    skipped,
  })
}

/// Smallest scale `n` from which every larger scale passes, given `(n, pass)` pairs.
pub fn smallest_passing_scale(results: &[(usize, bool)]) -> Option<usize> {
  let last_fail = results.iter().filter(|r| !r.1).map(|r| r.0).max();
  results
    .iter()
    .map(|r| r.0)
    .filter(|&n| last_fail.is_none_or(|f| n > f))
    .min()
}

#[cfg(test)]
mod tests {
  use super::*;

  #[test]
  fn fits_upper_and_lower() {
    let reports = vec![
      LemmaReport::upper("a", 3.0, 1.0, 1.0),
      LemmaReport::upper("a", -5.0, 2.0, 1.0),
      LemmaReport::lower("b", 4.0, 2.0, 1.0),
      LemmaReport::lower("b", 1.0, 1.0, 1.0),
      LemmaReport::upper("c", 1.0, 1.0, 0.5),
    ];
    let c = calibrate(&reports, &["c"]);
    assert_eq!(c.get_or("a", 0.0), (6.0, true));
    assert_eq!(c.get_or("b", 0.0), (0.5, true));
    assert_eq!(c.get_or("c", 0.25), (0.25, false));
  }

  #[test]
  fn frozen_constants_apply_to_test() {
    let train = vec![1.0, 2.0];
    let test = vec![3.0, 5.0];
    let out = calibrate_then_test(&train, &test, &[], |&v: &f64, c: &Constants| {
      let (k, cal) = c.get_or("lin", 1.0);
      Ok(LemmaReport::upper("lin", v, 1.0, k).calibrated(cal))
    })
    .unwrap();
    assert_eq!(out.constants.get_or("lin", 0.0).0, 4.0);
    assert_eq!(out.failures().len(), 1);
    assert_eq!(out.worst_margin(), Some(-1.0));
  }

  #[test]
  fn passing_threshold() {
    let r = [(3, false), (4, true), (5, false), (6, true), (7, true)];
    assert_eq!(smallest_passing_scale(&r), Some(6));
    assert_eq!(smallest_passing_scale(&[(1, true), (2, true)]), Some(1));
    assert_eq!(smallest_passing_scale(&[(1, true), (2, false)]), None);
    assert_eq!(
      smallest_passing_scale(&[(6, true), (6, false), (7, true)]),
      Some(7)
    );
  }
}
