//! Experiment configuration: one TOML document, strictly validated.

use anyhow::{bail, Context, Result};
use arnold_core::birkhoff::{Constants, TEST_MAX_Q, TRAIN_MAX_Q};
use arnold_core::contfrac::{cf_expand, construct_alpha_in_d, AlphaSource};
use arnold_core::roof::RoofSpec;
use arnold_core::{ContinuedFraction, Rotation};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Checks the suite knows how to run, in emission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaId {
  #[serde(alias = "dk")]
  DenjoyKoksma,
  SpecialTimes,
  FBound,
  FprimeFar,
  FprimeGoodscale,
  Resonant,
  HigherDerivatives,
  FlowSemigroup,
  Rescaling,
  AlmostLinear,
}

impl LemmaId {
  pub const ALL: [LemmaId; 10] = [
    LemmaId::DenjoyKoksma,
    LemmaId::SpecialTimes,
    LemmaId::FBound,
    LemmaId::FprimeFar,
    LemmaId::FprimeGoodscale,
    LemmaId::Resonant,
    LemmaId::HigherDerivatives,
    LemmaId::FlowSemigroup,
    LemmaId::Rescaling,
    LemmaId::AlmostLinear,
  ];

  pub fn name(self) -> &'static str {
    match self {
      LemmaId::DenjoyKoksma => "denjoy-koksma",
      LemmaId::SpecialTimes => "special-times",
      LemmaId::FBound => "f-bound",
      LemmaId::FprimeFar => "fprime-far",
      LemmaId::FprimeGoodscale => "fprime-goodscale",
      LemmaId::Resonant => "resonant",
      LemmaId::HigherDerivatives => "higher-derivatives",
      LemmaId::FlowSemigroup => "flow-semigroup",
      LemmaId::Rescaling => "rescaling",
      LemmaId::AlmostLinear => "almost-linear",
    }
  }

  /// Constants fitted on small scales and frozen for the large ones.
  pub fn is_calibrated(self) -> bool {
    matches!(
      self,
      LemmaId::SpecialTimes
        | LemmaId::FBound
        | LemmaId::FprimeGoodscale
        | LemmaId::Resonant
        | LemmaId::HigherDerivatives
    )
  }

  /// Stream index for the seeded generator; fixed so that adding a check to
  /// the selection never changes the samples of another.
  pub fn stream(self) -> u64 {
    LemmaId::ALL.iter().position(|&l| l == self).unwrap() as u64
  }
}

impl fmt::Display for LemmaId {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_str(self.name())
  }
}

impl FromStr for LemmaId {
  type Err = anyhow::Error;

  fn from_str(s: &str) -> Result<Self> {
    let s = s.trim();
    if s == "dk" {
      return Ok(LemmaId::DenjoyKoksma);
    }
    LemmaId::ALL
      .iter()
      .copied()
      .find(|l| l.name() == s)
      .with_context(|| format!("unknown check `{s}`"))
  }
}

/// Rotation numbers: the named families, `constructed:GAP` for a witness of the
/// Diophantine class, or anything [`AlphaSource`] parses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlphaSpec {
  Golden,
  Silver,
  Constructed { gap: usize },
  Source(String),
}

impl AlphaSpec {
  pub fn continued_fraction(&self, depth: usize) -> Result<ContinuedFraction> {
    let cf = match self {
      AlphaSpec::Golden => ContinuedFraction::from_quotients(&vec![1; depth])?,
      AlphaSpec::Silver => cf_expand(
        &AlphaSource::Quadratic {
          a: -1,
          b: 1,
          d: 2,
          c: 1,
        },
        depth,
      )?,
      AlphaSpec::Constructed { gap } => construct_alpha_in_d(*gap, depth)?,
      AlphaSpec::Source(s) => cf_expand(&s.parse::<AlphaSource>()?, depth)?,
    };
    Ok(cf)
  }

  pub fn rotation(&self, depth: usize) -> Result<Rotation> {
    Ok(Rotation::new(&self.continued_fraction(depth)?)?)
  }
}

impl FromStr for AlphaSpec {
  type Err = anyhow::Error;

  fn from_str(s: &str) -> Result<Self> {
    let s = s.trim();
    Ok(match s {
      "golden" => AlphaSpec::Golden,
      "silver" => AlphaSpec::Silver,
      _ => match s.strip_prefix("constructed:") {
        Some(g) => AlphaSpec::Constructed {
          gap: g.trim().parse().context("witness gap")?,
        },
        None => {
          s.parse::<AlphaSource>()?;
          AlphaSpec::Source(s.to_string())
        }
      },
    })
  }
}

impl fmt::Display for AlphaSpec {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match self {
      AlphaSpec::Golden => f.write_str("golden"),
      AlphaSpec::Silver => f.write_str("silver"),
      AlphaSpec::Constructed { gap } => write!(f, "constructed:{gap}"),
      AlphaSpec::Source(s) => f.write_str(s),
    }
  }
}

impl Serialize for AlphaSpec {
  fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(self)
  }
}

impl<'de> Deserialize<'de> for AlphaSpec {
  fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Samples {
  /// Random base points per scale for the Birkhoff-sum checks.
  pub per_scale: usize,
  pub flow: usize,
  pub triples: usize,
}

impl Default for Samples {
  fn default() -> Self {
    Samples {
      per_scale: 10,
      flow: 100,
      triples: 1000,
    }
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
  /// Calibration uses scales up to this return time.
  pub train_max_q: f64,
  /// Frozen constants are tested on `(train_max_q, max_q]`.
  pub max_q: f64,
  /// Largest return time for the Denjoy-Koksma sweep.
  pub dk_max_q: f64,
}

impl Default for Budgets {
  fn default() -> Self {
    Budgets {
      train_max_q: TRAIN_MAX_Q,
      max_q: TEST_MAX_Q,
      dk_max_q: 1e5,
    }
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
  /// `M` in the window sets.
  pub m: f64,
  /// Tolerance of the far-from-singularity sandwich.
  pub far_eps: f64,
  /// Range parameter of the good-time-scale check.
  pub goodscale_eps: f64,
  pub delta: f64,
  /// Large quotient inserted at scale `n` for the higher-derivative checks.
  pub spike: u64,
  pub higher_eps: f64,
  pub b_max: f64,
  pub max_k: u64,
  /// Flow times are drawn from `[-flow_time, flow_time]`.
  pub flow_time: f64,
}

impl Default for Params {
  fn default() -> Self {
    Params {
      m: 1.0,
      far_eps: 0.9,
      goodscale_eps: 0.5,
      delta: 1.0,
      spike: 2000,
      higher_eps: 0.01,
      b_max: 0.5,
      max_k: 3,
      flow_time: 50.0,
    }
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
  pub dir: PathBuf,
  pub csv: String,
  pub json: String,
}

impl Default for Output {
  fn default() -> Self {
    Output {
      dir: PathBuf::from("out"),
      csv: "report.csv".into(),
      json: "summary.json".into(),
    }
  }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
  pub seed: u64,
  pub alpha: AlphaSpec,
  /// Partial quotients to expand.
  pub depth: usize,
  pub roof: RoofSpec,
  pub lemmas: Vec<LemmaId>,
  /// Per-check rotation overrides.
  pub alpha_override: BTreeMap<LemmaId, AlphaSpec>,
  pub samples: Samples,
  pub budgets: Budgets,
  pub params: Params,
  /// Frozen constants by report id; these replace calibrated values.
  pub calibration: Constants,
  pub output: Output,
}

impl Default for ExperimentConfig {
  fn default() -> Self {
    ExperimentConfig {
      seed: 1,
      alpha: AlphaSpec::Golden,
      depth: 40,
      roof: RoofSpec::canonical(),
      lemmas: Vec::new(),
      alpha_override: BTreeMap::new(),
      samples: Samples::default(),
      budgets: Budgets::default(),
      params: Params::default(),
      calibration: Constants::new(),
      output: Output::default(),
    }
  }
}

impl ExperimentConfig {
  pub fn from_toml(text: &str) -> Result<Self> {
    let cfg: ExperimentConfig = toml::from_str(text).context("config is invalid")?;
    cfg.validate()?;
    Ok(cfg)
  }

  pub fn load(path: &Path) -> Result<Self> {
    let text =
      std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
  }

  pub fn to_toml(&self) -> Result<String> {
    Ok(toml::to_string(self)?)
  }

  pub fn validate(&self) -> Result<()> {
    self.roof.validate().context("roof")?;
    if !(2..=200).contains(&self.depth) {
      bail!("depth {} outside 2..=200", self.depth);
    }
    let b = &self.budgets;
    if !(b.train_max_q >= 2.0 && b.train_max_q < b.max_q && b.max_q <= 1e8) {
      bail!("budgets need 2 <= train_max_q < max_q <= 1e8");
    }
    if !(b.dk_max_q >= 2.0 && b.dk_max_q <= 1e7) {
      bail!("dk_max_q must lie in [2, 1e7]");
    }
    let p = &self.params;
    for (name, v) in [
      ("far_eps", p.far_eps),
      ("goodscale_eps", p.goodscale_eps),
      ("higher_eps", p.higher_eps),
    ] {
      if !(v > 0.0 && v < 1.0) {
        bail!("params.{name} = {v} must lie in (0, 1)");
      }
    }
    if !(p.m > 0.0 && p.delta >= 0.0 && p.b_max > 0.0 && p.flow_time > 0.0) {
      bail!("params m, b_max and flow_time must be positive and delta non-negative");
    }
    if p.spike < 2 || p.max_k < 1 {
      bail!("params.spike must be at least 2 and params.max_k at least 1");
    }
    if let Some((k, v)) = self
      .calibration
      .0
      .iter()
      .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
      bail!("calibration constant {k} = {v} must be finite and non-negative");
    }
    self.alpha.continued_fraction(self.depth).context("alpha")?;
    for (l, a) in &self.alpha_override {
      a.continued_fraction(self.depth)
        .with_context(|| format!("alpha override for {l}"))?;
    }
    Ok(())
  }

  /// The selection in emission order, duplicates removed.
  pub fn selection(&self) -> Vec<LemmaId> {
    let mut v = self.lemmas.clone();
    v.sort();
    v.dedup();
    v
  }

  pub fn alpha_for(&self, lemma: LemmaId) -> &AlphaSpec {
    self.alpha_override.get(&lemma).unwrap_or(&self.alpha)
  }
}
