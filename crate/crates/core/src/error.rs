use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
  #[error("insufficient precision: {0}")]
  InsufficientPrecision(String),
  #[error("rational input: expansion terminates after {0} quotients")]
  RationalInput(usize),
  #[error("index {index} exceeds the computed depth {depth}")]
  DepthExceeded { index: usize, depth: usize },
  #[error("{0} is not representable at this truncation depth")]
  NotRepresentable(String),
  #[error("invalid Ostrowski digits: {0}")]
  InvalidDigits(String),
  #[error("singular point: {0}")]
  SingularPoint(String),
  #[error("roof is not positive: {0}")]
  NonPositiveRoof(String),
  #[error("normalized roof is not positive")]
  NonPositiveAfterNormalize,
  #[error("orbit point {index} lies within {guard:e} of the singularity")]
  SingularOrbit { index: i64, guard: f64 },
  #[error("budget exceeded: {0}")]
  BudgetExceeded(String),
  #[error("hypothesis failed: {0}")]
  HypothesisFailed(String),
  #[error("scale out of range: {0}")]
  ScaleOutOfRange(String),
  #[error("invalid triple: {0}")]
  InvalidTriple(String),
  #[error("decomposition failed: {0}")]
  DecompositionFailed(String),
  #[error("sequence too short: need {needed}, have {have}")]
  SequenceTooShort { needed: usize, have: usize },
  #[error("invalid input: {0}")]
  InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
