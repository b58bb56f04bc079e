//! Benchmark fixtures shared by the criterion targets in `benches/`.

use arnold_core::contfrac::{construct_alpha_in_d, ContinuedFraction};
use arnold_core::roof::RoofSpec;

/// Golden-mean rotation, deep enough for return times past 10^8.
pub fn golden(depth: usize) -> ContinuedFraction {
  ContinuedFraction::from_quotients(&vec![1; depth]).expect("valid quotients")
}

/// Rotation from the Diophantine constructor with witnesses every third scale.
pub fn constructed(depth: usize) -> ContinuedFraction {
  construct_alpha_in_d(3, depth).expect("valid constructor input")
}

/// The roof used throughout the test suites: A- = 0.6, A+ = 0.3, c0 = 0.1.
pub fn canonical_roof() -> RoofSpec {
  RoofSpec::canonical()
}
