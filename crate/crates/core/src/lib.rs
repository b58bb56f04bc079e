//! Special flows over irrational rotations under roofs with asymmetric
//! logarithmic singularities, and the quantitative estimates that govern them.
//!
//! The crate is organised bottom-up:
//! - [`contfrac`]: continued fractions, Ostrowski digits, Diophantine checks;
//! - [`circle`], [`orbit`]: fixed-point circle arithmetic and orbit queries;
//! - [`roof`]: the roof family and its derivatives;
//! - [`birkhoff`]: Birkhoff sums and estimate verifiers;
//! - [`specialflow`]: the flow itself;
//! - [`shear`], [`sl2`]: shearing diagnostics and matrix identities;
//! - [`mobius`]: Möbius statistics.

pub mod birkhoff;
pub mod circle;
pub mod contfrac;
pub mod error;
pub mod mobius;
pub mod orbit;
pub mod report;
pub mod roof;
pub mod shear;
pub mod sl2;
pub mod specialflow;
pub mod summation;

pub use circle::{dist_to_int, CirclePoint, Rotation};
pub use contfrac::ContinuedFraction;
pub use error::{Error, Result};
