//! Experiment driver for `arnold-core`: configuration, seeded instance
//! generation, suites with calibrate-then-freeze constants, and the
//! single-shot subcommands of the `arnold` binary.

pub mod commands;
pub mod config;
pub mod sampling;
pub mod suite;

pub use config::{AlphaSpec, ExperimentConfig, LemmaId};
pub use suite::{
  run_suite, run_suite_with_workers, write_outputs, Format, Row, SuiteOutcome, Summary,
};
