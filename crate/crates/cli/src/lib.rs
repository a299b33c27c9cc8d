//! Command implementations behind the `twinpp` binary.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod output;

pub use checkpoint::{Checkpoint, Predictor, CHECKPOINT_FORMAT_VERSION};
pub use config::{Baseline, RunConfig, Variant};

/// Shown by `--version`.
pub const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (checkpoint format 1, sample format 1)"
);
