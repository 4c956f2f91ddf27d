//! Spread statistics for free-choice experiments.
//!
//! A subject ranks `n` objects, chooses between two of them, and ranks them
//! again. The spread measures how much the second ranking moved toward the
//! choice. This crate computes its exact expectation when subjects never
//! change their minds and rankings are perturbed by random adjacent swaps,
//! and simulates several experimental designs under that null model and under
//! alternatives.
//!
//! - [`ranking`]: rankings, comparison pairs and the spread statistic.
//! - [`noise`]: the swap process and its lumped transition matrices.
//! - [`exact`] and [`rational`]: exact expected spreads in floating point and
//!   in rational arithmetic.
//! - [`oracle`]: exhaustive enumerations over full rankings for small `n`.
//! - [`design`]: simulated experiments.
//! - [`stats`]: summaries, group comparisons and power estimates.

pub mod design;
pub mod error;
pub mod exact;
pub mod noise;
pub mod oracle;
pub mod ranking;
pub mod rational;
pub mod reference;
pub mod stats;

pub use error::{Error, Result};
