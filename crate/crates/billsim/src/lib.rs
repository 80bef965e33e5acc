//! Legislative-bill similarity toolkit.
//!
//! Implements the non-neural pipeline for measuring bill-to-bill text reuse:
//! subsection parsing, candidate-pair sampling, class-conditioned synthetic
//! pair generation, affine-gap local alignment with logistic-regression
//! classification, and aggregation of subsection labels into section- and
//! bill-level similarity scores.

pub mod aggregate;
pub mod align;
pub mod classify;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod io;
pub mod metrics;
pub mod report;
pub mod sampler;
pub mod synth;

pub use error::{Error, Result};
