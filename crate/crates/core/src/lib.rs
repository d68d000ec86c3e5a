//! Editor-role mining from essay revision histories.
//!
//! Pipeline: [`corpus`] loads draft pairs, [`alignment`] extracts sentence
//! revisions, [`vocab`] encodes each editor as a bag of revision words,
//! [`lda`] learns roles, and [`validation`] checks them against purpose
//! counts and score improvement. [`synth`] generates corpora with known
//! roles for testing, and [`cli`] drives the `revroles` binary.

pub mod alignment;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod lda;
pub mod num;
pub mod stats;
pub mod synth;
pub mod validation;
pub mod vocab;

pub use error::{Error, Result};
pub use num::Real;

pub type Regression = stats::RegressionResult<f64>;
pub type RegressionF32 = stats::RegressionResult<f32>;
pub type Correlation = stats::Correlation<f64>;
pub type CorrelationF32 = stats::Correlation<f32>;
pub type PartialCorr = stats::PartialCorrResult<f64>;
