//! Dynamic sequence-length selection for visual place recognition.
//!
//! Given per-image feature vectors for a query and a reference traverse,
//! this crate measures the appearance variation inside coarse position
//! priors ("chunks"), learns which variation features correlate with the
//! sequence length needed to hit a target Recall@1, and fits a small MLP
//! that predicts a per-chunk sequence length at inference time. Evaluation
//! utilities compare the dynamic strategy against fixed-length baselines
//! on a consistency-vs-latency basis.

pub mod ami;
pub mod dataio;
pub mod error;
pub mod eval;
pub mod regressor;
pub mod seqmatch;
pub mod synth;
pub mod variation;

pub use error::{Error, Result};
