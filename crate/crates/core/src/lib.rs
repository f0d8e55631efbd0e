//! Movement-to-trait pipeline: motion-capture marker takes to correntropy features, PCR and
//! Bayesian ridge trait regressors, cross-validated scores and per-joint importance profiles.

pub mod bench;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod importance;
pub mod mocap;
pub mod regression;
pub mod synth;

pub use error::{Error, Result};
