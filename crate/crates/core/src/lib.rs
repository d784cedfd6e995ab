//! Target-level sentiment classification with a left-center-right separated
//! Bi-LSTM network and rotatory attention.
//!
//! The crate is organized bottom-up:
//!
//! - [`math`]: dense `f64` tensors and a tape-based reverse-mode autodiff
//!   graph.
//! - [`embeddings`]: frozen pretrained vectors with seeded OOV rows.
//! - [`corpus`]: the three-line placeholder corpus format, tokenization,
//!   left/target/right segmentation and dataset statistics.
//! - [`model`]: the network and its four ablation variants.
//! - [`training`]: loss, SGD with momentum, dropout, the epoch loop,
//!   finite-difference gradient checks and checkpoints.
//! - [`eval`]: prediction, accuracy, the majority baseline, paired t-tests
//!   and attention export.
//! - [`cli`]: the `lcr-rot` command-line front end.

pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod math;
pub mod model;
pub mod rng;
pub mod training;

pub use error::{Error, Result};
