//! Gap-filling encoder-decoder session recommenders built on dilated
//! convolutions, with autoregressive baselines, a small reverse-mode
//! autodiff engine, data preparation and a top-N evaluation harness.

pub mod autodiff;
pub mod cli;
pub mod data;
pub mod error;
pub mod masking;
pub mod model;
pub mod train;

pub use error::{Error, Result};
