//! Numeric core for conditional-GAN data augmentation of motor-imagery EEG.
//!
//! Everything here is `no_std` + `alloc`: wavelet time–frequency analysis,
//! a small reverse-mode tensor engine, the conditional DCGAN and the CNN
//! classifier. File formats, configuration and the command line live in the
//! `eegaug` crate.
#![no_std]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cdcgan;
pub mod classifier;
pub mod data;
mod error;
pub mod numerics;
pub mod preprocess;
pub mod rng;
pub mod wavelet;

pub use error::{Error, Result};
