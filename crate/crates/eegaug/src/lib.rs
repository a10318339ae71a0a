//! Files, configuration, experiments and rendering on top of `eegaug-core`.

pub mod config;
mod error;
pub mod experiments;
pub mod formats;
pub mod render;

pub use error::{Error, Result};
