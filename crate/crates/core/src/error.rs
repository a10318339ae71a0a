use alloc::string::String;
use core::fmt;

use crate::data::Label;

/// Errors produced by the numeric core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Tensor shapes do not line up; the message names the offending axes.
    Shape(String),
    /// A caller-supplied argument is outside its valid domain.
    InvalidArgument(String),
    /// A class index outside `[0, classes)`.
    LabelOutOfRange { label: usize, classes: usize },
    /// Channel rows of one trial have different lengths.
    LengthMismatch {
        trial_id: u32,
        channel: String,
        expected: usize,
        found: usize,
    },
    /// A requested time window does not lie inside the recording.
    WindowOutOfBounds { t0_s: f64, t1_s: f64, duration_s: f64 },
    /// A non-finite value was found where only finite values are allowed.
    NonFiniteValue(String),
    /// A class has fewer samples than a draw requires.
    InsufficientSamples {
        label: Label,
        requested: usize,
        available: usize,
    },
    /// A class has no samples at all.
    EmptyClass(Label),
    /// Training produced a non-finite loss.
    Diverged {
        stage: &'static str,
        step: usize,
        loss: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape(msg) => write!(f, "shape mismatch: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::LabelOutOfRange { label, classes } => {
                write!(f, "label {label} out of range for {classes} classes")
            }
            Error::LengthMismatch {
                trial_id,
                channel,
                expected,
                found,
            } => write!(
                f,
                "trial {trial_id}: channel {channel} has {found} samples, expected {expected}"
            ),
            Error::WindowOutOfBounds { t0_s, t1_s, duration_s } => write!(
                f,
                "window [{t0_s}, {t1_s}) s is outside the recording of {duration_s} s"
            ),
            Error::NonFiniteValue(what) => write!(f, "non-finite value in {what}"),
            Error::InsufficientSamples {
                label,
                requested,
                available,
            } => write!(
                f,
                "class {label:?}: requested {requested} samples but only {available} available (short by {})",
                requested - available
            ),
            Error::EmptyClass(label) => write!(f, "class {label:?} has no samples"),
            Error::Diverged { stage, step, loss } => {
                write!(f, "{stage}: non-finite loss {loss} at step {step}")
            }
        }
    }
}

#[cfg(feature = "std")]
extern crate std;

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
