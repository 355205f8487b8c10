use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::training::LossCurve;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A tensor or layer had the wrong width.
    Dimension {
        context: String,
        expected: usize,
        found: usize,
    },
    /// Two structures that must mirror each other do not.
    Consistency(String),
    /// NaN or infinity where a finite value is required.
    NonFinite {
        what: String,
        layer: Option<usize>,
    },
    InvalidArgument(String),
    EmptyBank {
        class: usize,
    },
    UnknownClass {
        class: usize,
        n_classes: usize,
    },
    Insufficient {
        class: usize,
        requested: usize,
        available: usize,
    },
    Divergence(Box<Divergence>),
    Format(String),
}

/// Training stopped because a loss left the finite range.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub iteration: usize,
    pub loss: &'static str,
    pub value: f64,
    /// Curve up to the last finite record.
    pub curve: LossCurve,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension {
                context,
                expected,
                found,
            } => write!(f, "dimension mismatch in {context}: expected {expected}, found {found}"),
            Error::Consistency(msg) => write!(f, "inconsistent structures: {msg}"),
            Error::NonFinite { what, layer } => match layer {
                Some(l) => write!(f, "non-finite value in {what} (layer {l})"),
                None => write!(f, "non-finite value in {what}"),
            },
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::EmptyBank { class } => write!(f, "class {class} has an empty anchor bank"),
            Error::UnknownClass { class, n_classes } => {
                write!(f, "label {class} outside [0, {n_classes})")
            }
            Error::Insufficient {
                class,
                requested,
                available,
            } => write!(
                f,
                "class {class}: requested {requested} samples but only {available} available"
            ),
            Error::Divergence(d) => write!(
                f,
                "training diverged at iteration {}: {} = {} (try a lower learning rate)",
                d.iteration, d.loss, d.value
            ),
            Error::Format(msg) => write!(f, "format error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn dim(context: impl Into<String>, expected: usize, found: usize) -> Error {
    Error::Dimension {
        context: context.into(),
        expected,
        found,
    }
}
