//! Error type shared across the crate.

use thiserror::Error;

/// Errors returned by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation over a sequence received an empty sequence.
    #[error("input sequence is empty")]
    EmptyInput,

    /// A series is shorter than the model's minimum trainable length.
    #[error("series too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    /// A series value is NaN or infinite.
    #[error("non-finite value at index {index}")]
    NonFiniteData { index: usize },

    /// An objective evaluated to a non-finite value.
    #[error("objective is not finite{}", fmt_param(.param))]
    NonFiniteObjective { param: Option<usize> },

    /// The objective dropped below the divergence floor during optimization.
    #[error("objective diverged below the configured floor")]
    Divergence,

    /// A division by zero (or similar domain violation) inside a recursion.
    #[error("numeric domain error at step {step}: {what}")]
    NumericDomain { step: usize, what: &'static str },

    /// A denominator that must be nonzero evaluated to zero.
    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    /// A true value of zero where a percentage error is undefined.
    #[error("zero true value at index {index}")]
    ZeroTrueValue { index: usize },

    /// The model/request combination is not supported.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument violated a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The series is too short to cut the requested calibration windows.
    #[error("insufficient history: length {len} does not exceed {windows} windows x horizon {horizon}")]
    InsufficientHistory {
        len: usize,
        windows: usize,
        horizon: usize,
    },

    /// A calibration window's model fit failed.
    #[error("calibration window {window} failed: {source}")]
    WindowFit {
        window: usize,
        #[source]
        source: Box<Error>,
    },

    /// An element of a batched map failed.
    #[error("batch element {index} failed: {source}")]
    BatchElement {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

fn fmt_param(param: &Option<usize>) -> String {
    match param {
        Some(i) => format!(" (parameter index {i})"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
