use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Broad failure category, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad parameters or configuration.
    Config,
    /// Input data violates a precondition.
    Data,
    /// A numerical procedure failed (divergence, non-finite values).
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidConfig(String),
    InvalidIls { position: usize, message: String },
    InvalidScore(i32),
    SingleClass,
    EmptyInput(&'static str),
    WidthMismatch { expected: usize, actual: usize },
    LengthMismatch { left: usize, right: usize },
    EmptyLabeledSet { labeled: usize, ratio: f64 },
    BadFoldCount { k: usize, n: usize },
    DegenerateFold { fold: usize },
    ConstantDifferences,
    TooFewPairs(usize),
    Diverged { epoch: usize },
    SchemaMismatch { expected: usize, actual: usize },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidConfig(_) | Error::BadFoldCount { .. } => ErrorKind::Config,
            Error::Diverged { .. } | Error::ConstantDifferences => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InvalidIls { position, message } => {
                write!(f, "invalid ILS response at position {position}: {message}")
            }
            Error::InvalidScore(s) => {
                write!(f, "ILS score {s} is not an odd integer in [-11, 11]")
            }
            Error::SingleClass => write!(f, "cannot balance a single class: both poles must be present"),
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::WidthMismatch { expected, actual } => {
                write!(f, "row width mismatch: expected {expected} features, got {actual}")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::EmptyLabeledSet { labeled, ratio } => write!(
                f,
                "labeled ratio {ratio} of {labeled} labeled rows leaves no labeled rows"
            ),
            Error::BadFoldCount { k, n } => {
                write!(f, "fold count {k} invalid for {n} rows (need 2 <= k <= n)")
            }
            Error::DegenerateFold { fold } => write!(
                f,
                "training part of fold {fold} has a single class; enable stratification or lower k"
            ),
            Error::ConstantDifferences => write!(f, "t undefined for constant differences"),
            Error::TooFewPairs(n) => write!(f, "paired t-test needs at least 2 pairs, got {n}"),
            Error::Diverged { epoch } => write!(
                f,
                "loss became non-finite at epoch {epoch}; try a smaller learning rate"
            ),
            Error::SchemaMismatch { expected, actual } => {
                write!(f, "feature schema mismatch: expected {expected} features, got {actual}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
