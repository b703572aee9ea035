//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, EvtError>;

#[derive(Debug, Error)]
pub enum EvtError {
    #[error("sample has zero spread ({n} identical points)")]
    DegenerateSample { n: usize },

    #[error("too few points: got {got}, need at least {min}")]
    TooFewPoints { got: usize, min: usize },

    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },

    #[error("series is empty")]
    EmptySeries,

    #[error("no complete bin: {available} post-burn-in samples, bin length {bin_length}")]
    NoCompleteBins { available: usize, bin_length: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no nontrivial fixed points: mu*nu = {product} is not in (0, 1/4)")]
    NoFixedPoints { product: f64 },

    #[error("potential is monostable for a = {a}, lambda = {lambda}")]
    Monostable { a: f64, lambda: f64 },

    #[error("simulation exceeded the overflow guard at step {step}")]
    Unstable { step: usize },

    #[error(
        "shape parameter of the minima never changes sign: range [{min}, {max}]"
    )]
    NoCrossing { min: f64, max: f64 },

    #[error("need at least two scan points with successful minima fits, got {got}")]
    InsufficientScan { got: usize },

    #[error("no bin length in the grid produced a fit")]
    AllRowsFailed,

    #[error("series '{label}' carries no control value")]
    MissingControlValue { label: String },

    #[error("duplicate control value {value}")]
    DuplicateControlValue { value: f64 },

    #[error("control grid must be non-empty and strictly monotone")]
    NonMonotoneGrid,

    #[error(
        "bin length {bin_length} with noise {epsilon} is not confined: \
         expected well escape within a single bin everywhere on the grid"
    )]
    NotConfined { bin_length: usize, epsilon: f64 },

    #[error("cannot open '{path}': {source}")]
    FileOpen {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write '{path}': {source}")]
    FileWrite {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: cannot parse '{field}' as a number")]
    BadRow {
        path: String,
        line: usize,
        field: String,
    },

    #[error("{path}:{line}: non-finite value")]
    NonFiniteRow { path: String, line: usize },

    #[error("'{path}' contains no data rows")]
    EmptyCsv { path: String },
}
