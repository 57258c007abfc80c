use thiserror::Error;

use crate::spectral::SpectrumReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input contains no flow records")]
    EmptyInput,

    #[error("record {record}: negative flow {flow} for {origin} -> {dest}")]
    NegativeFlow {
        record: usize,
        origin: String,
        dest: String,
        flow: f64,
    },

    #[error("record {record}: non-finite flow for {origin} -> {dest}")]
    NonFiniteFlow {
        record: usize,
        origin: String,
        dest: String,
    },

    #[error("record {record}: code {code:?} not present in the label set")]
    UnknownCode { record: usize, code: String },

    #[error("region code is empty")]
    EmptyCode,

    #[error("duplicate label {code:?}")]
    DuplicateLabel { code: String },

    #[error("matrix entry ({row},{col}) is negative: {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("matrix entry ({row},{col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("matrix has {n} rows but {labels} labels")]
    LabelCountMismatch { n: usize, labels: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("label mismatch at position {index}")]
    LabelMismatch { index: usize },

    #[error("buffer length {got} does not match expected {expected}")]
    BufferSize { expected: usize, got: usize },

    #[error("correlation undefined: matrix {side} is constant")]
    UndefinedCorrelation { side: &'static str },

    #[error("threshold must be non-negative, got {value}")]
    NegativeThreshold { value: f64 },

    #[error("tolerance must be positive, got {value}")]
    NonPositiveTolerance { value: f64 },

    #[error("row {index} has no positive entry")]
    ZeroRow { index: usize },

    #[error("column {index} has no positive entry")]
    ZeroColumn { index: usize },

    #[error("matrix power requires exponent >= 1")]
    ZeroPower,

    #[error("KL divergence undefined: entry ({row},{col}) is positive where the reference is zero")]
    KlSupportViolation { row: usize, col: usize },

    #[error("requested {k} eigenvalues from a {n} x {n} matrix")]
    KOutOfRange { k: usize, n: usize },

    #[error("eigenvalue iteration did not converge to the requested accuracy")]
    SpectralNotConverged { partial: Box<SpectrumReport> },

    #[error("inconsistent inputs: {what}")]
    InconsistentInputs { what: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("format error: {msg}")]
    Format { msg: String },
}
