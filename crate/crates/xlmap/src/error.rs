//! Crate-wide error type.
//!
//! Every fallible operation returns one of these variants. The variant name is
//! part of the contract: command-line tools print it verbatim on the diagnostic
//! stream, and [`Error::category`] groups variants into the exit-code classes
//! used by the `xlmap` binary (data-format vs. numeric failures).

use thiserror::Error;

/// What broad class an error belongs to, for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Malformed or inconsistent input data (files, shapes, empty inputs).
    DataFormat,
    /// A numeric computation failed or its preconditions do not hold.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    // ── matrices and the Procrustes solver ──────────────────────────
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("SVD iteration failed to converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("shape mismatch: {context} (left {left_rows}x{left_cols}, right {right_rows}x{right_cols})")]
    ShapeMismatch {
        context: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix is not orthogonal (max residual {residual:e})")]
    NotOrthogonal { residual: f64 },

    // ── loaders ─────────────────────────────────────────────────────
    #[error("bad header: {detail}")]
    BadHeader { detail: String },
    #[error("dimension mismatch at line {line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at line {line}")]
    NonFiniteValue { line: usize },
    #[error("gap in sentence index at line {line}: expected {expected}, found {found}")]
    GapInSentenceIndex {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line count mismatch: source has {source_lines} lines, target has {target_lines}")]
    LineCountMismatch { source_lines: usize, target_lines: usize },
    #[error("malformed line {line}: {detail}")]
    MalformedLine { line: usize, detail: String },
    #[error("unexpected end of input at line {line}")]
    UnexpectedEof { line: usize },
    #[error("trailing data at line {line}")]
    TrailingData { line: usize },

    // ── alignment and dictionaries ──────────────────────────────────
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("dictionary is empty after filtering")]
    EmptyDictionary,
    #[error("dimension mismatch: source dimension {source_dim} != target dimension {target_dim}")]
    DimMismatch { source_dim: usize, target_dim: usize },
    #[error("sentence index {index} out of range ({len} sentences)")]
    SentenceIndexOutOfRange { index: usize, len: usize },

    // ── sentence embedding ──────────────────────────────────────────
    #[error("invalid parameter: {detail}")]
    InvalidParameter { detail: String },
    #[error("all tokens out of vocabulary")]
    AllTokensOov,
    #[error("sentence has no tokens")]
    EmptySentence,

    // ── mapping ─────────────────────────────────────────────────────
    #[error("zero-norm column {index} cannot be normalized")]
    ZeroNormColumn { index: usize },
    #[error("pivot mismatch: maps target different spaces ({left} vs {right})")]
    PivotMismatch { left: String, right: String },

    // ── evaluation ──────────────────────────────────────────────────
    #[error("gold standard is empty")]
    EmptyGold,
    #[error("too few scorable pairs ({found}, need at least {needed})")]
    TooFewPairs { found: usize, needed: usize },
    #[error("correlation undefined: {side} scores are constant")]
    ConstantScores { side: &'static str },
    #[error("constant input: correlation undefined")]
    ConstantInput,
    #[error("split size {size} exceeds corpus size {corpus}")]
    SizeExceedsCorpus { size: usize, corpus: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// The variant name, printed on diagnostics so scripts can match on it.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonFinite => "NonFinite",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::NotOrthogonal { .. } => "NotOrthogonal",
            Error::BadHeader { .. } => "BadHeader",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::GapInSentenceIndex { .. } => "GapInSentenceIndex",
            Error::LineCountMismatch { .. } => "LineCountMismatch",
            Error::MalformedLine { .. } => "MalformedLine",
            Error::UnexpectedEof { .. } => "UnexpectedEof",
            Error::TrailingData { .. } => "TrailingData",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::EmptyDictionary => "EmptyDictionary",
            Error::DimMismatch { .. } => "DimMismatch",
            Error::SentenceIndexOutOfRange { .. } => "SentenceIndexOutOfRange",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::AllTokensOov => "AllTokensOOV",
            Error::EmptySentence => "EmptySentence",
            Error::ZeroNormColumn { .. } => "ZeroNormColumn",
            Error::PivotMismatch { .. } => "PivotMismatch",
            Error::EmptyGold => "EmptyGold",
            Error::TooFewPairs { .. } => "TooFewPairs",
            Error::ConstantScores { .. } => "ConstantScores",
            Error::ConstantInput => "ConstantInput",
            Error::SizeExceedsCorpus { .. } => "SizeExceedsCorpus",
            Error::Io(_) => "Io",
        }
    }

    /// Exit-code class for the command-line frontend.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::NonFinite
            | Error::NoConvergence { .. }
            | Error::NotOrthogonal { .. }
            | Error::ZeroNormColumn { .. }
            | Error::ConstantScores { .. }
            | Error::ConstantInput
            | Error::NonFiniteValue { .. } => ErrorCategory::Numeric,
            _ => ErrorCategory::DataFormat,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
