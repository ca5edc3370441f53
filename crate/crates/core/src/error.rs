use std::path::PathBuf;

use crate::rules::RuleId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: line {line}: {message}")]
    Parse { context: String, line: usize, message: String },

    #[error("{context}: sentence {sentence}: {message}")]
    Structure { context: String, sentence: usize, message: String },

    #[error("corpus length mismatch: {trees} trees, {targets} target sentences, {alignments} alignments")]
    LengthMismatch { trees: usize, targets: usize, alignments: usize },

    #[error("sentence {sentence}: link {src}-{tgt} out of bounds (source length {src_len}, target length {tgt_len})")]
    LinkOutOfBounds { sentence: usize, src: usize, tgt: usize, src_len: usize, tgt_len: usize },

    #[error("{context}: row {row}: duplicate language code `{code}`")]
    DuplicateLanguage { context: String, row: usize, code: String },

    #[error("{context}: row {row}, column {column}: value `{value}` outside the rule domain")]
    DomainViolation { context: String, row: usize, column: String, value: String },

    #[error("{context}: missing required column `{column}`")]
    MissingColumn { context: String, column: String },

    #[error("{context}: row {row}: {message}")]
    InvalidRecord { context: String, row: usize, message: String },

    #[error("unknown rule `{0}`")]
    UnknownRule(RuleId),

    #[error("unknown language `{0}`")]
    UnknownLanguage(String),

    #[error("no text feature vector for language `{0}`")]
    MissingTextVector(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("row width {got} does not match model width {expected}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("leave-one-out needs at least 2 rows, got {0}")]
    CohortTooSmall(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(context: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse { context: context.into(), line, message: message.into() }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Invariant(_) => 4,
            _ => 3,
        }
    }
}
