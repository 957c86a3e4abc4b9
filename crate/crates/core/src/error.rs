use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("row {row}: expected {expected} fields, found {found}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("column `{0}` not found")]
    ColumnNotFound(String),
    #[error("zero data rows")]
    NoRows,
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("coordinate `{0}` has no present values")]
    EmptyCoordinate(String),
    #[error("fold count {folds} out of range for {cases} cases")]
    FoldCount { folds: usize, cases: usize },
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("active coordinates differ between hyperblocks")]
    CoordinateMismatch,
    #[error("hyperblock has no members")]
    EmptyBlock,
    #[error("contradictory branch on coordinate {0}")]
    ContradictoryBranch(String),
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("unknown class label `{0}`")]
    UnknownLabel(String),
    #[error("class `{0}` has no training cases")]
    MissingClass(String),
    #[error("no cases available for k selection")]
    EmptyKSet,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("expected two classes, found {0}")]
    NotBinary(usize),
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("scene: {0}")]
    Scene(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
