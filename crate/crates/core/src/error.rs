use thiserror::Error;

use crate::model::Mode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate item id {0:?}")]
    DuplicateItem(String),

    #[error("unknown item {0:?}")]
    UnknownItem(String),

    #[error("item {id:?}: {reason}")]
    InvalidItem { id: String, reason: String },

    #[error("item {id:?}: requested {requested} copies but the proposal has {available}")]
    QuantityOutOfRange {
        id: String,
        requested: u64,
        available: u64,
    },

    #[error("invalid ballot: {0}")]
    InvalidBallot(String),

    #[error("ballot is cyclic: {0:?} precedes itself")]
    CyclicBallot(String),

    #[error("profile mixes ballot kinds ({first} and {other})")]
    MixedProfile {
        first: &'static str,
        other: &'static str,
    },

    #[error("expected a {expected} proposal, found {found}")]
    ModeMismatch { expected: Mode, found: Mode },

    #[error("{kind} ballots are not supported on {mode} proposals")]
    UnsupportedBallot { kind: &'static str, mode: Mode },

    #[error("budget costs {cost}, which exceeds the limit {limit}")]
    InfeasibleBudget { cost: u64, limit: u64 },

    #[error("total proposal cost overflows 64 bits")]
    CostOverflow,

    #[error("oracle refused: {0}")]
    OracleRefused(String),

    #[error("unknown section {0:?}")]
    UnknownSection(String),

    #[error("{path}: {reason}")]
    Format { path: String, reason: String },

    #[error("{path}: {source}")]
    At {
        path: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attaches a document path (e.g. `ballots[2].linear`) to an error.
    pub fn at(self, path: impl Into<String>) -> Self {
        Error::At {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with any path wrappers stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_refusal(&self) -> bool {
        matches!(self.root(), Error::OracleRefused(_))
    }
}

pub(crate) trait ResultExt<T> {
    fn at(self, path: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn at(self, path: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.at(path()))
    }
}
