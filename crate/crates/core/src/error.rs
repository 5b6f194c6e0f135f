use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no triples")]
    EmptyGraph,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown entity {0}")]
    UnknownEntity(String),

    #[error("unknown relation {0}")]
    UnknownRelation(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("loss became non-finite at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("test set is empty")]
    EmptyTestSet,

    #[error("metric invariant violated: {0}")]
    MetricInvariant(String),

    #[error("score is zero; probability undefined")]
    DegenerateScore,

    #[error("zero-length vector for entity {0}")]
    DegenerateVector(usize),

    #[error("invalid user: {0}")]
    InvalidUser(String),

    #[error("cohort {0} has no members")]
    EmptyCohort(String),

    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
