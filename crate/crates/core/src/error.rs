use thiserror::Error;

use crate::relcore::Annotation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("parse error in {what}: {message}")]
    Parse { what: &'static str, message: String },

    #[error("unsupported construct: {0}")]
    Unsupported(String),

    #[error("tuple {0:?} is not an output of the query")]
    NotAnOutput(Vec<String>),

    #[error("unknown tuple annotation `{0}`")]
    MissingTuple(Annotation),

    #[error("invalid prov-example: {0}")]
    InvalidExample(String),

    #[error("head position {0} is not projected by any join-graph node")]
    IncompleteProjection(usize),

    #[error("no attribute can be projected to output position {position}")]
    NoProjection { position: usize },

    #[error("value `{value}` matches no tuple (best score {best_score:.3})")]
    UnmatchedValue { value: String, best_score: f64 },

    #[error("explanation cannot be completed: {0}")]
    Incompletable(String),

    #[error("explanation is outside the joinless fragment: {0}")]
    UnsupportedFragment(String),

    #[error("no consistent query with at most {max_nodes} atoms")]
    NoConsistentQuery { max_nodes: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(what: &'static str, message: impl Into<String>) -> Self {
        Error::Parse {
            what,
            message: message.into(),
        }
    }
}
