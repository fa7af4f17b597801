use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),

    #[error("unknown node id `{0}`")]
    UnknownNode(String),

    #[error("asymmetric distance between `{0}` and `{1}`")]
    AsymmetricDistance(String, String),

    #[error("invalid distance {value} between `{u}` and `{v}`")]
    InvalidDistance { u: String, v: String, value: f64 },

    #[error("no distance for pair (`{0}`, `{1}`) and no fill value declared")]
    MissingDistance(String, String),

    #[error("metric declaration: {0}")]
    MetricDeclaration(String),

    #[error("node {node} out of range for instance with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("invalid clustering: {0}")]
    InvalidClustering(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The instance admits no solution of the requested shape.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A ratio or estimate is undefined on this input.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("instance too large for exhaustive search: {what} = {value} exceeds cap {cap}")]
    SizeCap {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("stage {stage} ({objective}): {source}")]
    Stage {
        stage: usize,
        objective: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips stage context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors that describe an instance without a feasible answer
    /// rather than a malformed request.
    pub fn is_infeasible(&self) -> bool {
        matches!(self.root(), Error::Infeasible(_) | Error::Degenerate(_))
    }

    pub(crate) fn in_stage(self, stage: usize, objective: impl Into<String>) -> Error {
        Error::Stage {
            stage,
            objective: objective.into(),
            source: Box::new(self),
        }
    }
}
