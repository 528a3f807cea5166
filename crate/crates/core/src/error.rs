use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown residue '{0}'")]
    UnknownResidue(char),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid parent mass: residual {0:.4} Da must be positive")]
    InvalidParentMass(f64),

    #[error("conflicting restriction: {0}")]
    ConflictingRestriction(String),

    #[error("no feasible s-t path")]
    NoFeasiblePath,

    #[error("path enumeration exceeded limit of {0} paths")]
    LimitExceeded(usize),

    #[error("model error: {0}")]
    Model(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
