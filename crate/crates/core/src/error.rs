use thiserror::Error;

/// Errors raised by the symbolic, dynamical and coupling layers.
///
/// Structural errors (mismatched shapes, unknown variables, missing window
/// coordinates) are caller mistakes. None of them signal a failure of an
/// identity; identity checks report their outcome as values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable count mismatch: {left} vs {right}")]
    VarMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("level mismatch: {left} vs {right}")]
    LevelMismatch { left: usize, right: usize },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{0}` is already in use")]
    VariableInUse(String),

    #[error("assignment does not cover variable `{0}`")]
    MissingVariable(String),

    #[error("parse error in `{input}`: {msg}")]
    Parse { input: String, msg: String },

    #[error("matrix is not upper unitriangular: {0}")]
    NotUnitriangular(String),

    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("system must have at least one entry")]
    EmptySystem,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("window not closed: {0}")]
    WindowClosure(String),

    #[error("window lacks coordinate {0}")]
    MissingCoordinate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
