use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown mode label `{0}`")]
    UnknownLabel(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("integration failed at t = {t} ns: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("diagnostics failure at t = {t} ns: {reason}")]
    Diagnostics { t: f64, reason: String },

    #[error("realization {index} failed: {source}")]
    Realization {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("grid resolution {dt} ns is coarser than the required {required} ns")]
    Resolution { dt: f64, required: f64 },

    #[error("emitter/receiver roles are ambiguous at t = {0} ns")]
    RoleAmbiguity(f64),

    #[error("requested time {t} ns lies outside the model window [0, {limit}] ns")]
    OutsideWindow { t: f64, limit: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("missing tomography setting `{0}`")]
    MissingSetting(String),

    #[error("rank-deficient input set (smallest singular value {0:e})")]
    RankDeficient(f64),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
