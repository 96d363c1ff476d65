use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("argument {value} outside supported interval [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("series did not converge within {terms} terms at z = {z}")]
    SeriesNonConvergence { z: f64, terms: usize },

    #[error("no sign change of {what} found on [{lo}, {hi}]")]
    NoBracket { what: &'static str, lo: f64, hi: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("mass matrix numerically singular: retained rank {rank} < requested {requested}; lower the degree or refine quadrature")]
    BasisDegeneracy { rank: usize, requested: usize },

    #[error("ground state has zero mean (|mean| = {mean:e}); the constant function is then a valid trial function")]
    ZeroMeanGroundState { mean: f64 },

    #[error("internal numerical failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
