use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    /// A pushed-forward monomial `z^i t^j w^m` with `i != j`.
    #[error("not semi-conjugate: monomial {0} does not depend on (zt, w) alone")]
    NotSemiConjugate(String),
    #[error("identity jet: F - id vanishes up to order {0}")]
    IdentityJet(u32),
    #[error("unsupported dimension {0} (direction solver handles 1..=4 variables)")]
    UnsupportedDimension(usize),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
