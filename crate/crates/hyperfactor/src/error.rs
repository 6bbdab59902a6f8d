use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("root finder did not converge (degree {degree}, {sweeps} sweeps); raise precision")]
    NonConvergence { degree: usize, sweeps: usize },
    #[error("precision exhausted: {needed} bits needed, ceiling is {ceiling}")]
    PrecisionExhausted { needed: usize, ceiling: usize },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("reconstruction mismatch: {0}")]
    Reconstruction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
