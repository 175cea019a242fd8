use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("n_spins = {n_spins} exceeds the dense oracle cap of {cap}")]
    OracleCap { n_spins: usize, cap: usize },
    #[error("outside validity domain: {0}")]
    ValidityDomain(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("reduced state not positive: smallest eigenvalue {min_eigenvalue:e}")]
    Positivity { min_eigenvalue: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
}
