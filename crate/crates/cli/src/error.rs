use spinstar_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Short machine-readable tag for a core error, used in per-row records.
pub fn error_code(e: &CoreError) -> &'static str {
    match e {
        CoreError::InvalidParams(_) => "invalid_params",
        CoreError::InvalidState(_) => "invalid_state",
        CoreError::OracleCap { .. } => "oracle_cap",
        CoreError::ValidityDomain(_) => "validity_domain",
        CoreError::NonFinite(_) => "non_finite",
        CoreError::Integration(_) => "integration",
        CoreError::Positivity { .. } => "positivity",
        CoreError::Dimension { .. } => "dimension",
    }
}

pub fn is_numerical(e: &CoreError) -> bool {
    matches!(e, CoreError::NonFinite(_) | CoreError::Integration(_) | CoreError::Positivity { .. })
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if is_numerical(&e) {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<toml::de::Error> for CliError {
    fn from(e: toml::de::Error) -> Self {
        CliError::Validation(format!("config: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

pub type CliResult<T> = Result<T, CliError>;
