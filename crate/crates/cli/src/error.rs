use thiserror::Error;

/// Driver errors, mapped onto the documented exit codes: 2 for anything
/// wrong with the configuration or the filesystem, 3 when the action
/// functional stopped being evaluable mid-run, 4 when the solver ran out of
/// iterations. Checker verdicts (PASS/FAIL) are not errors.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Breakdown(String),

    #[error("{0}")]
    NonConvergence(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Breakdown(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }
}

pub fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// Wrap a core error with the config key it traces back to.
pub fn keyed(key: &str, err: gts_core::Error) -> CliError {
    CliError::Validation(format!("{key}: {err}"))
}

pub type Result<T> = std::result::Result<T, CliError>;
