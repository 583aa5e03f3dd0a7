//! CLI error type and its mapping to process exit codes.

use entspec_core::Error as CoreError;
use std::fmt;

/// Anything that can abort a command. `Usage` covers CLI-level
/// configuration problems (unparseable values, missing flags, unreadable
/// input files); library errors keep their own classification.
#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 0 is success; 2 configuration, 3 memory budget, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 4,
            CliError::Core(e) => match e {
                CoreError::Config(_) | CoreError::InvalidDistribution(_) => 2,
                CoreError::BudgetExceeded { .. } => 3,
                CoreError::UnstableBall { .. } | CoreError::Internal(_) => 4,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}
