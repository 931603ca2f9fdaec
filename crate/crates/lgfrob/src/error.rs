use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("variable count mismatch: {0} vs {1}")]
    VarMismatch(usize, usize),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("budget exceeded: {0}")]
    Budget(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Input(_) | Error::VarMismatch(..) => 2,
            Error::Precondition(_) => 3,
            Error::Verification(_) | Error::Budget(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Input(_) => "input",
            Error::VarMismatch(..) => "variable-count",
            Error::Precondition(_) => "precondition",
            Error::Verification(_) => "verification",
            Error::Budget(_) => "budget",
        }
    }
}
