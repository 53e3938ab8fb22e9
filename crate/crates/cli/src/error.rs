use hcorr_core::Error as CoreError;
use serde::Serialize;

/// Failure of a command, with its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported symbol: {0}")]
    UnsupportedSymbol(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const CROSS_CHECK: i32 = 4;
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io-error",
            CliError::Parse(_) => "parse-error",
            CliError::UnsupportedSymbol(_) => "unsupported-symbol",
            CliError::Core(e) => e.code(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => exit::NUMERICAL,
            _ => exit::INVALID,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            code: &'a str,
            message: String,
            exit_code: i32,
            #[serde(skip_serializing_if = "Option::is_none")]
            gamma: Option<f64>,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: Body<'a>,
        }
        let gamma = match self {
            CliError::Core(CoreError::Ellipticity { gamma, .. } | CoreError::NonConvergence { gamma, .. }) => Some(*gamma),
            _ => None,
        };
        let w = Wrapper { error: Body { code: self.code(), message: self.to_string(), exit_code: self.exit_code(), gamma } };
        serde_json::to_string(&w).expect("error serializes")
    }
}
