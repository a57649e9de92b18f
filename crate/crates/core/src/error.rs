use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("power base contains a string variable")]
    VariableInPowerBase,
    #[error("malformed term notation at offset {offset}: {message}")]
    Notation { offset: usize, message: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: unsupported feature `{feature}`")]
    Unsupported {
        line: usize,
        column: usize,
        feature: String,
    },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("io error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}")]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error("{path}: reported sat but the model does not verify")]
    ModelRejected { path: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
