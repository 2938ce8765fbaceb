use fpcav_core::Error as CoreError;

/// CLI failure categories, one per exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, missing arguments, malformed command lines. Exit 2.
    Usage(String),
    /// Malformed input files or documents. Exit 3.
    Input(String),
    /// Domain or numerical failures while computing. Exit 4.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "input",
            CliError::Numeric(_) => "numeric",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InputFormat(m) => CliError::Input(m),
            CoreError::InvalidArgument(m)
            | CoreError::NotFound(m)
            | CoreError::UnstableGeometry(m)
            | CoreError::NumericFailure(m) => CliError::Numeric(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
