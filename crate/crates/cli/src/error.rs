use hanle_core::HanleError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("config key '{key}' ({origin}): {message}")]
    Field {
        key: String,
        origin: String,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] HanleError),
}

impl CliError {
    pub fn config(line: usize, message: impl Into<String>) -> Self {
        Self::Config {
            line,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::Field { .. } | Self::Usage(_) => 2,
            Self::Io { .. } => 3,
            Self::Core(_) => 4,
        }
    }
}
