use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The scenario file is not valid TOML or does not match the schema.
    /// The message carries the line and column reported by the parser.
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    /// The scenario parsed but violates a model invariant.
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: optomag::Error,
    },
    #[error(transparent)]
    Model(#[from] optomag::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("serialization: {0}")]
    Serialize(String),
    #[error("manifest: {0}")]
    Manifest(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Invalid { .. } => "invalid_scenario",
            CliError::Model(e) => e.kind(),
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
            CliError::Serialize(_) => "serialize",
            CliError::Manifest(_) => "manifest",
        }
    }

    /// Process exit status: 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Invalid { .. } | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
