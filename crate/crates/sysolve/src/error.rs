use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] sysolve_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: field `{field}`: {source}", path.display())]
    Json {
        path: PathBuf,
        field: String,
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: line {line}: {reason}", path.display())]
    Table {
        path: PathBuf,
        line: u64,
        reason: String,
    },
    #[error("cannot parse `{0}` as a number")]
    Number(String),
    #[error("{}: model `{model}` does not cover a full rectangular grid ({reason})", path.display())]
    RaggedGrid {
        path: PathBuf,
        model: String,
        reason: String,
    },
    #[error("{}: several models present ({}); pick one with --model", path.display(), models.join(", "))]
    AmbiguousModel { path: PathBuf, models: Vec<String> },
    #[error("{}: no rows for model `{model}`", path.display())]
    UnknownModel { path: PathBuf, model: String },
    #[error("{}: cannot resume: {reason}", path.display())]
    Resume { path: PathBuf, reason: String },
    #[error("SYSOLVE_THREADS must be a positive integer, got `{0}`")]
    Threads(String),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// 2 when the emulator itself failed, 1 for bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Core(e) if e.is_emulation_failure() => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
