use std::path::PathBuf;

pub type Result<T, E = AppError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: cannot decode image: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: invalid JSON at line {}, column {}: {source}", source.line(), source.column())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: invalid config: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: minevis_core::Error,
    },
    #[error("{0}")]
    Data(String),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn core(context: impl std::fmt::Display, source: minevis_core::Error) -> Self {
        AppError::Core {
            context: context.to_string(),
            source,
        }
    }

    /// 1 for usage errors, 2 for anything wrong with the data.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            _ => 2,
        }
    }
}
