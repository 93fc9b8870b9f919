use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] iontomo_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short category name used on the CLI's error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(iontomo_core::Error::Domain(_)) => "domain",
            Error::Core(iontomo_core::Error::DimensionMismatch { .. }) => "dimension",
            Error::Core(iontomo_core::Error::Indistinguishable(_)) => "indistinguishable",
            Error::Core(iontomo_core::Error::Invariant(_)) => "invariant",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Config(_) => "config",
        }
    }

    /// The message without the category prefix that [`Error::kind`] already names.
    pub fn detail(&self) -> String {
        match self {
            Error::Core(
                iontomo_core::Error::Domain(m)
                | iontomo_core::Error::Indistinguishable(m)
                | iontomo_core::Error::Invariant(m),
            ) => m.clone(),
            Error::Json(e) => e.to_string(),
            Error::Csv(e) => e.to_string(),
            other => other.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
