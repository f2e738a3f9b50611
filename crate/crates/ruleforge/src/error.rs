use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] ruleforge_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    /// A record that does not fit its file format. `line` is 1-based.
    #[error("{path}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Format { path: String, line: Option<usize>, message: String },
    /// Problem with one specification entry.
    #[error("entry {index}: {source}")]
    Entry { index: usize, source: Box<Error> },
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Error {
        Error::Io { path: path.display().to_string(), source }
    }

    pub fn format(path: &Path, line: Option<usize>, message: impl Into<String>) -> Error {
        Error::Format { path: path.display().to_string(), line, message: message.into() }
    }
}
