use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(crackwave::Error),
    #[error("{0} acceptance criteria failed")]
    Acceptance(usize),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 0 success, 2 config, 3 numerical, 4 acceptance; 1 for anything else (i/o).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Acceptance(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<crackwave::Error> for CliError {
    fn from(e: crackwave::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

pub fn io_err(path: impl AsRef<std::path::Path>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.as_ref().display().to_string();
    move |source| CliError::Io { path, source }
}

pub type Result<T> = std::result::Result<T, CliError>;
