use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}", config_message(file, *line, message))]
    Config { file: String, line: Option<usize>, message: String },

    #[error(transparent)]
    Core(#[from] landau_core::Error),

    /// A regression check ran but missed its tolerance.
    #[error("{0}")]
    Regression(String),

    #[error("{0}")]
    Io(String),
}

fn config_message(file: &str, line: Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("{file}:{l}: {message}"),
        None => format!("{file}: {message}"),
    }
}

impl CliError {
    /// 1 for accuracy or solver failures, 2 for usage and input errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 1,
            CliError::Regression(_) => 1,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(_) => "input",
            CliError::Regression(_) => "regression",
            CliError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
