use std::fmt;
use std::path::Path;

/// A failure that ends the process. Printed as one line, `error[kind]: message`.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Input(String),
    Io(String),
    Integration(String),
    Library(blochsig::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Input(_) => "input",
            CliError::Io(_) => "io",
            CliError::Integration(_) => "integration",
            CliError::Library(_) => "invalid",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Integration(_) => 3,
            _ => 2,
        }
    }

    pub fn config(path: &Path, field: impl fmt::Display, msg: impl fmt::Display) -> Self {
        CliError::Config(format!("{}: {field}: {msg}", path.display()))
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            CliError::Usage(m)
            | CliError::Config(m)
            | CliError::Input(m)
            | CliError::Io(m)
            | CliError::Integration(m) => m.clone(),
            CliError::Library(e) => e.to_string(),
        };
        // keep it on one line whatever the source produced
        let flat = msg.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error[{}]: {flat}", self.kind())
    }
}

impl From<blochsig::Error> for CliError {
    fn from(e: blochsig::Error) -> Self {
        match e {
            blochsig::Error::Integration { .. } => CliError::Integration(e.to_string()),
            other => CliError::Library(other),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
