use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or input files (exit 2).
    Usage(String),
    /// A solver or iteration gave up (exit 3).
    Solver(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Solver(m) => f.write_str(m),
        }
    }
}

impl From<ellipt::Error> for CliError {
    fn from(e: ellipt::Error) -> Self {
        use ellipt::Error::*;
        match e {
            Solver { .. } | Backend(_) | RootFinding(_) | NoConvergence(_) => CliError::Solver(e.to_string()),
            Dimension(_) | Invalid(_) | Unsupported(_) => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Parses `text` (read from `path`), reporting line and column on failure.
pub fn parse<T: DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Usage(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    parse(path, &read_text(path)?)
}

pub fn emit<T: Serialize>(value: &T) -> CliResult<()> {
    let s = serde_json::to_string(value).map_err(|e| CliError::Usage(format!("encoding output: {e}")))?;
    println!("{s}");
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let s = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(format!("encoding output: {e}")))?;
    std::fs::write(path, s + "\n").map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn create_file(path: &Path) -> CliResult<std::fs::File> {
    std::fs::File::create(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
