//! Command-line front end for `tilde-core`: fitting, prediction, F-tests,
//! stepwise selection and SVG plots.

mod commands;
pub mod model_file;
pub mod plot;
pub mod svg;

use std::path::Path;

pub use commands::{run, run_with};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] tilde_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: not a valid model file: {message}")]
    ModelFile { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_error(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        message: err.to_string(),
    }
}

/// Writes `contents` to a temporary file beside `path`, then renames it into
/// place so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
    tmp.write_all(contents).map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

/// Serializes `value` as pretty JSON and writes it atomically.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    write_atomic(path, text.as_bytes())
}
