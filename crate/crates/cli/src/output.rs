use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn json<T: Serialize + ?Sized>(value: &T) -> CliResult<String> {
    blochsig::json::to_string(value).map_err(|e| CliError::Io(format!("serializing output: {e}")))
}

/// Writes to `path`, or to stdout when none is given.
pub fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

pub fn timestamp(suppress: bool) -> Option<String> {
    (!suppress).then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}
