pub mod experiment;
pub mod operator;
pub mod potential;

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Twelve significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.11e}")
}

/// Writes to the file if given, stdout otherwise.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .map_err(|e| CliError::Numerical(format!("cannot create {}: {e}", dir.display())))?;
            }
            std::fs::write(path, text).map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Numerical(format!("cannot write to stdout: {e}")))
        }
    }
}
