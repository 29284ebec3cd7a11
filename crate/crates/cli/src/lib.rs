//! Front end for solving and verifying invariant coclosed G₂-structures.
//!
//! Runs are described by a [`RunConfig`]; commands write a CSV
//! [`ProfileTable`], a JSON sidecar with the series data and a JSON
//! verification report. Exit codes: 0 pass, 1 check failure, 2 config or
//! input error, 3 numerical failure.

pub mod args;
pub mod commands;
pub mod config;
pub mod model;
pub mod table;

use std::path::{Path, PathBuf};

pub use args::{run, Cli};
pub use config::{A1Spec, GridConfig, Outputs, ProfileSpec, RunConfig, Tolerances};
pub use model::Model;
pub use table::{ProfileTable, TableMeta, COLUMNS};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid table {}: {msg}", path.display())]
    Table { path: PathBuf, msg: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    use std::io::Write;

    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
