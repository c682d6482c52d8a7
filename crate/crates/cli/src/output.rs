//! Shared writers: config headers, CSV rows, destination handling.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: Map<String, Value>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub plot: bool,
}

impl RunConfig {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }

    /// Prints the resolved config on stderr.
    pub fn echo(&self) {
        eprintln!("# config {}", self.to_json());
    }

    pub fn csv_header(&self) -> String {
        format!("# dispersive {}\n# config {}\n", self.command, self.to_json())
    }
}

/// Stdout when `path` is `None`.
pub fn open(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            }
            let f = File::create(p).map_err(|e| io_error(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

pub fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::config(format!("{}: {e}", path.display()))
}

pub fn write_all(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::config(format!("write failed: {e}")))
}

/// Joins display-formatted cells with ',' and ends the row with LF.
pub fn row(cells: &[String]) -> String {
    let mut s = cells.join(",");
    s.push('\n');
    s
}

/// Shortest round-trip decimal form; never locale dependent.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
