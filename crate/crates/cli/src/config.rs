//! Layered parameter resolution: flags, then the JSON config file, then defaults.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Failure carrying the process exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
    /// Print the subcommand usage after the message.
    pub usage: bool,
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
            usage: false,
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERIC,
            message: message.into(),
            usage: false,
        }
    }
}

impl From<dispersive_core::Error> for CliError {
    fn from(e: dispersive_core::Error) -> Self {
        use dispersive_core::Error::*;
        match e {
            NonFinite(_) | NonFiniteSymbol { .. } | Fit(_) => CliError::numeric(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Values from the config file, consumed key by key; every resolved value is
/// recorded for the output header.
pub struct Layer {
    file: Map<String, Value>,
    resolved: Map<String, Value>,
}

impl Layer {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let file = match path {
            None => Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::config(format!("cannot read config {}: {e}", p.display())))?;
                match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => return Err(CliError::config("config file must hold a JSON object")),
                    Err(e) => return Err(CliError::config(format!("config {}: {e}", p.display()))),
                }
            }
        };
        Ok(Self {
            file,
            resolved: Map::new(),
        })
    }

    /// Flag if given, else the file value under `key` (kebab or snake case), else `default`.
    pub fn pick<T: Serialize + DeserializeOwned>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: Option<T>,
    ) -> CliResult<Option<T>> {
        let from_file = self.take(key)?;
        let value = flag.or(from_file).or(default);
        if let Some(v) = &value {
            let json = serde_json::to_value(v).map_err(|e| CliError::config(e.to_string()))?;
            self.resolved.insert(key.to_string(), json);
        }
        Ok(value)
    }

    pub fn require<T: Serialize + DeserializeOwned>(&mut self, key: &str, flag: Option<T>) -> CliResult<T> {
        self.pick(key, flag, None)?.ok_or_else(|| CliError {
            code: EXIT_CONFIG,
            message: format!("missing required --{}", key.replace('_', "-")),
            usage: true,
        })
    }

    fn take<T: DeserializeOwned>(&mut self, key: &str) -> CliResult<Option<T>> {
        let kebab = key.replace('_', "-");
        let raw = match self.file.remove(key) {
            Some(v) => Some(v),
            None => self.file.remove(&kebab),
        };
        match raw {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v)
                .map(Some)
                .map_err(|e| CliError::config(format!("config key {key:?}: {e}"))),
        }
    }

    /// Rejects file keys no parameter consumed and returns the resolved map.
    pub fn finish(self) -> CliResult<Map<String, Value>> {
        if let Some(k) = self.file.keys().next() {
            return Err(CliError::config(format!("unknown config key {k:?}")));
        }
        Ok(self.resolved)
    }

    pub fn record(&mut self, key: &str, value: impl Serialize) {
        if let Ok(v) = serde_json::to_value(value) {
            self.resolved.insert(key.to_string(), v);
        }
    }
}
