//! Output directory, run manifest and machine-readable failures.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Serialize;
use serde_json::{json, Value};

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    ConfigError,
    NumericalFailure,
    RegressionFailure,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::ConfigError => 2,
            Status::NumericalFailure => 3,
            Status::RegressionFailure => 4,
        }
    }
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s.code())
    }
}

/// A failed run: status, stable error tag, message and structured details.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub status: Status,
    pub kind: String,
    pub message: String,
    pub details: Value,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { status: Status::ConfigError, kind: "ConfigError".into(), message: message.into(), details: Value::Null }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Failure::config(format!("{}: {err}", path.display()))
    }

    pub fn numerical(err: ccgeom::Error) -> Self {
        let details = match &err {
            ccgeom::Error::NotEmbeddable { c, threshold } => json!({ "c": c, "threshold": threshold }),
            ccgeom::Error::NoConvergence { residual, iterations } => json!({ "residual": residual, "iterations": iterations }),
            _ => Value::Null,
        };
        Failure { status: Status::NumericalFailure, kind: err.kind().into(), message: err.to_string(), details }
    }

    /// Core errors raised while reading inputs.
    pub fn invalid_input(err: ccgeom::Error) -> Self {
        Failure { kind: "ConfigError".into(), ..Failure::config(err.to_string()) }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "error": {
                "kind": self.kind,
                "message": self.message,
                "exit_code": self.status.code(),
                "details": self.details,
            }
        })
    }
}

/// Collects the artifacts of one command and writes its manifest.
pub struct Output {
    dir: PathBuf,
    artifacts: Vec<String>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        Ok(Output { dir: dir.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Failure::io(&path, e))?;
        self.artifacts.push(name.into());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let text = ccgeom::io::to_json(value).map_err(Failure::numerical)?;
        self.write(name, &(text + "\n"))
    }

    /// Writes `manifest.json` describing the run; it carries no timestamps so that identical
    /// runs produce identical files.
    pub fn finish(mut self, command: &str, inputs: Value, tolerances: Value, failure: Option<&Failure>) -> Result<(), Failure> {
        if let Some(f) = failure {
            self.write("error.json", &format!("{}\n", serde_json::to_string_pretty(&f.to_json()).unwrap_or_default()))?;
        }
        self.artifacts.sort();
        let versions: BTreeMap<&str, &str> =
            [("ccgeom", ccgeom::VERSION), ("ccgeom-cli", env!("CARGO_PKG_VERSION"))].into_iter().collect();
        let status = failure.map_or(Status::Success, |f| f.status);
        let manifest = json!({
            "command": command,
            "inputs": inputs,
            "tolerances": tolerances,
            "versions": versions,
            "artifacts": self.artifacts,
            "status": status,
            "exit_code": status.code(),
        });
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).unwrap_or_default() + "\n";
        fs::write(&path, text).map_err(|e| Failure::io(&path, e))
    }
}
