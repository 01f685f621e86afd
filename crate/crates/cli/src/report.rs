use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::{json, Value};

pub const SCHEMA: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Output of one command: a JSON document and the same rows as a CSV table.
pub struct Report {
    pub json: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Set when the command ran but some of its checks failed.
    pub failed: bool,
}

impl Report {
    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        let mut buf: Vec<u8> = Vec::new();
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut buf, &self.json).map_err(|e| CliError::io(e.to_string()))?;
                buf.push(b'\n');
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(&self.header).map_err(|e| CliError::io(e.to_string()))?;
                for r in &self.rows {
                    w.write_record(r).map_err(|e| CliError::io(e.to_string()))?;
                }
                w.flush().map_err(|e| CliError::io(e.to_string()))?;
            }
        }
        match out {
            Some(p) => File::create(p).and_then(|mut f| f.write_all(&buf)),
            None => io::stdout().lock().write_all(&buf),
        }
        .map_err(|e| CliError::io(format!("{}: {e}", out.map_or("stdout".into(), |p| p.display().to_string()))))
    }
}

/// A finite float, or `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// CSV cell for a float; empty when not finite.
pub fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn arg(message: impl Into<String>) -> Self {
        CliError { kind: "InvalidArgument".into(), message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError { kind: "Io".into(), message: message.into() }
    }

    pub fn to_json(&self) -> Value {
        json!({ "schema": SCHEMA, "error": { "kind": self.kind, "message": self.message } })
    }
}

impl From<sturmian::Error> for CliError {
    fn from(e: sturmian::Error) -> Self {
        let debug = format!("{e:?}");
        let kind = debug.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        CliError { kind, message: e.to_string() }
    }
}
