//! CSV/JSON table writing and the run manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// One table cell; CSV formatting is fixed-precision so repeated runs are
/// byte-identical, JSON carries the raw value.
#[derive(Debug, Clone, Copy)]
pub enum Field {
    Float { value: f64, precision: usize },
    Int(u64),
    Bool(bool),
}

impl Field {
    pub fn f4(value: f64) -> Self {
        Field::Float {
            value,
            precision: 4,
        }
    }

    pub fn f6(value: f64) -> Self {
        Field::Float {
            value,
            precision: 6,
        }
    }

    fn csv(&self) -> String {
        match *self {
            Field::Float { value, precision } => format!("{value:.precision$}"),
            Field::Int(v) => v.to_string(),
            Field::Bool(b) => if b { "1" } else { "0" }.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match *self {
            Field::Float { value, .. } => serde_json::json!(value),
            Field::Int(v) => serde_json::json!(v),
            Field::Bool(b) => serde_json::json!(b),
        }
    }
}

/// Writes rows under `headers` as CSV, or as a JSON array of objects with
/// the same field names when `json` is set.
pub fn write_table(
    path: &Path,
    headers: &[&str],
    rows: &[Vec<Field>],
    json: bool,
) -> io::Result<()> {
    let text = if json {
        let objects: Vec<serde_json::Value> = rows
            .iter()
            .map(|row| {
                let map: serde_json::Map<String, serde_json::Value> = headers
                    .iter()
                    .zip(row)
                    .map(|(&h, f)| (h.to_string(), f.json()))
                    .collect();
                serde_json::Value::Object(map)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&objects).expect("valid JSON");
        s.push('\n');
        s
    } else {
        let mut s = headers.join(",");
        s.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(Field::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    };
    fs::write(path, text)
}

/// Reproducibility record written next to every data output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub seed: u64,
    pub output_paths: Vec<String>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str, config_path: Option<&Path>, seed: u64, outputs: &[&Path]) -> Self {
        Self {
            command: command.to_string(),
            config_path: config_path.map(|p| p.display().to_string()),
            seed,
            output_paths: outputs.iter().map(|p| p.display().to_string()).collect(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Writes `<out>.manifest.json` next to the primary output.
    pub fn write_beside(&self, primary: &Path) -> io::Result<PathBuf> {
        let mut name = primary.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        let path = primary.with_file_name(name);
        let mut text = serde_json::to_string_pretty(self).expect("valid JSON");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
