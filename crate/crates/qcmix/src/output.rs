//! Deterministic output writers: CSV tables, JSON config sidecars, and
//! plain-text summaries. Floats are printed with Rust's shortest
//! round-trip formatting, so identical runs produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("serializing {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v}")
    }
}

fn ensure_parent(path: &Path) -> Result<(), OutputError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err(path))?;
        }
    }
    Ok(())
}

/// Write a CSV with a mandatory header row and stable column order.
pub fn write_csv(path: &Path, columns: &[String], rows: &[Vec<f64>]) -> Result<(), OutputError> {
    ensure_parent(path)?;
    let mut text = String::new();
    text.push_str(&columns.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let cells: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(io_err(path))
}

/// Write a CSV whose first column is textual (e.g. stability labels).
pub fn write_csv_mixed(
    path: &Path,
    columns: &[String],
    rows: &[Vec<String>],
) -> Result<(), OutputError> {
    ensure_parent(path)?;
    let mut text = String::new();
    text.push_str(&columns.join(","));
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), OutputError> {
    ensure_parent(path)?;
    let text = serde_json::to_string_pretty(value).map_err(|source| OutputError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn write_text(path: &Path, lines: &[String]) -> Result<(), OutputError> {
    ensure_parent(path)?;
    let mut text = lines.join("\n");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Append one line to a log file, creating it if needed. Used for
/// partial-result persistence during long grid runs.
pub fn append_line(path: &Path, line: &str) -> Result<(), OutputError> {
    ensure_parent(path)?;
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    writeln!(file, "{line}").map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_bytes_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let cols = vec!["t".to_string(), "v".to_string()];
        let rows = vec![vec![0.0, 0.1], vec![1.0, f64::INFINITY]];
        write_csv(&path, &cols, &rows).unwrap();
        let first = fs::read(&path).unwrap();
        write_csv(&path, &cols, &rows).unwrap();
        assert_eq!(first, fs::read(&path).unwrap());
        let text = String::from_utf8(first).unwrap();
        assert_eq!(text, "t,v\n0,0.1\n1,inf\n");
    }
}
