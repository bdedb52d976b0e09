//! Artifact writing. Everything lands via a temp file in the target
//! directory followed by a rename, so readers never observe partial output.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::jsonfmt::fmt_f64;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".into());
    let tmp: PathBuf = dir.join(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Minimal CSV assembly: fixed columns, floats in the same 17-digit format
/// as the JSON artifacts, quoting only when a field needs it.
pub struct CsvBuilder {
    buf: String,
}

impl CsvBuilder {
    pub fn new(header: &[String]) -> Self {
        let mut b = CsvBuilder { buf: String::new() };
        b.row(header.iter().map(|h| h.as_str()));
        b
    }

    pub fn row<'a>(&mut self, fields: impl IntoIterator<Item = &'a str>) {
        let mut first = true;
        for field in fields {
            if !first {
                self.buf.push(',');
            }
            first = false;
            if field.contains([',', '"', '\n']) {
                self.buf.push('"');
                self.buf.push_str(&field.replace('"', "\"\""));
                self.buf.push('"');
            } else {
                self.buf.push_str(field);
            }
        }
        self.buf.push('\n');
    }

    pub fn float_row(&mut self, values: impl IntoIterator<Item = f64>) {
        let fields: Vec<String> = values.into_iter().map(fmt_f64).collect();
        self.row(fields.iter().map(|s| s.as_str()));
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

/// Column list `s, x1..xd, tail...`.
pub fn columns(dim: usize, tail: &[&str]) -> Vec<String> {
    let mut cols = vec!["s".to_string()];
    for i in 1..=dim {
        cols.push(format!("x{i}"));
    }
    cols.extend(tail.iter().map(|s| s.to_string()));
    cols
}
