//! Minimal deterministic CSV writer for numeric tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Shortest round-trip representation; scientific notation outside
/// `[1e-5, 1e16)`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Renders the table; fails on ragged rows or non-finite values.
pub fn render_series_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<String> {
    let mut out = String::new();
    let head: Vec<String> = header.iter().map(|h| quote(h)).collect();
    out.push_str(&head.join(","));
    out.push('\n');
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::InvalidConfig(format!(
                "row of {} values for {} columns in {}",
                row.len(),
                header.len(),
                path.display()
            )));
        }
        for (i, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteOutput(path.to_path_buf()));
            }
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", format_float(*v));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes `header` and `rows` to `path`, creating parent directories.
pub fn write_series_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let text = render_series_csv(path, header, rows)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
