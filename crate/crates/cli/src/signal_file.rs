//! Plain-text signal files: one sample per line, or delimited rows.
//!
//! Blank lines and lines starting with `#` are skipped. The first remaining
//! line may be a header if it does not parse as numbers. Fields are split on
//! commas, semicolons, tabs or spaces. Values are written with the shortest
//! representation that parses back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{io_error, CliError};

/// Column selection for delimited rows; `None` picks the last column.
pub fn parse_signal(text: &str, column: Option<usize>) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    let mut seen_data = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let idx = match column {
            Some(c) if c >= fields.len() => {
                return Err(CliError::Data(format!(
                    "line {}: column {c} requested but only {} fields",
                    lineno + 1,
                    fields.len()
                )))
            }
            Some(c) => c,
            None => fields.len() - 1,
        };
        match fields[idx].parse::<f64>() {
            Ok(v) => {
                seen_data = true;
                out.push(v);
            }
            Err(_) if !seen_data && fields.iter().all(|f| f.parse::<f64>().is_err()) => {
                seen_data = true;
            }
            Err(_) => {
                return Err(CliError::Data(format!(
                    "line {}: cannot parse {:?} as a number",
                    lineno + 1,
                    fields[idx]
                )))
            }
        }
    }
    Ok(out)
}

pub fn read_signal(path: &Path, column: Option<usize>) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_signal(&text, column).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn format_signal(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 20);
    for v in values {
        let _ = writeln!(s, "{v}");
    }
    s
}

pub fn format_pairs(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = String::from("# x value\n");
    for (x, v) in points {
        let _ = writeln!(s, "{x} {v}");
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}
