//! CSV and JSON artifact emission.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// One column of a time series: a label and its real values.
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            values,
        }
    }
}

/// Split a complex series into the conventional re_/im_ column pair.
pub fn complex_columns(base: &str, values: &[num_complex::Complex<f64>]) -> (Column, Column) {
    (
        Column::new(format!("re_{base}"), values.iter().map(|z| z.re).collect()),
        Column::new(format!("im_{base}"), values.iter().map(|z| z.im).collect()),
    )
}

/// Format with 12 significant digits.
pub fn fmt_val(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.11e}")
}

/// Write a CSV time series: header first, one row per grid point, LF endings.
pub fn emit_timeseries(columns: &[Column], path: &Path) -> Result<()> {
    if columns.is_empty() || columns[0].values.is_empty() {
        bail!("refusing to emit an empty time series");
    }
    let rows = columns[0].values.len();
    for c in columns {
        if c.values.len() != rows {
            bail!("column '{}' has {} rows, expected {rows}", c.name, c.values.len());
        }
    }
    let mut out = String::new();
    let header: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in 0..rows {
        let row: Vec<String> = columns.iter().map(|c| fmt_val(c.values[r])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json(value: &serde_json::Value, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
