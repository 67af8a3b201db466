//! Report rendering. JSON is canonical; CSV is a flat projection of it.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use mechlib::MechError;
use serde_json::{json, Value};

use crate::config::Format;

pub struct Report {
    pub json: Value,
    /// Per-row records for the CSV projection. Without them the CSV is one
    /// row of the report's top-level scalar fields.
    pub rows: Option<Vec<Value>>,
}

impl Report {
    pub fn single(json: Value) -> Self {
        Self { json, rows: None }
    }
}

/// A float as JSON, with infinities written as `"INFINITE"`.
pub fn num(x: f64) -> Value {
    if x.is_infinite() {
        Value::String("INFINITE".into())
    } else {
        json!(x)
    }
}

pub fn one_based(xs: &[usize]) -> Value {
    json!(xs.iter().map(|x| x + 1).collect::<Vec<_>>())
}

pub fn write(report: &Report, format: Format, out: Option<&Path>) -> Result<()> {
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.json)?;
            s.push('\n');
            s
        }
        Format::Csv => to_csv(report)?,
    };
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(xs) => xs.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

fn to_csv(report: &Report) -> Result<String> {
    let rows: Vec<&serde_json::Map<String, Value>> = match &report.rows {
        Some(rows) => rows.iter().filter_map(Value::as_object).collect(),
        None => report.json.as_object().into_iter().collect(),
    };
    let mut header: Vec<&String> = Vec::new();
    for row in &rows {
        for (k, v) in row.iter() {
            if !v.is_object() && !header.contains(&k) {
                header.push(k);
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for row in rows {
        w.write_record(header.iter().map(|k| row.get(*k).map(cell).unwrap_or_default()))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Machine-readable error object for stderr.
pub fn error_json(e: &anyhow::Error) -> String {
    let kind = if let Some(m) = e.downcast_ref::<MechError>() {
        m.kind()
    } else if e.chain().any(|c| c.is::<std::io::Error>()) {
        "io"
    } else if e.chain().any(|c| c.is::<serde_json::Error>() || c.is::<toml::de::Error>()) {
        "parse"
    } else {
        "usage"
    };
    let message = e.chain().map(|c| c.to_string()).collect::<Vec<_>>().join(": ");
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}
