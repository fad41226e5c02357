//! Rendering of result documents as JSON, CSV or a flat human listing.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde_json::Value;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

/// Rounds every floating value to 12 significant digits.
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = hdx_core::arith::sig12(n.as_f64().unwrap_or(0.0));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(o) => {
            for (k, x) in o {
                flatten(&if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") }, x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

/// CSV of an array of flat objects; nested values are JSON-encoded.
pub fn csv_table(rows: &[Value]) -> Result<String> {
    let mut header: Vec<String> = Vec::new();
    for r in rows {
        let Value::Object(o) = r else { bail!("csv output needs a table of records") };
        for k in o.keys() {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in rows {
        w.write_record(header.iter().map(|k| r.get(k).map(scalar).unwrap_or_default()))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Renders a document. `table` picks the rows used for CSV output.
pub fn render(doc: &Value, format: Format, table: Option<&Value>) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(doc)? + "\n"),
        Format::Csv => match table {
            Some(Value::Array(rows)) => csv_table(rows),
            _ => bail!("this command has no tabular output; use --format json or human"),
        },
        Format::Human => {
            let mut out = Vec::new();
            flatten("", doc, &mut out);
            let width = out.iter().map(|(k, _)| k.len()).max().unwrap_or(0).min(48);
            Ok(out.iter().map(|(k, v)| format!("{k:width$}  {v}\n")).collect())
        }
    }
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
