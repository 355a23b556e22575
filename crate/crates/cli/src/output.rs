//! Result envelopes and their JSON / CSV renderings.

use std::fs;
use std::io::Write;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    /// SHA-256 of the model spec file bytes.
    pub model_sha256: String,
    pub seed: u64,
    pub params: Value,
    pub version: String,
    pub threads: usize,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub schema_version: u32,
    pub manifest: Manifest,
    pub result: Value,
}

/// Flattens nested objects and arrays into dotted column names
/// (`moves.left`, `forward.0.estimate`).
pub fn flatten(value: &Value) -> Vec<(String, Value)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
        let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(map) => {
                for (k, inner) in map {
                    walk(&key(k), inner, out);
                }
            }
            Value::Array(items) => {
                for (i, inner) in items.iter().enumerate() {
                    walk(&key(&i.to_string()), inner, out);
                }
            }
            leaf => out.push((prefix.to_string(), leaf.clone())),
        }
    }
    let mut out = Vec::new();
    walk("", value, &mut out);
    if out.len() == 1 && out[0].0.is_empty() {
        out[0].0 = "value".into();
    }
    out
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// CSV with the manifest as leading `#` comment lines. Columns are the union
/// of flattened keys in order of first appearance.
pub fn to_csv(envelope: &Envelope, rows: &[Value]) -> Result<String> {
    let mut text = format!("# schema_version: {}\n", envelope.schema_version);
    let manifest = serde_json::to_value(&envelope.manifest)?;
    if let Value::Object(map) = manifest {
        for (k, v) in map {
            text.push_str(&format!("# {k}: {}\n", cell(&v)));
        }
    }
    let flat: Vec<Map<String, Value>> = rows.iter().map(|r| flatten(r).into_iter().collect()).collect();
    let mut columns: Vec<String> = Vec::new();
    for row in rows {
        for (k, _) in flatten(row) {
            if !columns.contains(&k) {
                columns.push(k);
            }
        }
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&columns)?;
    for row in &flat {
        writer.write_record(columns.iter().map(|c| row.get(c).map(cell).unwrap_or_default()))?;
    }
    text.push_str(&String::from_utf8(writer.into_inner()?)?);
    Ok(text)
}

pub fn render(envelope: &Envelope, rows: &[Value], format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(envelope)? + "\n"),
        Format::Csv => to_csv(envelope, rows),
    }
}

pub fn emit(text: &str, out: &str) -> Result<()> {
    if out == "-" || out == "stdout" {
        std::io::stdout().write_all(text.as_bytes())?;
        return Ok(());
    }
    fs::write(out, text).with_context(|| format!("writing {out}"))
}
