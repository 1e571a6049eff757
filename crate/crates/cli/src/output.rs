use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Rows for CSV output. Documents without a table are written as
/// `key,value` pairs.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        self.rows.push(row);
    }
}

#[derive(Debug)]
pub struct Output {
    pub doc: Map<String, Value>,
    pub table: Option<Table>,
}

impl Output {
    pub fn new(command: &str) -> Self {
        let mut doc = Map::new();
        doc.insert("command".into(), Value::from(command));
        Self { doc, table: None }
    }

    pub fn insert(&mut self, key: &str, value: impl Into<Value>) {
        self.doc.insert(key.into(), value.into());
    }

    pub fn set_elapsed(&mut self, seconds: f64) {
        self.insert("elapsed_seconds", seconds);
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        other => out.push((prefix.to_string(), cell(other))),
    }
}

fn render(out: &Output, format: Format) -> Result<Vec<u8>, Box<dyn std::error::Error>> {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&Value::Object(out.doc.clone()))?;
            text.push('\n');
            Ok(text.into_bytes())
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            match &out.table {
                Some(table) => {
                    w.write_record(&table.header)?;
                    for row in &table.rows {
                        w.write_record(row.iter().map(cell))?;
                    }
                }
                None => {
                    let mut pairs = Vec::new();
                    flatten("", &Value::Object(out.doc.clone()), &mut pairs);
                    w.write_record(["key", "value"])?;
                    for (k, v) in pairs {
                        w.write_record([k, v])?;
                    }
                }
            }
            Ok(w.into_inner()?)
        }
    }
}

pub fn write_output(out: &Output, format: Format, path: Option<&Path>) -> Result<(), Box<dyn std::error::Error>> {
    let bytes = render(out, format)?;
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}
