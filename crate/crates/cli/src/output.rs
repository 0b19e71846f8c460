//! CSV and JSON emission.
//!
//! JSON floats are written with 17 significant digits in exponent form
//! (`2.5000000000000000e-1`), integers as integers, non-finite values as
//! `null`. CSV floats use the shortest representation that round-trips.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Number, Value};

const INDENT: &str = "  ";

/// Pretty JSON: two-space indent, arrays of scalars kept on one line.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let value = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    Ok(out)
}

fn write_number(out: &mut String, n: &Number) {
    match (n.as_u64(), n.as_i64(), n.as_f64()) {
        (Some(u), _, _) => write!(out, "{u}"),
        (_, Some(i), _) => write!(out, "{i}"),
        (_, _, Some(f)) => write!(out, "{f:.16e}"),
        _ => write!(out, "{n}"),
    }
    .expect("write to String");
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(out: &mut String, value: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.push_str(&INDENT.repeat(d));
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item, depth);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, item, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, v, depth + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

/// In-memory CSV table with a fixed header.
pub struct Csv {
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self {
            columns: header.len(),
            text,
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "row width must match header");
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn num(x: f64) -> String {
    let mut s = String::new();
    write!(s, "{x}").expect("write to String");
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "both" => Ok(Format::Both),
            other => Err(format!("unknown format {other:?}, expected csv, json or both")),
        }
    }
}

/// Writes `contents` to `dir/name`, returning the path.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        q: f64,
        n: u32,
        xs: Vec<f64>,
        missing: f64,
    }

    #[test]
    fn seventeen_digits() {
        let json = to_json(&Sample {
            q: 0.25,
            n: 10,
            xs: vec![1.0, 0.1],
            missing: f64::NAN,
        })
        .unwrap();
        assert!(json.contains("\"q\": 2.5000000000000000e-1"));
        assert!(json.contains("\"n\": 10"));
        assert!(json.contains("[1.0000000000000000e0,1.0000000000000001e-1]"));
        assert!(json.contains("\"missing\": null"));
        assert!(json.starts_with("{\n  \"q\""));
        let back: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["xs"][1].as_f64(), Some(0.1));
    }

    #[test]
    fn nested_arrays_are_indented() {
        let json = to_json(&serde_json::json!({"rows": [{"t": 0.5}], "empty": []})).unwrap();
        assert_eq!(
            json,
            "{\n  \"rows\": [\n    {\n      \"t\": 5.0000000000000000e-1\n    }\n  ],\n  \"empty\": []\n}\n"
        );
    }

    #[test]
    fn csv_rows() {
        let mut c = Csv::new(&["p", "count"]);
        c.row(&["0".into(), num(1.5)]);
        assert_eq!(c.into_string(), "p,count\n0,1.5\n");
    }
}
