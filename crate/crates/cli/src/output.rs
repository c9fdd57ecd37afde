//! Deterministic artifact writers.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use serde_json::{Map, Number, Value};
use vortex_core::{Configuration, Point};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// A JSON number; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn point(p: Point) -> Value {
    nums(&[p.x, p.y])
}

pub fn positions(x: &Configuration) -> Value {
    Value::Array(x.points().iter().map(|&p| point(p)).collect())
}

/// Builds a JSON object from `(key, value)` pairs in the given order.
pub fn record<const N: usize>(fields: [(&str, Value); N]) -> Value {
    let mut m = Map::new();
    for (k, v) in fields {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

/// Pretty-prints `v` with two-space indentation and every float in 17
/// significant digits.
pub fn write_json(v: &Value, depth: usize, out: &mut String) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Number(n) if n.is_f64() => out.push_str(&fmt(n.as_f64().unwrap_or(f64::NAN))),
        Value::Array(items) if !items.is_empty() => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_json(item, depth + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_json(item, depth + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Output directory plus the provenance stamped on every artifact.
#[derive(Debug, Clone)]
pub struct Sink {
    pub dir: PathBuf,
    pub hash: String,
    pub seed: u64,
}

impl Sink {
    fn path(&self, name: &str) -> io::Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        Ok(self.dir.join(name))
    }

    /// Wraps `body` with the config hash and seed and writes it as JSON.
    pub fn json(&self, name: &str, command: &str, body: Value) -> io::Result<()> {
        let mut doc = Map::new();
        doc.insert("command".into(), Value::String(command.into()));
        doc.insert("config_sha256".into(), Value::String(self.hash.clone()));
        doc.insert("seed".into(), Value::Number(self.seed.into()));
        if let Value::Object(m) = body {
            doc.extend(m);
        }
        let mut text = String::new();
        write_json(&Value::Object(doc), 0, &mut text);
        text.push('\n');
        fs::write(self.path(name)?, text)
    }

    /// CSV with a `#` provenance line, a header, and 17-digit rows.
    pub fn csv<I>(&self, name: &str, header: &[String], rows: I) -> io::Result<()>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let mut out = io::BufWriter::new(fs::File::create(self.path(name)?)?);
        writeln!(out, "# config_sha256={} seed={}", self.hash, self.seed)?;
        writeln!(out, "{}", header.join(","))?;
        for row in rows {
            let cells: Vec<String> = row.into_iter().map(fmt).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        out.flush()
    }
}

/// `x1x, x1y, …` column names for `n` vortices.
pub fn position_header(n: usize) -> Vec<String> {
    (1..=n).flat_map(|i| [format!("x{i}x"), format!("x{i}y")]).collect()
}
