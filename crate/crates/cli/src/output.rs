//! Artifact serialisation. JSON uses sorted keys and 17 significant digits
//! for every float; CSV uses the shortest round-trip form. Every artifact
//! starts with a header naming the tool version, config hash, seed and
//! command line.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Pretty-printed JSON with sorted keys and floats as `d.dddddddddddddddde±x`.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&json_float(n.as_f64().expect("f64 number")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            // arrays of scalars stay on one line
            if a.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in a.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &m[*k], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// 17 significant digits in exponent form.
pub fn json_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Shortest string that parses back to `x`, in exponent form outside
/// `[1e-4, 1e15)`.
pub fn csv_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub struct Artifacts {
    dir: PathBuf,
    header: Value,
    csv_header: String,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(config: &RunConfig, command_line: &[String]) -> Result<Self, CliError> {
        let dir = PathBuf::from(&config.out);
        fs::create_dir_all(&dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        let hash = config.hash();
        let header = json!({
            "tool": "qgraph",
            "version": VERSION,
            "config-hash": hash,
            "seed": config.seed,
            "command-line": command_line,
        });
        let mut csv_header = String::new();
        let _ = writeln!(csv_header, "# tool: qgraph {VERSION}");
        let _ = writeln!(csv_header, "# config-hash: {hash}");
        let _ = writeln!(csv_header, "# seed: {}", config.seed);
        let _ = writeln!(csv_header, "# command-line: {}", command_line.join(" "));
        Ok(Artifacts { dir, header, csv_header, written: Vec::new() })
    }

    /// Write `{"schema": ..., "header": ..., ...body}`.
    pub fn json(&mut self, name: &str, schema: &str, body: &impl Serialize) -> Result<(), CliError> {
        let mut m = Map::new();
        m.insert("schema".into(), Value::String(schema.into()));
        m.insert("header".into(), self.header.clone());
        match serde_json::to_value(body).map_err(|e| CliError::Runtime(e.to_string()))? {
            Value::Object(b) => {
                for (k, v) in b {
                    m.insert(k, v);
                }
            }
            other => {
                m.insert("result".into(), other);
            }
        }
        self.write(name, &canonical_json(&Value::Object(m)))
    }

    pub fn csv(&mut self, name: &str, columns: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let mut s = self.csv_header.clone();
        s.push_str(&columns.join(","));
        s.push('\n');
        for r in rows {
            let cells: Vec<String> = r.iter().map(|&x| csv_float(x)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        self.write(name, &s)
    }

    pub fn write(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.02214076e23, 0.0] {
            assert_eq!(json_float(x).parse::<f64>().unwrap(), x);
            assert_eq!(csv_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(json_float(0.1), "1.0000000000000001e-1");
        assert_eq!(csv_float(5.4424020845544874e-11), "5.4424020845544874e-11");
    }

    #[test]
    fn keys_are_sorted() {
        let v = json!({"b": 1, "a": {"d": 2.5, "c": [1, 2]}});
        let s = canonical_json(&v);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.find("\"c\"").unwrap() < s.find("\"d\"").unwrap());
        assert_eq!(serde_json::from_str::<Value>(&s).unwrap(), v);
    }
}
