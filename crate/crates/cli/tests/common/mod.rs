#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn qgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgraph")).args(args).output().expect("qgraph runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn schema(name: &str) -> Value {
    read_json(&root().join("schemas").join(format!("{name}.schema.json")))
}

/// Errors of `v` against the subset of JSON Schema used by the shipped
/// schemas. Unknown keywords are ignored.
pub fn check(schema: &Value, v: &Value, at: &str, errs: &mut Vec<String>) {
    let s = match schema.as_object() {
        Some(s) => s,
        None => return,
    };
    if let Some(t) = s.get("type") {
        let types: Vec<&str> = match t {
            Value::String(x) => vec![x.as_str()],
            Value::Array(xs) => xs.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        if !types.iter().any(|t| has_type(v, t)) {
            errs.push(format!("{at}: expected {types:?}, got {v}"));
            return;
        }
    }
    if let Some(c) = s.get("const") {
        if c != v {
            errs.push(format!("{at}: expected {c}, got {v}"));
        }
    }
    if let Some(Value::Array(opts)) = s.get("enum") {
        if !opts.contains(v) {
            errs.push(format!("{at}: {v} not in enum"));
        }
    }
    if let Some(Value::Array(alts)) = s.get("anyOf") {
        let ok = alts.iter().any(|a| {
            let mut e = Vec::new();
            check(a, v, at, &mut e);
            e.is_empty()
        });
        if !ok {
            errs.push(format!("{at}: matches no alternative"));
        }
    }
    if let Some(x) = v.as_f64() {
        if s.get("minimum").and_then(Value::as_f64).is_some_and(|m| x < m) {
            errs.push(format!("{at}: {x} below minimum"));
        }
        if s.get("exclusiveMinimum").and_then(Value::as_f64).is_some_and(|m| x <= m) {
            errs.push(format!("{at}: {x} not above exclusive minimum"));
        }
    }
    if let Some(Value::String(p)) = s.get("pattern") {
        // the only pattern in use is the config hash
        let x = v.as_str().unwrap_or("");
        if p.starts_with("^sha256:") && !(x.len() == 71 && x.starts_with("sha256:")) {
            errs.push(format!("{at}: {x:?} does not match {p}"));
        }
    }
    if let Value::Array(items) = v {
        if s.get("minItems").and_then(Value::as_u64).is_some_and(|m| (items.len() as u64) < m)
            || s.get("maxItems").and_then(Value::as_u64).is_some_and(|m| (items.len() as u64) > m)
        {
            errs.push(format!("{at}: wrong item count {}", items.len()));
        }
        if let Some(it) = s.get("items") {
            for (i, x) in items.iter().enumerate() {
                check(it, x, &format!("{at}[{i}]"), errs);
            }
        }
    }
    if let Value::Object(m) = v {
        if let Some(Value::Array(req)) = s.get("required") {
            for k in req.iter().filter_map(Value::as_str) {
                if !m.contains_key(k) {
                    errs.push(format!("{at}: missing {k}"));
                }
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        let extra = s.get("additionalProperties");
        for (k, x) in m {
            match (props.and_then(|p| p.get(k)), extra) {
                (Some(ps), _) => check(ps, x, &format!("{at}.{k}"), errs),
                (None, Some(Value::Bool(false))) => errs.push(format!("{at}: unexpected key {k}")),
                (None, Some(es)) => check(es, x, &format!("{at}.{k}"), errs),
                (None, None) => {}
            }
        }
    }
}

fn has_type(v: &Value, t: &str) -> bool {
    match t {
        "null" => v.is_null(),
        "boolean" => v.is_boolean(),
        "integer" => v.is_i64() || v.is_u64(),
        "number" => v.is_number(),
        "string" => v.is_string(),
        "array" => v.is_array(),
        "object" => v.is_object(),
        _ => false,
    }
}

pub fn assert_valid(schema_name: &str, path: &Path) {
    let mut errs = Vec::new();
    check(&schema(schema_name), &read_json(path), "$", &mut errs);
    assert!(errs.is_empty(), "{} against {schema_name}: {errs:#?}", path.display());
}
