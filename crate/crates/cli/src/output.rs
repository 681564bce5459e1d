//! JSON and CSV rendering of command results.

use clap::ValueEnum;
use ctmc_ldp::ExtendedReal;
use serde_json::{json, Map, Value};

/// Version of the output layout; bumped on incompatible key changes.
pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    /// Flattened `key,value` rows, nested keys joined with dots.
    Csv,
}

/// Writes an extended real under `key`, adding `"infinite"` alongside.
pub fn put_extended(map: &mut Map<String, Value>, key: &str, value: ExtendedReal) {
    match value {
        ExtendedReal::Finite(v) => {
            map.insert(key.to_string(), json!(v));
            map.insert("infinite".to_string(), json!(false));
        }
        ExtendedReal::Infinite => {
            map.insert(key.to_string(), json!("inf"));
            map.insert("infinite".to_string(), json!(true));
        }
    }
}

/// Non-finite floats become the strings `"inf"`, `"-inf"` or `"nan"`.
pub fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn render(command: &str, body: Map<String, Value>, format: Format) -> String {
    let mut map = Map::new();
    map.insert("schema".into(), json!(SCHEMA_VERSION));
    map.insert("command".into(), json!(command));
    map.extend(body);
    let value = Value::Object(map);
    match format {
        Format::Json => serde_json::to_string_pretty(&value).expect("serializable") + "\n",
        Format::Csv => {
            let mut rows = vec!["key,value".to_string()];
            flatten("", &value, &mut rows);
            rows.join("\n") + "\n"
        }
    }
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<String>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&join(k), v, rows)),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&join(&i.to_string()), v, rows)),
        Value::String(s) => rows.push(format!("{},{}", csv_field(prefix), csv_field(s))),
        other => rows.push(format!("{},{}", csv_field(prefix), other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_values() {
        let mut m = Map::new();
        put_extended(&mut m, "rate", ExtendedReal::Infinite);
        assert_eq!(m["rate"], json!("inf"));
        assert_eq!(m["infinite"], json!(true));
        assert_eq!(number(f64::NEG_INFINITY), json!("-inf"));
    }

    #[test]
    fn csv_rows() {
        let mut body = Map::new();
        body.insert("x".into(), json!({"a": [1, 2], "b": "p,q"}));
        let out = render("t", body, Format::Csv);
        assert_eq!(out, "key,value\nschema,1\ncommand,t\nx.a.0,1\nx.a.1,2\nx.b,\"p,q\"\n");
    }
}
