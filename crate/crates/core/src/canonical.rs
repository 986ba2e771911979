//! Canonical JSON: object keys sorted at every level, independent of the
//! `serde_json` map backend.

use serde_json::{Map, Value};

pub fn sort_keys(value: &Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<_> = map.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            let mut sorted = Map::new();
            for (k, v) in entries {
                sorted.insert(k.clone(), sort_keys(v));
            }
            Value::Object(sorted)
        }
        Value::Array(items) => Value::Array(items.iter().map(sort_keys).collect()),
        other => other.clone(),
    }
}

/// Compact form, used for hashing.
pub fn to_canonical_string(value: &Value) -> String {
    serde_json::to_string(&sort_keys(value)).expect("JSON value serializes")
}

/// Indented form with a trailing newline, used for files and HTTP bodies.
pub fn to_canonical_pretty(value: &Value) -> String {
    let mut out = serde_json::to_string_pretty(&sort_keys(value)).expect("JSON value serializes");
    out.push('\n');
    out
}
