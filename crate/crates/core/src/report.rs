//! Serialization helpers shared by the report types.

use std::fmt::Display;

use serde::Serializer;
use serde_json::Value;

/// Serializes any displayable value as a JSON string.
pub fn ser_display<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Rewrites every JSON number in `v` as its decimal string.
pub fn stringify_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) => Value::String(n.to_string()),
        Value::Array(items) => Value::Array(items.into_iter().map(stringify_numbers).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, stringify_numbers(v))).collect()),
        other => other,
    }
}
