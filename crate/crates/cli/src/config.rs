//! JSON run configs. A config file holds `"command"` plus the same keys as
//! the command's long flags (snake_case); flags given on the command line
//! win.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

/// Accepts a string, a number, a bool or an array of those, and keeps it as
/// the text a flag would have carried (arrays joined with commas).
pub fn flag_text<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    fn scalar(v: &Value) -> Option<String> {
        match v {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            Value::Bool(b) => Some(b.to_string()),
            _ => None,
        }
    }
    let v = Option::<Value>::deserialize(d)?;
    match v {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(items)) => items
            .iter()
            .map(|x| scalar(x).ok_or_else(|| serde::de::Error::custom("nested values are not flags")))
            .collect::<Result<Vec<_>, _>>()
            .map(|v| Some(v.join(","))),
        Some(Value::Object(_)) => Ok(Some(v.unwrap().to_string())),
        Some(other) => Ok(scalar(&other)),
    }
}

pub fn load(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    match serde_json::from_str::<Value>(&text)
        .with_context(|| format!("parsing config {}", path.display()))?
    {
        Value::Object(m) => Ok(m),
        _ => bail!("config {} must hold a JSON object", path.display()),
    }
}

/// Overlays the flags that were given on top of the config values.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: &Map<String, Value>) -> Result<T> {
    let mut merged: Map<String, Value> = config
        .iter()
        .filter(|(k, _)| k.as_str() != "command")
        .map(|(k, v)| (k.replace('-', "_"), v.clone()))
        .collect();
    if let Value::Object(given) = serde_json::to_value(flags)? {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).context("config does not match the command's options")
}
