use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; a repeated key is an error.
pub fn parse_kv(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(err("empty key".into()));
        }
        if out.iter().any(|(k, _)| k == key) {
            return Err(err(format!("key '{key}' given twice")));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

pub fn format_kv(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Parses a `key=value` command-line override.
pub fn parse_assignment(text: &str) -> Result<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("expected key=value, got '{text}'")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Parses an integer list: comma-separated items, each a single value or an
/// inclusive range `start:end[:step]` (also written `start..end`).
pub fn parse_u64_list(text: &str) -> Result<Vec<u64>> {
    let bad = |item: &str, why: String| Error::Usage(format!("bad list item '{item}': {why}"));
    let num = |item: &str, s: &str| -> Result<u64> {
        s.trim().parse::<u64>().map_err(|e| bad(item, e.to_string()))
    };
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let normalized = item.replace("..", ":");
        let parts: Vec<&str> = normalized.split(':').collect();
        let (start, end, step) = match parts.as_slice() {
            [v] => {
                let v = num(item, v)?;
                (v, v, 1)
            }
            [a, b] => (num(item, a)?, num(item, b)?, 1),
            [a, b, s] => (num(item, a)?, num(item, b)?, num(item, s)?),
            _ => return Err(bad(item, "too many ':'".into())),
        };
        if step == 0 {
            return Err(bad(item, "step must be positive".into()));
        }
        if end < start {
            return Err(bad(item, "range end precedes its start".into()));
        }
        let mut v = start;
        while v <= end {
            out.push(v);
            match v.checked_add(step) {
                Some(next) => v = next,
                None => break,
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Usage(format!("empty list '{text}'")));
    }
    Ok(out)
}

pub fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    parse_u64_list(text)?
        .into_iter()
        .map(|v| usize::try_from(v).map_err(|_| Error::Usage(format!("value {v} out of range"))))
        .collect()
}

pub fn join<T: Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Resolved parameters of one command, consumed key by key.
pub struct Params {
    command: &'static str,
    map: BTreeMap<String, String>,
}

impl Params {
    pub fn new(command: &'static str, pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        Params {
            command,
            map: pairs.into_iter().collect(),
        }
    }

    pub fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    /// A key with no default; the error suggests a typical value.
    pub fn require(&mut self, key: &str, suggestion: &str) -> Result<String> {
        self.take(key).ok_or_else(|| {
            Error::Config(format!(
                "{}: missing required key '{key}' (for example: {key} = {suggestion})",
                self.command
            ))
        })
    }

    pub fn parse_or<T>(&mut self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| Error::Config(format!("{}: key '{key}': cannot parse '{v}': {e}", self.command))),
        }
    }

    /// Remaining keys, in order; used to hand leftovers to a nested config.
    pub fn drain(&mut self) -> Vec<(String, String)> {
        std::mem::take(&mut self.map).into_iter().collect()
    }

    /// Fails on any key nobody consumed.
    pub fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            None => Ok(()),
            Some(key) => Err(Error::Config(format!("{}: unknown key '{key}'", self.command))),
        }
    }
}
