//! Plain-text `key=value` lines with `#` comments; the format every small
//! config and spec file in this crate uses.

use crate::error::{Error, Result};

/// Parsed key/value pairs; later keys override earlier ones.
pub struct KeyValues(Vec<(String, String)>);

pub fn parse_key_values(text: &str) -> Result<KeyValues> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("line {}: expected key=value, got {line:?}", lineno + 1))
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(KeyValues(pairs))
}

impl KeyValues {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Parse(format!("missing key {key:?}")))
    }

    pub fn parse_require<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| Error::Parse(format!("bad value for {key:?}: {raw:?}")))
    }

    pub fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| Error::Parse(format!("bad value for {key:?}: {raw:?}"))),
        }
    }
}
