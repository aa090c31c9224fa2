//! Flat `key = value` configuration files.
//!
//! One assignment per line; `#` starts a comment; values are bare words,
//! numbers, comma-separated lists, or `lo..hi` level ranges. The echo
//! serialization is sorted and canonical so reruns can be diffed.

use std::collections::BTreeMap;

use crate::calibrate::LevelRange;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct FlatConfig {
    map: BTreeMap<String, String>,
}

impl FlatConfig {
    pub fn parse(text: &str) -> Result<FlatConfig> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            let value = value.trim().trim_matches('"');
            map.insert(key.to_string(), value.to_string());
        }
        Ok(FlatConfig { map })
    }

    pub fn from_file<P: AsRef<std::path::Path>>(path: P) -> Result<FlatConfig> {
        FlatConfig::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.map.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn get_str(&self, key: &str) -> Result<&str> {
        self.map
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    pub fn get_str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.map.get(key).map(|s| s.as_str()).unwrap_or(default)
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        self.get_str(key)?
            .parse()
            .map_err(|e| Error::Config(format!("key `{key}`: {e}")))
    }

    pub fn get_f64_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.contains(key) {
            self.get_f64(key)
        } else {
            Ok(default)
        }
    }

    pub fn get_u64(&self, key: &str) -> Result<u64> {
        self.get_str(key)?
            .parse()
            .map_err(|e| Error::Config(format!("key `{key}`: {e}")))
    }

    pub fn get_u64_or(&self, key: &str, default: u64) -> Result<u64> {
        if self.contains(key) {
            self.get_u64(key)
        } else {
            Ok(default)
        }
    }

    pub fn get_usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.get_u64_or(key, default as u64)? as usize)
    }

    pub fn get_i32(&self, key: &str) -> Result<i32> {
        self.get_str(key)?
            .parse()
            .map_err(|e| Error::Config(format!("key `{key}`: {e}")))
    }

    pub fn get_i32_or(&self, key: &str, default: i32) -> Result<i32> {
        if self.contains(key) {
            self.get_i32(key)
        } else {
            Ok(default)
        }
    }

    pub fn get_bool_or(&self, key: &str, default: bool) -> Result<bool> {
        if !self.contains(key) {
            return Ok(default);
        }
        match self.get_str(key)? {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(Error::Config(format!("key `{key}`: not a boolean: {other}"))),
        }
    }

    /// Comma-separated list of reals.
    pub fn get_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.get_str(key)?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("key `{key}`: {e}")))
            })
            .collect()
    }

    /// Level range in `lo..hi` form.
    pub fn get_levels(&self, key: &str) -> Result<LevelRange> {
        let s = self.get_str(key)?;
        let (lo, hi) = s
            .split_once("..")
            .ok_or_else(|| Error::Config(format!("key `{key}`: expected `lo..hi`, got {s}")))?;
        LevelRange::new(
            lo.trim()
                .parse()
                .map_err(|e| Error::Config(format!("key `{key}`: {e}")))?,
            hi.trim()
                .parse()
                .map_err(|e| Error::Config(format!("key `{key}`: {e}")))?,
        )
    }

    /// Canonical sorted echo, suitable for provenance files.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.map {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}
