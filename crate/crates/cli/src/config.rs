//! Layered key/value settings: INI file (general section, then the section
//! named after the command), overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use ini::Ini;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>, command: &str) -> Result<Self> {
        let mut s = Settings::default();
        let Some(path) = path else {
            return Ok(s);
        };
        let ini = Ini::load_from_file(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for (k, v) in ini.general_section().iter() {
            s.set(k, v);
        }
        if let Some(section) = ini.section(Some(command)) {
            for (k, v) in section.iter() {
                s.set(k, v);
            }
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.trim().replace('-', "_"), value.into().trim().to_string());
    }

    pub fn set_opt<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v.to_string());
        }
    }

    /// Fills `key` only if nothing set it yet.
    pub fn fallback(&mut self, key: &str, value: impl Into<String>) {
        self.values.entry(key.to_string()).or_insert_with(|| value.into());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|_| CliError::Config(format!("invalid value {v:?} for {key}"))))
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, fallback: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(fallback))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| CliError::Config(format!("missing setting {key}")))
    }

    /// Parses `time:size, time:size, ...`.
    pub fn jumps(&self, key: &str) -> Result<Vec<(f64, f64)>> {
        let Some(raw) = self.raw(key) else {
            return Ok(Vec::new());
        };
        raw.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|item| {
                let (t, v) = item
                    .split_once(':')
                    .ok_or_else(|| CliError::Config(format!("{key}: expected time:size, got {item:?}")))?;
                let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| CliError::Config(format!("{key}: bad number {s:?}")));
                Ok((parse(t)?, parse(v)?))
            })
            .collect()
    }
}
