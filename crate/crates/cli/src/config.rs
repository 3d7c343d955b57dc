//! Flat `key=value` option files.
//!
//! Keys are the long flag names (`batch-size=64`; underscores also accepted).
//! `#` starts a comment line. Values given on the command line win.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    origin: String,
    values: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| CliError::Usage(format!("{origin}:{}: {msg}", i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(bad("empty key"));
            }
            if values.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
                return Err(bad(&format!("duplicate key '{key}'")));
            }
        }
        Ok(ConfigFile {
            origin: origin.to_string(),
            values,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Rejects keys the current command does not understand.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        for (key, (line, _)) in &self.values {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "{}:{line}: unknown key '{key}' (valid: {})",
                    self.origin,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, raw)) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("{}:{line}: invalid value for '{key}': {e}", self.origin))),
        }
    }

    /// The flag value when given, otherwise the file value.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}
