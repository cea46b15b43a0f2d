//! Flat `key = value` configuration files. Keys are the long flag names
//! (`dg-degree`, `gamma-rule`, ...); `#` starts a comment.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config file {}", path.display()))?;
        text.parse()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// `cli` if given, else the parsed file value, else `None`.
    pub fn merge<T>(&self, key: &str, cli: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key '{key}': cannot parse '{raw}': {e}")),
        }
    }

    pub fn flag(&self, key: &str, cli: bool) -> Result<bool> {
        if cli {
            return Ok(true);
        }
        Ok(self.merge::<bool>(key, None)?.unwrap_or(false))
    }
}

impl FromStr for ConfigFile {
    type Err = anyhow::Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {}: expected key = value", i + 1);
            };
            let key = k.trim().trim_start_matches("--").replace('_', "-");
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }
}
