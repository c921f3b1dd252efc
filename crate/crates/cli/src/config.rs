//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are skipped. Keys are the long flag
//! names (`n`, `r`, `omega2-min`, `L`, ...). Flags given on the command line win.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;

use crate::error::CliError;

pub const KNOWN_KEYS: &[&str] = &[
    "n",
    "r",
    "omega2",
    "m",
    "n2",
    "max-index",
    "rep",
    "field",
    "mode-index",
    "window",
    "omega2-min",
    "omega2-max",
    "steps",
    "kind",
    "range",
    "column",
    "samples",
    "L",
    "figure",
    "out",
    "format",
    "output",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
            let key = k.trim().trim_start_matches("--").replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Flag value if given, otherwise the parsed config entry.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`"))),
        }
    }

    pub fn pick_enum<T: ValueEnum>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            None => Ok(None),
            Some(v) => T::from_str(v, true)
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config key `{key}`: invalid value `{v}`"))),
        }
    }

    pub fn pick_flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        Ok(self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}

pub fn required<T>(v: Option<T>, key: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required option --{key} (flag or config key)")))
}
