//! Flat `key = value` configuration files.
//!
//! One setting per line, `#` starts a comment, keys are the long option
//! names without dashes (`samples = 200`, `delta1 = 0.2`). A flag given on
//! the command line always wins over the file, and the file wins over the
//! built-in default.

use std::collections::BTreeMap;
use std::fs;
use std::str::FromStr;

use crate::error::CliError;

/// Every key a config file may set.
pub const KEYS: &[&str] = &[
    "a",
    "alpha",
    "b",
    "convention",
    "delta",
    "delta1",
    "dim",
    "duration-granularity",
    "ensemble",
    "fill-granularity",
    "form",
    "format",
    "k",
    "linearity-tol",
    "mode",
    "n",
    "phi",
    "s",
    "samples",
    "seed",
    "steps",
    "stretch",
    "threads",
    "truncation",
    "unit-factor",
    "window",
];

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!("config line {}: expected key = value", i + 1)));
            };
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::usage(format!("config line {}: unknown key `{key}`", i + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Config { values })
    }

    pub fn load(path: &str) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read config {path}: {e}")))?;
        Self::parse(&text)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::usage(format!("config key `{key}`: cannot parse `{v}`"))),
        }
    }

    /// Command-line value if present, else the config value.
    pub fn pick<T: FromStr>(&self, cli: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        match cli {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn or<T: FromStr>(&self, cli: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.pick(cli, key)?.unwrap_or(default))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_spacing() {
        let c = Config::parse("# run\nsamples = 40  # more\n\nseed=7\ndelta_1 = 0.2\n").unwrap_err();
        assert!(c.message.contains("delta-1"));
        let c = Config::parse("# run\nsamples = 40  # more\n\nseed=7\n").unwrap();
        assert_eq!(c.get::<usize>("samples").unwrap(), Some(40));
        assert_eq!(c.or(Some(3u64), "seed", 0).unwrap(), 3);
        assert_eq!(c.or(None, "seed", 0u64).unwrap(), 7);
        assert_eq!(c.or(None, "threads", 1usize).unwrap(), 1);
    }

    #[test]
    fn rejects_unknown_and_garbage() {
        assert!(Config::parse("colour = red").is_err());
        assert!(Config::parse("samples").is_err());
        assert!(Config::parse("samples = many").unwrap().get::<usize>("samples").is_err());
    }
}
