//! Flat `key = value` configuration files. Command-line flags take
//! precedence over file values, which take precedence over defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

pub const KNOWN_KEYS: &[&str] = &[
    "b0_frac",
    "b1_frac",
    "gamma",
    "xi",
    "window",
    "redundancy",
    "samples",
    "sequence",
    "dilation",
    "threshold",
    "band",
    "m",
    "rate",
    "methods",
    "redundancies",
    "seeds",
    "signal_seed",
    "families",
    "ns",
    "dim",
    "ratio",
    "dwt_r",
    "queries",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::config(format!("line {}: expected key=value", i + 1)));
            };
            let (k, v) = (k.trim().replace('-', "_"), v.trim().to_string());
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(CliError::config(format!("line {}: unknown key '{k}'", i + 1)));
            }
            values.insert(k, v);
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Resolves settings and records every resolved value, in order, for the
/// CSV comment line.
#[derive(Debug)]
pub struct Settings<'a> {
    file: &'a ConfigFile,
    pub resolved: Vec<(String, String)>,
}

impl<'a> Settings<'a> {
    pub fn new(file: &'a ConfigFile) -> Self {
        Self { file, resolved: Vec::new() }
    }

    fn file_value<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        self.file
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::config(format!("{key} = {v}: {e}"))))
            .transpose()
    }

    /// Flag, else file, else `default`.
    pub fn pick<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => v,
            None => self.file_value(key)?.unwrap_or(default),
        };
        self.resolved.push((key.to_string(), value.to_string()));
        Ok(value)
    }

    /// Flag, else file, or `None` when neither is set.
    pub fn maybe<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => self.file_value(key)?,
        };
        if let Some(v) = &value {
            self.resolved.push((key.to_string(), v.to_string()));
        }
        Ok(value)
    }

    /// Comma-separated list from a flag or the file.
    pub fn list<T: FromStr + Display>(&mut self, key: &str, flag: Option<&str>, default: &str) -> CliResult<Vec<T>>
    where
        T::Err: Display,
    {
        let raw = flag.map(str::to_string).or_else(|| self.file.get(key).map(str::to_string)).unwrap_or(default.to_string());
        let items = raw
            .split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| CliError::config(format!("{key}: '{s}': {e}"))))
            .collect::<CliResult<Vec<T>>>()?;
        if items.is_empty() {
            return Err(CliError::config(format!("{key}: empty list")));
        }
        let joined: Vec<String> = items.iter().map(|v| v.to_string()).collect();
        self.resolved.push((key.to_string(), joined.join(",")));
        Ok(items)
    }

    pub fn comment(&self, command: &str) -> String {
        let mut s = format!("qmc-ltft {command}");
        for (k, v) in &self.resolved {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves_with_precedence() {
        let file = ConfigFile::parse("# comment\ngamma = 8\n\nredundancy=3 # trailing\nsignal-seed = 4\n").unwrap();
        let mut s = Settings::new(&file);
        assert_eq!(s.pick("gamma", None, 6.0).unwrap(), 8.0);
        assert_eq!(s.pick("redundancy", Some(5.0), 1.0).unwrap(), 5.0);
        assert_eq!(s.pick("xi", None, 6.0).unwrap(), 6.0);
        assert_eq!(s.pick("signal_seed", None, 0u64).unwrap(), 4);
        assert_eq!(s.comment("x"), "qmc-ltft x gamma=8 redundancy=5 xi=6 signal_seed=4");
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ConfigFile::parse("gamma 6").is_err());
        assert!(ConfigFile::parse("colour = red").is_err());
        let file = ConfigFile::parse("gamma = six").unwrap();
        assert_eq!(Settings::new(&file).pick("gamma", None, 6.0).unwrap_err().kind, "config-error");
    }

    #[test]
    fn lists() {
        let file = ConfigFile::parse("ns = 8, 16,32").unwrap();
        let mut s = Settings::new(&file);
        assert_eq!(s.list::<usize>("ns", None, "1").unwrap(), vec![8, 16, 32]);
        assert_eq!(s.list::<usize>("redundancies", Some("1,2"), "4").unwrap(), vec![1, 2]);
        assert!(s.list::<usize>("seeds", Some(","), "4").is_err());
    }
}
