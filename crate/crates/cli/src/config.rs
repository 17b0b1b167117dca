//! Flat `key = value` run configurations.
//!
//! One pair per line, `#` starts a comment, blank lines are ignored. Every
//! key must be consumed by the subcommand; leftovers are reported with their
//! line number.

use crate::error::{CliError, CliResult};
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, (usize, String)>,
    used: RefCell<BTreeSet<String>>,
}

impl Config {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {line}: expected `key = value`, got `{body}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(CliError::Config(format!("line {line}: invalid key `{k}`")));
            }
            if v.is_empty() {
                return Err(CliError::Config(format!("line {line}: `{k}` has no value")));
            }
            if let Some((first, _)) = entries.insert(k.to_string(), (line, v.to_string())) {
                return Err(CliError::Config(format!("line {line}: `{k}` already set on line {first}")));
            }
        }
        Ok(Config { entries, used: RefCell::default() })
    }

    pub fn read(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        let v = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v.1.as_str())
    }

    fn location(&self, key: &str) -> String {
        match self.entries.get(key) {
            Some((line, _)) => format!("line {line}: "),
            None => String::new(),
        }
    }

    fn convert<T: FromStr>(&self, key: &str, v: &str) -> CliResult<T> {
        v.parse::<T>()
            .map_err(|_| CliError::Config(format!("{}invalid value `{v}` for `{key}`", self.location(key))))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.raw(key).map(|v| self.convert(key, v)).transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> CliResult<T> {
        self.get(key)?.ok_or_else(|| CliError::Config(format!("missing required field `{key}`")))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        v.split(',').map(|s| self.convert(key, s.trim())).collect::<CliResult<Vec<T>>>().map(Some)
    }

    pub fn error(&self, key: &str, msg: impl std::fmt::Display) -> CliError {
        CliError::Config(format!("{}`{key}`: {msg}", self.location(key)))
    }

    /// Fails on keys no reader asked for.
    pub fn finish(&self) -> CliResult<()> {
        let used = self.used.borrow();
        let unknown: Vec<String> = self
            .entries
            .iter()
            .filter(|(k, _)| !used.contains(*k))
            .map(|(k, (line, _))| format!("line {line}: unknown key `{k}`"))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(unknown.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_comments_and_lists() {
        let c = Config::parse("# run\nspeed.exponent = 0.5  # p\nlevels = 64, 128,256\n\nname=mean\n").unwrap();
        assert_eq!(c.require::<f64>("speed.exponent").unwrap(), 0.5);
        assert_eq!(c.list::<usize>("levels").unwrap().unwrap(), vec![64, 128, 256]);
        assert_eq!(c.get_or("missing", 3usize).unwrap(), 3);
        assert_eq!(c.raw("name"), Some("mean"));
        c.finish().unwrap();
    }

    #[test]
    fn reports_line_and_field() {
        let e = Config::parse("a = 1\nbroken line\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let c = Config::parse("x = abc\n").unwrap();
        let e = c.require::<f64>("x").unwrap_err().to_string();
        assert!(e.contains("line 1") && e.contains("`x`"), "{e}");
        let e = c.require::<f64>("speed.exponent").unwrap_err().to_string();
        assert!(e.contains("speed.exponent"), "{e}");
        let c = Config::parse("a = 1\nb = 2\n").unwrap();
        c.raw("a");
        let e = c.finish().unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("`b`"), "{e}");
        assert!(Config::parse("a = 1\na = 2").is_err());
    }
}
