//! Flat `section.key = value` configuration with line-anchored errors.
//!
//! One assignment per line, `#` starts a comment. Every key must be read by
//! the subcommand that runs; leftovers are reported as unknown so a typo
//! never silently falls back to a default.

use crate::error::CliError;
use std::cell::Cell;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    used: Cell<bool>,
}

#[derive(Debug)]
pub struct Config {
    name: String,
    dir: PathBuf,
    entries: Vec<Entry>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&path.display().to_string(), dir, &text)
    }

    pub fn parse(name: &str, dir: PathBuf, text: &str) -> Result<Self, CliError> {
        let mut entries: Vec<Entry> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| CliError::Config { file: name.to_string(), line: Some(line), message };
            let (key, value) =
                content.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let valid = !key.is_empty()
                && key
                    .split('.')
                    .all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'));
            if !valid {
                return Err(err(format!("malformed key `{key}`")));
            }
            if value.is_empty() {
                return Err(err(format!("`{key}` has no value")));
            }
            if let Some(prev) = entries.iter().find(|e| e.key == key) {
                return Err(err(format!("`{key}` already set on line {}", prev.line)));
            }
            entries.push(Entry { key: key.to_string(), value: value.to_string(), line, used: Cell::new(false) });
        }
        Ok(Config { name: name.to_string(), dir, entries })
    }

    fn entry(&self, key: &str) -> Option<&Entry> {
        let e = self.entries.iter().find(|e| e.key == key)?;
        e.used.set(true);
        Some(e)
    }

    fn error(&self, line: Option<usize>, message: String) -> CliError {
        CliError::Config { file: self.name.clone(), line, message }
    }

    /// Error anchored at the line that set `key`, or at the file when unset.
    pub fn invalid(&self, key: &str, message: impl std::fmt::Display) -> CliError {
        let line = self.entries.iter().find(|e| e.key == key).map(|e| e.line);
        self.error(line, format!("`{key}`: {message}"))
    }

    pub fn has_section(&self, section: &str) -> bool {
        let prefix = format!("{section}.");
        self.entries.iter().any(|e| e.key.starts_with(&prefix))
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.entry(key).map(|e| e.value.clone())
    }

    pub fn string_or(&self, key: &str, default: &str) -> String {
        self.string(key).unwrap_or_else(|| default.to_string())
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => parse_f64(&e.value)
                .map(Some)
                .ok_or_else(|| self.error(Some(e.line), format!("`{key}` expects a number, got `{}`", e.value))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn positive_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.f64_or(key, default)?;
        if !(v > 0.0) {
            return Err(self.invalid(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn i64_or(&self, key: &str, default: i64) -> Result<i64, CliError> {
        match self.entry(key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse()
                .map_err(|_| self.error(Some(e.line), format!("`{key}` expects an integer, got `{}`", e.value))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.entry(key) {
            None => Ok(default),
            Some(e) => e.value.parse().map_err(|_| {
                self.error(Some(e.line), format!("`{key}` expects a nonnegative integer, got `{}`", e.value))
            }),
        }
    }

    /// Comma-separated numbers.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(e) = self.entry(key) else { return Ok(None) };
        e.value
            .split(',')
            .map(|s| {
                parse_f64(s.trim())
                    .ok_or_else(|| self.error(Some(e.line), format!("`{key}` expects numbers, got `{}`", s.trim())))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn i64_list(&self, key: &str) -> Result<Option<Vec<i64>>, CliError> {
        let Some(e) = self.entry(key) else { return Ok(None) };
        e.value
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| self.error(Some(e.line), format!("`{key}` expects integers, got `{}`", s.trim())))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// Path relative to the directory of the config file.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.string(key).map(|p| self.dir.join(p))
    }

    /// Fails on the first key the run did not read.
    pub fn finish(&self, subcommand: &str) -> Result<(), CliError> {
        match self.entries.iter().find(|e| !e.used.get()) {
            Some(e) => Err(self.error(Some(e.line), format!("unknown key `{}` for `{subcommand}`", e.key))),
            None => Ok(()),
        }
    }

    /// All assignments, sorted by key.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.entries.iter().map(|e| (e.key.clone(), e.value.clone())).collect()
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}
