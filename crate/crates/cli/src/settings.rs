//! Flat `key = value` configuration merged from defaults, an optional file
//! and command-line flags, in that order of precedence.

use std::collections::BTreeMap;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::error::CliError;

/// A recognised key and its default, if any.
pub type Key = (&'static str, Option<&'static str>);

/// Keys naming files or execution policy; they are not echoed into outputs
/// because they cannot change the numbers.
const NOT_ECHOED: [&str; 5] = ["input", "out", "level_fn", "exec", "config"];

#[derive(Debug, Clone)]
pub struct Settings {
    keys: Vec<Key>,
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new(keys: Vec<Key>) -> Self {
        let values = keys.iter().filter_map(|(k, d)| d.map(|d| (k.to_string(), d.to_string()))).collect();
        Settings { keys, values }
    }

    fn known(&self, key: &str) -> bool {
        self.keys.iter().any(|(k, _)| *k == key)
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn merge_file(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::ConfigLine { line: i + 1, reason: format!("expected `key = value`, got {line:?}") });
            };
            let k = k.trim();
            if !self.known(k) {
                return Err(CliError::ConfigLine { line: i + 1, reason: format!("unknown key `{k}`") });
            }
            self.values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &'static str, value: String) {
        debug_assert!(self.known(key), "{key}");
        self.values.insert(key.to_string(), value);
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).filter(|s| !s.is_empty())
    }

    pub fn required(&self, key: &'static str) -> Result<&str, CliError> {
        self.raw(key).ok_or_else(|| CliError::config(key, "is required"))
    }

    pub fn get<T: FromStr>(&self, key: &'static str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.required(key)?;
        s.parse().map_err(|e: T::Err| CliError::config(key, format!("invalid value {s:?}: {e}")))
    }

    pub fn opt<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(_) => self.get(key).map(Some),
        }
    }

    pub fn list<T: FromStr>(&self, key: &'static str) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.required(key)?;
        s.split(',')
            .map(|p| p.trim().parse().map_err(|e: T::Err| CliError::config(key, format!("invalid item {p:?}: {e}"))))
            .collect()
    }

    pub fn date(&self, key: &'static str) -> Result<Option<NaiveDate>, CliError> {
        self.raw(key)
            .map(|s| tailrisk::io::parse_date(s).ok_or_else(|| CliError::config(key, format!("invalid date {s:?}"))))
            .transpose()
    }

    /// `YYYY-MM-DD:YYYY-MM-DD`.
    pub fn date_range(&self, key: &'static str) -> Result<Option<(NaiveDate, NaiveDate)>, CliError> {
        let Some(s) = self.raw(key) else { return Ok(None) };
        let bad = || CliError::config(key, format!("expected START:END dates, got {s:?}"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let (a, b) = (tailrisk::io::parse_date(a).ok_or_else(bad)?, tailrisk::io::parse_date(b).ok_or_else(bad)?);
        if a > b {
            return Err(CliError::config(key, format!("start {a} is after end {b}")));
        }
        Ok(Some((a, b)))
    }

    pub fn range(&self, key: &'static str) -> Result<(f64, f64), CliError> {
        let s = self.required(key)?;
        let bad = || CliError::config(key, format!("expected LO:HI, got {s:?}"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if !(a < b) {
            return Err(bad());
        }
        Ok((a, b))
    }

    pub fn flag(&self, key: &'static str) -> Result<bool, CliError> {
        match self.raw(key) {
            None | Some("false") | Some("0") | Some("no") => Ok(false),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some(s) => Err(CliError::config(key, format!("expected true or false, got {s:?}"))),
        }
    }

    /// The resolved values that affect results, sorted by key.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.values.iter().filter(|(k, _)| !NOT_ECHOED.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}
