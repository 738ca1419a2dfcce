//! `key = value` text with `#` comments, as used by config and sequence files.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                reason: format!("expected 'key = value', got '{content}'"),
            })?;
            let key = key.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    reason: "empty key".into(),
                });
            }
            if let Some((first, _)) = entries.get(&key) {
                return Err(Error::Parse {
                    line,
                    reason: format!("duplicate key '{key}' (first set on line {first})"),
                });
            }
            entries.insert(key, (line, value.trim().to_string()));
        }
        Ok(KeyValues { entries })
    }

    pub fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    pub fn required(&self, key: &str) -> Result<(usize, &str)> {
        self.get(key).ok_or_else(|| Error::Parse {
            line: 0,
            reason: format!("missing required key '{key}'"),
        })
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<T>().map(Some).map_err(|e| Error::Parse {
                line,
                reason: format!("{key}: cannot parse '{v}': {e}"),
            }),
        }
    }

    pub fn parse_required<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.required(key)?;
        Ok(self.parse_value(key)?.expect("checked above"))
    }

    /// Comma-separated list.
    pub fn parse_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<T>().map_err(|e| Error::Parse {
                        line,
                        reason: format!("{key}: cannot parse '{s}': {e}"),
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    pub fn parse_list_required<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.required(key)?;
        Ok(self.parse_list(key)?.expect("checked above"))
    }

    /// Fails on the first key not in `known`.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        let mut unknown: Vec<(usize, &String)> = self
            .entries
            .iter()
            .filter(|(k, _)| !known.contains(&k.as_str()))
            .map(|(k, (l, _))| (*l, k))
            .collect();
        unknown.sort();
        match unknown.first() {
            None => Ok(()),
            Some((line, key)) => Err(Error::Parse {
                line: *line,
                reason: format!("unknown key '{key}'"),
            }),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}
