//! Run settings merged from a `key = value` file and command-line flags.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Keys accepted in config files; flags use the same names with a `--` prefix.
pub const KEYS: &[&str] = &[
    "d",
    "alpha",
    "eps",
    "seed",
    "functions",
    "modes",
    "max-degree",
    "tol",
    "series-order",
    "levels",
    "beta",
    "family",
    "delta",
    "kind",
    "semigroup",
    "p",
    "gamma",
    "terms",
    "from",
    "to",
    "points",
    "suite",
    "threads",
    "out",
];

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    from_flags: BTreeSet<String>,
    read: RefCell<BTreeSet<String>>,
}

fn normalise(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
            let key = normalise(k);
            if !KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key '{key}'", n + 1);
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                bail!("line {}: duplicate key '{key}'", n + 1);
            }
        }
        Ok(Settings {
            values,
            ..Settings::default()
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Flags take precedence over file values.
    pub fn overlay<'a, I>(&mut self, flags: I)
    where
        I: IntoIterator<Item = (&'a str, Option<&'a String>)>,
    {
        for (k, v) in flags {
            if let Some(v) = v {
                self.values.insert(k.to_string(), v.clone());
                self.from_flags.insert(k.to_string());
            }
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        debug_assert!(KEYS.contains(&key), "unregistered key {key}");
        self.read.borrow_mut().insert(key.to_string());
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("{key} = '{v}': {e}")))
            .transpose()
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<T>()
                            .map_err(|e| anyhow!("{key} = '{v}': {e}"))
                    })
                    .collect::<Result<Vec<T>>>()
            })
            .transpose()
    }

    pub fn set<T: FromStr>(&self, key: &str, target: &mut T) -> Result<()>
    where
        T::Err: Display,
    {
        if let Some(v) = self.get(key)? {
            *target = v;
        }
        Ok(())
    }

    pub fn set_list<T: FromStr>(&self, key: &str, target: &mut Vec<T>) -> Result<()>
    where
        T::Err: Display,
    {
        if let Some(v) = self.list(key)? {
            if v.is_empty() {
                bail!("{key} must not be empty");
            }
            *target = v;
        }
        Ok(())
    }

    /// Fails when a flag was given that the command never read.
    pub fn reject_unused_flags(&self, command: &str) -> Result<()> {
        let read = self.read.borrow();
        let unused: Vec<String> = self
            .from_flags
            .difference(&read)
            .map(|k| format!("--{k}"))
            .collect();
        if !unused.is_empty() {
            bail!("{} not used by '{command}'", unused.join(", "));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_syntax_and_precedence() {
        let mut s =
            Settings::parse("# comment\nalpha = 0, 1.5\nmax_degree=4 # trailing\nseed = 3\n")
                .unwrap();
        let flag = "9".to_string();
        s.overlay([("seed", Some(&flag)), ("tol", None)]);
        assert_eq!(s.list::<f64>("alpha").unwrap(), Some(vec![0.0, 1.5]));
        assert_eq!(s.get::<usize>("max-degree").unwrap(), Some(4));
        assert_eq!(s.get::<u64>("seed").unwrap(), Some(9));
        assert_eq!(s.get::<f64>("tol").unwrap(), None);
        s.reject_unused_flags("x").unwrap();
    }

    #[test]
    fn bad_files_and_values() {
        assert!(Settings::parse("nonsense = 1").is_err());
        assert!(Settings::parse("alpha").is_err());
        assert!(Settings::parse("d = 1\nd = 2").is_err());
        let s = Settings::parse("d = two").unwrap();
        assert!(s.get::<usize>("d").is_err());
    }

    #[test]
    fn unread_flags_are_reported() {
        let mut s = Settings::default();
        let v = "1".to_string();
        s.overlay([("delta", Some(&v))]);
        let err = s.reject_unused_flags("ortho").unwrap_err().to_string();
        assert!(err.contains("--delta"), "{err}");
    }
}
