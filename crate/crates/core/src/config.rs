//! `key = value` configuration files for the command-line tool.
//!
//! One setting per line; `#` starts a comment. Keys use the long flag
//! names without the leading dashes (`iterations`, `proposal-sigma`, ...).
//! Values given on the command line take precedence over the file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValueConfig {
    values: BTreeMap<String, String>,
}

impl KeyValueConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "empty key".into(),
                });
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Keys not in `known`.
    pub fn unknown_keys<'a>(&'a self, known: &[&str]) -> Vec<&'a str> {
        self.values
            .keys()
            .map(String::as_str)
            .filter(|k| !known.contains(k))
            .collect()
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::InvalidConfig(format!("cannot parse `{v}` for `{key}`")))
            })
            .transpose()
    }

    /// The flag value if given, else the file value, else `default`.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// Like [`KeyValueConfig::resolve`] with no default.
    pub fn resolve_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

/// Parses a comma-separated list.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse()
                .map_err(|_| Error::InvalidConfig(format!("cannot parse list item `{p}`")))
        })
        .collect()
}

/// Comma-separated integers; items may be inclusive ranges `lo..hi`.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let bound = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidConfig(format!("bad range `{item}`")))
            };
            let (lo, hi) = (bound(lo)?, bound(hi)?);
            if lo > hi {
                return Err(Error::InvalidConfig(format!("empty range `{item}`")));
            }
            out.extend(lo..=hi);
        } else {
            out.extend(parse_list::<usize>(item)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_resolve() {
        let cfg = KeyValueConfig::parse(
            "# schedule\niterations = 2000\nt0=500 # start\nproposal_sigma = 0.25\n\n",
        )
        .unwrap();
        assert_eq!(cfg.resolve::<usize>(None, "iterations", 1).unwrap(), 2000);
        assert_eq!(cfg.resolve(Some(10usize), "iterations", 1).unwrap(), 10);
        assert_eq!(cfg.resolve::<f64>(None, "gamma", 0.5).unwrap(), 0.5);
        assert_eq!(cfg.get::<f64>("proposal-sigma").unwrap(), Some(0.25));
        assert_eq!(
            cfg.unknown_keys(&["iterations", "t0"]),
            vec!["proposal-sigma"]
        );
    }

    #[test]
    fn parse_errors() {
        assert!(KeyValueConfig::parse("iterations 20").is_err());
        assert!(KeyValueConfig::parse("= 3").is_err());
        let cfg = KeyValueConfig::parse("iterations = many").unwrap();
        assert!(cfg.get::<usize>("iterations").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_usize_list("0..3,7").unwrap(), vec![0, 1, 2, 3, 7]);
        assert_eq!(parse_usize_list("5").unwrap(), vec![5]);
        assert!(parse_usize_list("3..1").is_err());
        assert_eq!(parse_list::<f64>("0.5, -0.5").unwrap(), vec![0.5, -0.5]);
    }
}
