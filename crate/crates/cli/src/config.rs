//! Key = value configuration files with strict key checking.
//!
//! Every subcommand accepts `--config FILE`; explicit command-line flags
//! override file values. Unknown keys are rejected so typos fail loudly
//! instead of silently running with defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub struct ConfigMap {
    values: BTreeMap<String, String>,
    consumed: std::cell::RefCell<Vec<String>>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl ConfigMap {
    pub fn empty() -> ConfigMap {
        ConfigMap {
            values: BTreeMap::new(),
            consumed: Default::default(),
        }
    }

    pub fn load(path: &Path) -> Result<ConfigMap, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let key = k.trim().to_string();
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(ConfigError(format!("duplicate key {key:?}")));
            }
        }
        Ok(ConfigMap {
            values,
            consumed: Default::default(),
        })
    }

    fn take(&self, key: &str) -> Option<&String> {
        self.consumed.borrow_mut().push(key.to_string());
        self.values.get(key)
    }

    /// Flag value if given, else config value, else default.
    pub fn resolve<T: std::str::FromStr>(
        &self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T, ConfigError> {
        match (flag, self.take(key)) {
            (Some(v), _) => Ok(v),
            (None, Some(raw)) => raw
                .parse()
                .map_err(|_| ConfigError(format!("bad value for {key:?}: {raw:?}"))),
            (None, None) => Ok(default),
        }
    }

    /// Like `resolve` but without a default.
    pub fn resolve_opt<T: std::str::FromStr>(
        &self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>, ConfigError> {
        match (flag, self.take(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(raw)) => raw
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("bad value for {key:?}: {raw:?}"))),
            (None, None) => Ok(None),
        }
    }

    pub fn resolve_path(&self, key: &str, flag: Option<PathBuf>) -> Option<PathBuf> {
        match (flag, self.take(key)) {
            (Some(v), _) => Some(v),
            (None, Some(raw)) => Some(PathBuf::from(raw)),
            (None, None) => None,
        }
    }

    /// Fails if the file contained keys this command never looked at.
    pub fn ensure_consumed(&self) -> Result<(), ConfigError> {
        let consumed = self.consumed.borrow();
        let unknown: Vec<&String> = self
            .values
            .keys()
            .filter(|k| !consumed.iter().any(|c| c == *k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(ConfigError(format!("unknown keys: {unknown:?}")))
        }
    }

    /// Everything that was set, for the certificate's config echo.
    pub fn entries(&self) -> Vec<(String, String)> {
        self.values
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

/// `K1,K2` pair used for seed modes and grid sizes.
#[derive(Clone, Copy, Debug)]
pub struct IndexPair(pub i64, pub i64);

impl std::str::FromStr for IndexPair {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `a,b`, got {s:?}"))?;
        Ok(IndexPair(
            a.trim().parse().map_err(|_| format!("bad integer {a:?}"))?,
            b.trim().parse().map_err(|_| format!("bad integer {b:?}"))?,
        ))
    }
}
