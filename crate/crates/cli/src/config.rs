//! `key=value` config files. Blank lines and lines starting with `#` are
//! skipped; keys are the long flag names without dashes.

use std::collections::BTreeMap;
use std::path::Path;

pub const KEYS: [&str; 10] = ["seed", "n", "depth", "tol", "qmax", "out", "format", "lo", "hi", "pairs"];

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Config(BTreeMap<String, String>);

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(format!("line {}: unknown key {k:?}", i + 1));
            }
            map.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Config(map))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }

    /// `flag` if given, else the parsed config value, else `None`.
    pub fn pick<T: std::str::FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, String> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| format!("config: bad value {v:?} for {key}")),
        }
    }
}
