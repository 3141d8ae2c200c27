//! Flat key=value run manifests. A manifest records every resolved parameter
//! (plus the library version and RNG seed) so a run can be reproduced
//! byte-for-byte with `--from-manifest`. Result keys may be appended; loaders
//! simply ignore keys they do not ask for.

use std::fmt::Display;
use std::path::Path;

/// 17 significant digits: round-trips every f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Ordered key=value pairs with LF line endings.
#[derive(Debug, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, fmt_f64(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Fetch and parse a required key.
    pub fn require<T>(&self, key: &str) -> Result<T, String>
    where
        T: std::str::FromStr,
        T::Err: Display,
    {
        let raw = self
            .get(key)
            .ok_or_else(|| format!("manifest is missing key '{key}'"))?;
        raw.parse()
            .map_err(|e| format!("manifest key '{key}': {e}"))
    }

    /// Fetch and parse an optional key.
    pub fn optional<T>(&self, key: &str) -> Result<Option<T>, String>
    where
        T: std::str::FromStr,
        T::Err: Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| format!("manifest key '{key}': {e}")),
        }
    }

    /// Parse a comma-joined list value.
    pub fn require_list<T>(&self, key: &str) -> Result<Vec<T>, String>
    where
        T: std::str::FromStr,
        T::Err: Display,
    {
        let raw = self
            .get(key)
            .ok_or_else(|| format!("manifest is missing key '{key}'"))?;
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|e| format!("manifest key '{key}': {e}"))
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), String> {
        std::fs::write(path, self.render())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(format!(
                    "{}:{}: expected key=value, got '{line}'",
                    path.display(),
                    lineno + 1
                ));
            };
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(Self { entries })
    }

    /// Reject manifests written by a different library version or RNG seed;
    /// byte-identical reproduction is only promised within one build lineage.
    pub fn check_provenance(&self, experiment: &str) -> Result<(), String> {
        let exp = self.get("experiment").unwrap_or("<missing>");
        if exp != experiment {
            return Err(format!(
                "manifest records experiment '{exp}', but this is the {experiment} subcommand"
            ));
        }
        let version = self.get("version").unwrap_or("<missing>");
        if version != parasdc::VERSION {
            return Err(format!(
                "manifest version '{version}' does not match library version '{}'",
                parasdc::VERSION
            ));
        }
        let seed: u64 = self.require("seed")?;
        if seed != parasdc::rng::Lcg::DEFAULT_SEED {
            return Err(format!(
                "manifest seed {seed} is not the built-in seed {}",
                parasdc::rng::Lcg::DEFAULT_SEED
            ));
        }
        Ok(())
    }
}

/// Common provenance header shared by all experiment manifests.
pub fn provenance(experiment: &str) -> Manifest {
    let mut m = Manifest::new();
    m.push("experiment", experiment);
    m.push("version", parasdc::VERSION);
    m.push("seed", parasdc::rng::Lcg::DEFAULT_SEED);
    m
}
