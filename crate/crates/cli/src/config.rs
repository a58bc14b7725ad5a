//! Flat key/value config files with one section per command, plus the
//! flag-override resolution logic. Flags always win over file values;
//! unknown keys are rejected.
//!
//! ```text
//! # comment
//! [respond]
//! kernel = exp:1.0:2.0
//! chi0 = 1.0
//! ```
//!
//! Keys before any section header land in the anonymous section `""`, which
//! is how plain parameter files (e.g. for `correlate`) are written.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::{fail_input, CliError};

pub type Section = BTreeMap<String, String>;

/// Parse the whole file into sections.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, Section>, CliError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| fail_input(format!("line {}: unterminated section header", lineno + 1)))?;
            current = name.trim().to_string();
            sections.entry(current.clone()).or_default();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            fail_input(format!("line {}: expected key = value, got '{line}'", lineno + 1))
        })?;
        let key = key.trim().to_string();
        let prev = sections
            .entry(current.clone())
            .or_default()
            .insert(key.clone(), value.trim().to_string());
        if prev.is_some() {
            return Err(fail_input(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(sections)
}

pub fn load_section(path: &Path, section: &str) -> Result<Section, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail_input(format!("config error: cannot read {}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(fail_input(format!("config error: {} is empty", path.display())));
    }
    let mut sections = parse_config(&text)?;
    Ok(sections.remove(section).unwrap_or_default())
}

/// Merges command-line flags over a config section, tracking which keys were
/// consumed (leftovers are rejected) and recording every resolved value for
/// the run manifest.
pub struct Resolver {
    section: Section,
    resolved: Section,
    context: String,
}

impl Resolver {
    /// Load the `[command]` section of `config` (when given).
    pub fn new(config: Option<&Path>, command: &str) -> Result<Self, CliError> {
        let section = match config {
            Some(path) => load_section(path, command)?,
            None => Section::new(),
        };
        Ok(Self { section, resolved: Section::new(), context: command.to_string() })
    }

    /// Resolver over an anonymous-section parameter file.
    pub fn from_section(section: Section, context: &str) -> Self {
        Self { section, resolved: Section::new(), context: context.to_string() }
    }

    /// Resolve one key: explicit flag beats file value beats default; a
    /// missing required key is an error.
    pub fn take<T>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: Option<T>,
    ) -> Result<T, CliError>
    where
        T: FromStr + Display,
    {
        let file_value = self.section.remove(key);
        if let Some(v) = flag {
            self.resolved.insert(key.to_string(), v.to_string());
            return Ok(v);
        }
        if let Some(raw) = file_value {
            let parsed = raw.parse::<T>().map_err(|_| {
                fail_input(format!("config key '{key}' = '{raw}' cannot be parsed"))
            })?;
            self.resolved.insert(key.to_string(), parsed.to_string());
            return Ok(parsed);
        }
        if let Some(v) = default {
            self.resolved.insert(key.to_string(), v.to_string());
            return Ok(v);
        }
        Err(fail_input(format!(
            "missing required parameter '{key}' for {} (flag or config key)",
            self.context
        )))
    }

    /// Like [`Resolver::take`] but the value may be absent entirely.
    pub fn take_optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
    {
        let file_value = self.section.remove(key);
        if let Some(v) = flag {
            self.resolved.insert(key.to_string(), v.to_string());
            return Ok(Some(v));
        }
        if let Some(raw) = file_value {
            let parsed = raw.parse::<T>().map_err(|_| {
                fail_input(format!("config key '{key}' = '{raw}' cannot be parsed"))
            })?;
            self.resolved.insert(key.to_string(), parsed.to_string());
            return Ok(Some(parsed));
        }
        Ok(None)
    }

    /// Reject leftover (unknown) keys and hand back the resolved map.
    pub fn finish(self) -> Result<Section, CliError> {
        if let Some(key) = self.section.keys().next() {
            return Err(fail_input(format!(
                "unknown config key '{key}' in section [{}]",
                self.context
            )));
        }
        Ok(self.resolved)
    }
}
