//! Flat `key=value` run manifests.
//!
//! A manifest records the command line that produced a set of outputs,
//! echoes the resolved plan and lists the derived replica seeds. Keys may
//! repeat; `arg` entries keep the original argument order so that the run
//! can be repeated with `rebvoter rerun`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> CliResult<String> {
        let mut out = String::new();
        for (k, v) in &self.entries {
            if k.contains('=') || k.contains('\n') || v.contains('\n') {
                return Err(CliError::Usage(format!("manifest entry {k:?} cannot be stored on one line")));
            }
            let _ = writeln!(out, "{k}={v}");
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("manifest line {}: expected key=value", i + 1)))?;
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Identifies the build that produced a run.
pub fn build_id() -> String {
    format!(
        "rebvoter-cli {} ({}, {}-{})",
        env!("CARGO_PKG_VERSION"),
        if cfg!(debug_assertions) { "debug" } else { "release" },
        std::env::consts::ARCH,
        std::env::consts::OS
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_keeps_order_and_repeats() {
        let mut m = Manifest::new();
        m.push("command", "sweep").push("arg", "--N").push("arg", "64").push("note", "a=b");
        let back = Manifest::parse(&m.render().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.get_all("arg"), vec!["--N", "64"]);
        assert_eq!(back.get("note"), Some("a=b"));
    }

    #[test]
    fn multiline_values_are_rejected() {
        let mut m = Manifest::new();
        m.push("x", "a\nb");
        assert!(m.render().is_err());
        assert!(Manifest::parse("no separator").is_err());
    }
}
