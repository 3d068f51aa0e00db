//! Atomic file output and CSV helpers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Files written by one command. Each file is staged under a temporary
/// name and renamed into place; if the command fails, every file it already
/// committed is removed again.
#[derive(Debug, Default)]
pub struct Outputs {
    committed: Vec<PathBuf>,
    done: bool,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        let tmp = staging_path(path);
        let result = (|| -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, path)
        })();
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            return Err(CliError::Runtime(format!("cannot write {}: {e}", path.display())));
        }
        self.committed.push(path.to_path_buf());
        Ok(())
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.committed
    }

    /// Keeps the written files.
    pub fn finish(mut self) {
        self.done = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.done {
            for p in &self.committed {
                let _ = fs::remove_file(p);
            }
        }
    }
}

fn staging_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.partial-{}", std::process::id()))
}

/// Locale-independent shortest round-trip text for a real number.
pub fn real(x: f64) -> String {
    format!("{x}")
}

/// CSV document with a fixed header, rendered to bytes.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
    width: usize,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> CliResult<Self> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(header.iter().map(|h| h.as_ref()))?;
        Ok(Self {
            writer,
            width: header.len(),
        })
    }

    pub fn row(&mut self, fields: &[String]) -> CliResult<()> {
        debug_assert_eq!(fields.len(), self.width);
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn into_bytes(self) -> CliResult<Vec<u8>> {
        self.writer
            .into_inner()
            .map_err(|e| CliError::Runtime(format!("csv buffer: {e}")))
    }
}

/// Reads two named columns of a CSV file as `(α, value)` pairs, skipping
/// rows where either field is empty.
pub fn read_columns(path: &Path, alpha_col: &str, value_col: &str) -> CliResult<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("{} has no column {name:?}", path.display())))
    };
    let (ia, iv) = (find(alpha_col)?, find(value_col)?);
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let (a, v) = (record.get(ia).unwrap_or(""), record.get(iv).unwrap_or(""));
        if a.is_empty() || v.is_empty() {
            continue;
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Runtime(format!("{}: row {}: bad number {s:?}", path.display(), line + 2)))
        };
        out.push((parse(a)?, parse(v)?));
    }
    Ok(out)
}
