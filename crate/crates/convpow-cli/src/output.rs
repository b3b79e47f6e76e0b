//! Atomic file output and CSV formatting.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::CliError;

/// Where a command sends its artifact: a file inside the output directory or stdout.
#[derive(Debug, Clone)]
pub struct Sink {
    pub dir: Option<PathBuf>,
}

impl Sink {
    /// Writes `bytes` to `<dir>/<file_name>` through a temporary file in the same
    /// directory followed by a rename, or to stdout when no directory is set.
    pub fn emit(&self, file_name: &str, bytes: &[u8]) -> Result<Option<PathBuf>, CliError> {
        match &self.dir {
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes).map_err(CliError::io)?;
                out.flush().map_err(CliError::io)?;
                Ok(None)
            }
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(CliError::io)?;
                let target = dir.join(file_name);
                write_atomic(&target, bytes)?;
                Ok(Some(target))
            }
        }
    }
}

pub fn write_atomic(target: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = target.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir).map_err(CliError::io)?;
    tmp.write_all(bytes).map_err(CliError::io)?;
    tmp.as_file().sync_all().map_err(CliError::io)?;
    tmp.persist(target).map_err(|e| CliError::io(e.error))?;
    Ok(())
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// CSV with a leading `# key=value, ...` metadata line and a header row.
pub fn csv_bytes(
    meta: &[(&str, String)],
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let line = meta
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(", ");
    writeln!(buf, "# {line}").map_err(CliError::io)?;
    let mut writer = csv::Writer::from_writer(buf);
    writer
        .write_record(header)
        .map_err(|e| CliError::io(e.into()))?;
    for row in rows {
        writer
            .write_record(row)
            .map_err(|e| CliError::io(e.into()))?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::io(e.into_error()))
}
