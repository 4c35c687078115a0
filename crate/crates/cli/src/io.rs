use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use roldarp_core::Instance;

pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// An error with a stable code, reported as one JSON line on stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub message: String,
    pub exit: u8,
}

impl CliError {
    pub fn usage(code: &str, message: impl Into<String>) -> Self {
        CliError { code: code.into(), message: message.into(), exit: EXIT_USAGE }
    }

    pub fn failed(code: &str, message: impl Into<String>) -> Self {
        CliError { code: code.into(), message: message.into(), exit: EXIT_FAILED }
    }

    /// Library errors render as `CODE: message`; the code picks the exit status.
    pub fn from_library(e: impl Display) -> Self {
        let text = e.to_string();
        let (code, message) = match text.split_once(": ") {
            Some((c, m)) if !c.is_empty() && c.chars().all(|ch| ch.is_ascii_uppercase() || ch == '_') => {
                (c.to_string(), m.to_string())
            }
            _ => ("ERROR".to_string(), text),
        };
        let exit = match code.as_str() {
            "INVALID_INSTANCE" | "INFEASIBLE_INPUT" | "INFEASIBLE_SCHEDULE" => EXIT_FAILED,
            _ => EXIT_USAGE,
        };
        CliError { code, message, exit }
    }

    pub fn report(&self) {
        let line = serde_json::json!({ "error": self.code, "message": self.message });
        eprintln!("{line}");
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn io_error(path: &Path, e: impl Display) -> CliError {
    CliError::usage("IO", format!("{}: {e}", path.display()))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

pub fn read_instance(path: &Path) -> CliResult<Instance> {
    Instance::from_json(&read_text(path)?).map_err(|e| CliError::usage("BAD_JSON", format!("{}: {e}", path.display())))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::usage("BAD_JSON", format!("{}: {e}", path.display())))
}

/// Stem of an input file, used as the instance id in reports.
pub fn instance_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| io_error(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_error(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

/// To `out` when given, else stdout.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|_| stdout.flush()).map_err(|e| io_error(Path::new("<stdout>"), e))
        }
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s.into_bytes()
}

pub fn emit_json<T: Serialize + ?Sized>(out: Option<&Path>, value: &T) -> CliResult<()> {
    emit(out, &to_json(value))
}

pub fn csv_bytes(rows: &[[String; 6]], header: [&str; 6]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// `ROLDARP_SEARCH_CAP`, if set, replaces the oracle's request guard.
pub fn search_cap() -> CliResult<usize> {
    match std::env::var("ROLDARP_SEARCH_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::usage("BAD_ENV", format!("ROLDARP_SEARCH_CAP={v} is not a count"))),
        Err(_) => Ok(roldarp_core::oracle::DEFAULT_SEARCH_CAP),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_codes_map_to_exit_status() {
        let e = CliError::from_library("HYPOTHESIS_VIOLATED: THM7 needs uniform revenues");
        assert_eq!((e.code.as_str(), e.exit), ("HYPOTHESIS_VIOLATED", EXIT_USAGE));
        let e = CliError::from_library("INVALID_INSTANCE: edge too long");
        assert_eq!(e.exit, EXIT_FAILED);
        let e = CliError::from_library("no code here: at all");
        assert_eq!(e.code, "ERROR");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
