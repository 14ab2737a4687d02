//! Atomic file emission: every artifact is staged in a temporary file in
//! the destination directory and renamed into place, so readers never see
//! a partially written file and an interrupted run leaves no torn output.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::CliError;

/// Writes `bytes` to `path` atomically, creating parent directories.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let stage = || -> std::io::Result<()> {
        let mut tmp = NamedTempFile::new_in(dir)?;
        tmp.write_all(bytes)?;
        tmp.flush()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    };
    stage().map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Serializes `value` as pretty JSON (with a trailing newline) and writes
/// it atomically. Non-finite floats serialize as `null`.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("cannot encode {}: {e}", path.display())))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Serializes one CSV row per record (header from the field names) and
/// writes the file atomically.
pub fn write_csv_records<S: Serialize>(path: &Path, rows: &[S]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| CliError::Config(format!("cannot encode {}: {e}", path.display())))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(format!("cannot encode {}: {e}", path.display())))?;
    write_atomic(path, &bytes)
}

/// Writes a CSV with an explicit header and pre-rendered rows atomically.
pub fn write_csv_rows(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let encode_err =
        |e: csv::Error| CliError::Config(format!("cannot encode {}: {e}", path.display()));
    w.write_record(header).map_err(encode_err)?;
    for row in rows {
        w.write_record(&row).map_err(encode_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(format!("cannot encode {}: {e}", path.display())))?;
    write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_existing_content_completely() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"first version, quite long").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"second");
        // No stray temporary files left behind.
        let leftovers = fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 1);
    }

    #[test]
    fn csv_rows_render_header_and_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv_rows(
            &path,
            &["a", "b"],
            vec![vec!["1".to_string(), "2.5".to_string()]],
        )
        .unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a,b\n1,2.5\n");
    }

    #[test]
    fn parent_directories_are_created() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep/nested/out.json");
        write_json(&path, &serde_json::json!({"k": 1})).unwrap();
        assert!(path.exists());
    }
}
