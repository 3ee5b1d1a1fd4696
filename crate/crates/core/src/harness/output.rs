//! Tabular artifacts with provenance columns, written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Leading columns of every CSV row.
pub const PROVENANCE: [&str; 3] = ["config_hash", "version", "seed"];

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip decimal form, so equal floats print equal bytes.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, hash: &str, seed: u64) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = PROVENANCE.iter().copied().chain(self.columns.iter().map(|s| s.as_str())).collect();
        w.write_record(&header).map_err(csv_err)?;
        let seed = seed.to_string();
        for row in &self.rows {
            let rec = [hash, VERSION, seed.as_str()].into_iter().chain(row.iter().map(|s| s.as_str()));
            w.write_record(rec).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    /// Fixed-width rendering for the terminal.
    pub fn render(&self) -> String {
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|c| self.rows.iter().map(|r| r[c].len()).chain([self.columns[c].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            cells.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect::<Vec<_>>().join("  ")
        };
        let mut out = line(&self.columns);
        for r in &self.rows {
            out.push('\n');
            out.push_str(&line(r));
        }
        out
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.json`. Both are staged as temp
/// files in `dir` and only renamed into place once both are complete.
pub fn write_artifacts<J: Serialize>(dir: &Path, name: &str, csv: &[u8], json: &J) -> Result<Artifacts> {
    fs::create_dir_all(dir)?;
    let stage = |bytes: &[u8]| -> Result<NamedTempFile> {
        let mut t = NamedTempFile::new_in(dir)?;
        t.write_all(bytes)?;
        t.as_file().sync_all()?;
        Ok(t)
    };
    let mut json_bytes = serde_json::to_vec_pretty(json)?;
    json_bytes.push(b'\n');
    let tc = stage(csv)?;
    let tj = stage(&json_bytes)?;
    let out = Artifacts {
        csv: dir.join(format!("{name}.csv")),
        json: dir.join(format!("{name}.json")),
    };
    tc.persist(&out.csv).map_err(|e| Error::Io(e.error))?;
    tj.persist(&out.json).map_err(|e| Error::Io(e.error))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_carries_provenance_and_escapes() {
        let mut t = Table::new(&["n", "label"]);
        t.push(vec!["4".into(), "a,b".into()]);
        let bytes = t.to_csv("abc", 9).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text, format!("config_hash,version,seed,n,label\nabc,{VERSION},9,4,\"a,b\"\n"));
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(1.0), "1.0");
    }

    #[test]
    fn artifacts_land_without_leftover_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_artifacts(dir.path(), "x", b"h\n1\n", &serde_json::json!({"k": 1})).unwrap();
        assert_eq!(fs::read(&a.csv).unwrap(), b"h\n1\n");
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 2);
    }
}
