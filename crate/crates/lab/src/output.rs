//! CSV tables with fixed float formatting, and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::LabError;

/// One CSV cell. Floats are written with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::F(v) => format!("{v:.16e}"),
            Cell::I(v) => v.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<i8> for Cell {
    fn from(v: i8) -> Self {
        Cell::I(i64::from(v))
    }
}

/// Column name and unit.
#[derive(Debug, Clone, Copy)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub file: &'static str,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Library operation that produced the values.
    pub op: &'static str,
}

impl Table {
    pub fn new(file: &'static str, columns: &[Column], op: &'static str) -> Self {
        Self { file, columns: columns.to_vec(), rows: Vec::new(), op }
    }

    pub fn push<I: IntoIterator<Item = Cell>>(&mut self, row: I) {
        let row: Vec<Cell> = row.into_iter().collect();
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub op: String,
    pub columns: Vec<String>,
    pub units: Vec<String>,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub experiment: String,
    pub version: &'static str,
    pub seed: u64,
    pub notes: Vec<String>,
    pub files: Vec<FileEntry>,
    pub parameters: &'a ExperimentConfig,
}

pub const MANIFEST_FILE: &str = "manifest.toml";

/// Writes `table` under `dir` and returns its manifest entry.
pub fn write_table(dir: &Path, table: &Table) -> Result<FileEntry, LabError> {
    let path = dir.join(table.file);
    let mut wtr = csv::Writer::from_path(&path)?;
    wtr.write_record(table.columns.iter().map(|c| c.name))?;
    for row in &table.rows {
        wtr.write_record(row.iter().map(|c| c.render()))?;
    }
    wtr.flush()?;
    drop(wtr);
    Ok(FileEntry {
        path: table.file.to_string(),
        op: table.op.to_string(),
        columns: table.columns.iter().map(|c| c.name.to_string()).collect(),
        units: table.columns.iter().map(|c| c.unit.to_string()).collect(),
        rows: table.rows.len(),
        sha256: file_digest(&path)?,
    })
}

pub fn file_digest(path: &Path) -> Result<String, LabError> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn write_manifest(dir: &Path, manifest: &Manifest<'_>) -> Result<PathBuf, LabError> {
    let text = toml::to_string_pretty(manifest).map_err(|e| LabError::Config(format!("manifest: {e}")))?;
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, text)?;
    Ok(path)
}
