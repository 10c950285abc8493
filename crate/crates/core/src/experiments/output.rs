use std::fmt;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::harmonic::GridFunction;

/// One CSV field. Floats print in shortest round-trip form.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(v) => f.write_str(v),
            Cell::Empty => Ok(()),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Float(v) if v.is_finite() => s.serialize_f64(*v),
            // JSON has no infinities; keep the CSV spelling.
            Cell::Float(v) => s.serialize_str(&v.to_string()),
            Cell::Bool(v) => s.serialize_bool(*v),
            Cell::Text(v) => s.serialize_str(v),
            Cell::Empty => s.serialize_none(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Fixed header and one record per parameter tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)?
            .into_iter()
            .map(|c| match c {
                Cell::Float(v) => Some(*v),
                Cell::Int(v) => Some(*v as f64),
                _ => None,
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_string))?;
        }
        w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))
    }

    /// An array of objects keyed by the CSV header.
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let records: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(k, v)| Ok((k.clone(), serde_json::to_value(v)?)))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        let mut out = serde_json::to_vec_pretty(&records)?;
        out.push(b'\n');
        Ok(out)
    }
}

/// Parse CSV bytes and write them back with the same writer settings.
pub fn reemit_csv(bytes: &[u8]) -> Result<Vec<u8>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
    let mut w = csv::Writer::from_writer(Vec::new());
    for rec in r.records() {
        w.write_record(&rec?)?;
    }
    w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))
}

#[derive(Clone, Debug)]
pub enum Artifact {
    Table { name: String, table: Table },
    Grid { name: String, function: GridFunction },
}

impl Artifact {
    pub fn name(&self) -> &str {
        match self {
            Artifact::Table { name, .. } | Artifact::Grid { name, .. } => name,
        }
    }

    pub fn table(&self) -> Option<&Table> {
        match self {
            Artifact::Table { table, .. } => Some(table),
            Artifact::Grid { .. } => None,
        }
    }

    pub fn file_name(&self, format: Format) -> String {
        format!("{}.{}", self.name(), format.extension())
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match (self, format) {
            (Artifact::Table { table, .. }, Format::Csv) => table.to_csv(),
            (Artifact::Table { table, .. }, Format::Json) => table.to_json(),
            (Artifact::Grid { function, .. }, Format::Csv) => {
                let mut buf = Vec::new();
                function.write_csv(&mut buf)?;
                Ok(buf)
            }
            (Artifact::Grid { function, .. }, Format::Json) => {
                let mut out = function.to_json()?.into_bytes();
                out.push(b'\n');
                Ok(out)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub(crate) fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    std::fs::write(dir.join(name), bytes)?;
    Ok(())
}
