use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    UInt(u64),
    Float(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(v) => Some(v as f64),
            Cell::UInt(v) => Some(v as f64),
            Cell::Float(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::UInt(v) => write!(f, "{v}"),
            Cell::Float(v) if v.is_nan() => f.write_str("NaN"),
            Cell::Float(v) if v.is_infinite() => f.write_str(if *v > 0.0 { "inf" } else { "-inf" }),
            Cell::Float(v) => write!(f, "{v:.16e}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(s) if s.contains([',', '"', '\n']) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => f.write_str(s),
            Cell::Missing => Ok(()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::UInt(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// Tabular experiment output with `#`-prefixed metadata lines. The first
/// column is always the experiment id.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    experiment: String,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    metadata: Vec<(String, String)>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            columns: std::iter::once("experiment")
                .chain(columns.iter().copied())
                .map(str::to_string)
                .collect(),
            rows: Vec::new(),
            metadata: vec![
                ("experiment".into(), experiment.to_string()),
                ("version".into(), env!("CARGO_PKG_VERSION").to_string()),
            ],
        }
    }

    pub fn experiment(&self) -> &str {
        &self.experiment
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn meta(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    /// Appends a row; `row` omits the leading experiment id.
    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() + 1 != self.columns.len() {
            return Err(Error::Data(format!(
                "{} report row has {} fields, expected {}",
                self.experiment,
                row.len(),
                self.columns.len() - 1
            )));
        }
        let mut full = Vec::with_capacity(self.columns.len());
        full.push(Cell::Text(self.experiment.clone()));
        full.extend(row);
        self.rows.push(full);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column; non-numeric cells are skipped.
    pub fn float_column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .column_index(name)
            .ok_or_else(|| Error::Data(format!("no column `{name}`")))?;
        Ok(self.rows.iter().filter_map(|r| r[i].as_f64()).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.metadata {
            writeln!(w, "# {k}: {v}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            writeln!(w, "{}", fields.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("report output is UTF-8")
    }
}
