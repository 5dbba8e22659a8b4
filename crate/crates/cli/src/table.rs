//! Row-oriented output tables written as CSV or as a JSON array of objects
//! with the same columns.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(u64),
    Float(f64),
    Text(String),
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl Value {
    fn to_field(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            // Display gives the shortest string that reads back bit-exact.
            Value::Float(v) => v.to_string(),
            Value::Text(s) => s.clone(),
        }
    }
}

struct Row<'a> {
    columns: &'a [String],
    values: &'a [Value],
}

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (c, v) in self.columns.iter().zip(self.values) {
            match v {
                Value::Int(x) => map.serialize_entry(c, x)?,
                Value::Float(x) => map.serialize_entry(c, x)?,
                Value::Text(x) => map.serialize_entry(c, x)?,
            }
        }
        map.end()
    }
}

enum Sink {
    Csv(Box<csv::Writer<BufWriter<File>>>),
    Json { out: BufWriter<File>, rows: usize },
}

/// Streams rows to `<dir>/<stem>.<ext>`. The file appears under its final
/// name only after [`TableWriter::finish`].
pub struct TableWriter {
    columns: Vec<String>,
    sink: Sink,
    tmp: PathBuf,
    path: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

impl TableWriter {
    pub fn create(
        dir: &Path,
        stem: &str,
        format: Format,
        columns: Vec<String>,
    ) -> Result<Self, CliError> {
        let name = format!("{stem}.{}", format.extension());
        let path = dir.join(&name);
        let tmp = dir.join(format!(".{name}.tmp"));
        let file = BufWriter::new(File::create(&tmp).map_err(io_err(&tmp))?);
        let sink = match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(file);
                w.write_record(&columns).map_err(csv_err(&tmp))?;
                Sink::Csv(Box::new(w))
            }
            Format::Json => Sink::Json { out: file, rows: 0 },
        };
        Ok(Self {
            columns,
            sink,
            tmp,
            path,
        })
    }

    pub fn row(&mut self, values: &[Value]) -> Result<(), CliError> {
        debug_assert_eq!(values.len(), self.columns.len());
        match &mut self.sink {
            Sink::Csv(w) => w
                .write_record(values.iter().map(Value::to_field))
                .map_err(csv_err(&self.tmp)),
            Sink::Json { out, rows } => {
                let lead: &[u8] = if *rows == 0 { b"[\n  " } else { b",\n  " };
                *rows += 1;
                out.write_all(lead).map_err(io_err(&self.tmp))?;
                let row = Row {
                    columns: &self.columns,
                    values,
                };
                serde_json::to_writer(&mut *out, &row).map_err(|e| CliError::Io {
                    path: self.tmp.clone(),
                    source: e.into(),
                })
            }
        }
    }

    /// Flushes and moves the file into place; returns its final path.
    pub fn finish(self) -> Result<PathBuf, CliError> {
        let tmp = self.tmp;
        match self.sink {
            Sink::Csv(mut w) => w.flush().map_err(io_err(&tmp))?,
            Sink::Json { mut out, rows } => {
                let tail: &[u8] = if rows == 0 { b"[]\n" } else { b"\n]\n" };
                out.write_all(tail)
                    .and_then(|_| out.flush())
                    .map_err(io_err(&tmp))?;
            }
        }
        fs::rename(&tmp, &self.path).map_err(io_err(&self.path))?;
        Ok(self.path)
    }
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// A table read back from disk, every cell as text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path, format: Format) -> Result<Self, CliError> {
        match format {
            Format::Csv => {
                let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
                let columns = r
                    .headers()
                    .map_err(csv_err(path))?
                    .iter()
                    .map(String::from)
                    .collect();
                let rows = r
                    .records()
                    .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
                    .collect::<Result<_, _>>()
                    .map_err(csv_err(path))?;
                Ok(Self { columns, rows })
            }
            Format::Json => {
                let text = fs::read_to_string(path).map_err(io_err(path))?;
                let records: Vec<serde_json::Map<String, serde_json::Value>> =
                    serde_json::from_str(&text).map_err(|e| CliError::Data {
                        path: path.to_path_buf(),
                        message: e.to_string(),
                    })?;
                let columns: Vec<String> = records
                    .first()
                    .map_or(Vec::new(), |r| r.keys().cloned().collect());
                let rows = records
                    .into_iter()
                    .map(|r| {
                        columns
                            .iter()
                            .map(|c| match r.get(c) {
                                Some(serde_json::Value::String(s)) => s.clone(),
                                Some(v) => v.to_string(),
                                None => String::new(),
                            })
                            .collect()
                    })
                    .collect();
                Ok(Self { columns, rows })
            }
        }
    }

    pub fn column(&self, path: &Path, name: &str) -> Result<usize, CliError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Data {
                path: path.to_path_buf(),
                message: format!("missing column `{name}`"),
            })
    }
}

/// Parses a numeric cell, naming the file on failure.
pub fn parse_cell<T: std::str::FromStr>(path: &Path, cell: &str) -> Result<T, CliError> {
    cell.parse().map_err(|_| CliError::Data {
        path: path.to_path_buf(),
        message: format!("cannot parse `{cell}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(format: Format) {
        let dir = tempfile::tempdir().unwrap();
        let mut w = TableWriter::create(
            dir.path(),
            "t",
            format,
            vec!["step".into(), "name".into(), "x".into()],
        )
        .unwrap();
        w.row(&[3usize.into(), "a,b".into(), 0.1f64.into()])
            .unwrap();
        w.row(&[4usize.into(), "c".into(), (-1.0f64 / 3.0).into()])
            .unwrap();
        let path = w.finish().unwrap();
        let t = Table::read(&path, format).unwrap();
        assert_eq!(t.columns, vec!["step", "name", "x"]);
        assert_eq!(t.rows[0][1], "a,b");
        let x: f64 = parse_cell(&path, &t.rows[1][2]).unwrap();
        assert_eq!(x, -1.0 / 3.0);
        assert!(!dir.path().join(".t.csv.tmp").exists());
    }

    #[test]
    fn csv_roundtrip() {
        roundtrip(Format::Csv);
    }

    #[test]
    fn json_roundtrip() {
        roundtrip(Format::Json);
    }

    #[test]
    fn empty_json_is_an_array() {
        let dir = tempfile::tempdir().unwrap();
        let w = TableWriter::create(dir.path(), "e", Format::Json, vec!["a".into()]).unwrap();
        let path = w.finish().unwrap();
        assert_eq!(fs::read_to_string(path).unwrap(), "[]\n");
    }
}
