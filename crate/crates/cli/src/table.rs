//! Tabular output in CSV or JSON.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

/// Homogeneous numeric records under named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    /// Extra top-level keys for the JSON form.
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta<'a> {
    pub config: &'a RunConfig,
    pub version: &'static str,
}

impl<'a> Meta<'a> {
    pub fn new(config: &'a RunConfig) -> Self {
        Self {
            config,
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Shortest decimal that parses back to the same `f64`.
///
/// Plain notation in the usual range, exponent notation for very small or
/// very large magnitudes.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn write_csv<W: Write>(mut w: W, table: &Table, meta: &Meta) -> io::Result<()> {
    writeln!(w, "# nmwalk {}", meta.version)?;
    let echo = serde_json::to_string(meta.config).map_err(io::Error::other)?;
    writeln!(w, "# config: {echo}")?;
    writeln!(w, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()
}

pub fn write_json<W: Write>(mut w: W, table: &Table, meta: &Meta) -> io::Result<()> {
    let mut data = Map::new();
    for (c, name) in table.columns.iter().enumerate() {
        let col: Vec<Value> = table
            .rows
            .iter()
            .map(|r| serde_json::Number::from_f64(r[c]).map_or(Value::Null, Value::Number))
            .collect();
        data.insert(name.to_string(), Value::Array(col));
    }
    let mut doc = Map::new();
    doc.insert(
        "meta".into(),
        serde_json::to_value(meta).map_err(io::Error::other)?,
    );
    doc.insert("data".into(), Value::Object(data));
    for (k, v) in &table.extra {
        doc.insert(k.clone(), v.clone());
    }
    serde_json::to_writer(&mut w, &Value::Object(doc)).map_err(io::Error::other)?;
    writeln!(w)?;
    w.flush()
}

/// Writes `table` to `path`, or to stdout when `path` is `None`.
pub fn write_table(
    table: &Table,
    format: Format,
    path: Option<&Path>,
    meta: &Meta,
) -> CliResult<()> {
    let name = path.map_or("<stdout>".to_string(), |p| p.display().to_string());
    let io_err = |source| CliError::Io {
        path: name.clone(),
        source,
    };
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Csv => write_csv(sink, table, meta),
        Format::Json => write_json(sink, table, meta),
    }
    .map_err(io_err)
}
