//! Typed result tables, CSV/JSON rendering and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use tempfile::NamedTempFile;

use cfx_core::systems::fmt_ratio;
use cfx_core::CfSystem;

use crate::config::{Format, RunConfig};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // shortest representation that round-trips
            Cell::Float(v) => format!("{v:?}"),
            Cell::Str(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Str(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Self-describing system definition for the sidecar.
#[derive(Serialize)]
pub struct SystemDescription {
    pub name: String,
    pub dimension: usize,
    pub space: String,
    pub inversion: String,
    pub faces: String,
    /// Columns are the lattice generators in space coordinates.
    pub lattice_basis: Vec<Vec<String>>,
    /// Domain: `{ x : L x - lower in [0,1)^d }` with `L` the inverse basis.
    pub to_lattice: Vec<Vec<String>>,
    pub domain_lower: Vec<String>,
    pub shift: Option<Vec<String>>,
    pub experimental: bool,
}

impl SystemDescription {
    pub fn of(sys: &CfSystem) -> Self {
        let m = |rows: &[Vec<num_rational::Rational64>]| -> Vec<Vec<String>> {
            rows.iter().map(|r| r.iter().map(fmt_ratio).collect()).collect()
        };
        SystemDescription {
            name: sys.id().to_string(),
            dimension: sys.dim(),
            space: format!("{:?}", sys.space()),
            inversion: format!("{:?}", sys.inversion()),
            faces: format!("{:?}", sys.faces()),
            lattice_basis: m(sys.from_lattice()),
            to_lattice: m(sys.to_lattice()),
            domain_lower: sys.domain_lower().iter().map(fmt_ratio).collect(),
            shift: sys.shift().map(|a| a.iter().map(fmt_ratio).collect()),
            experimental: sys.is_experimental(),
        }
    }
}

fn stage(dir: &Path, bytes: &[u8]) -> Result<NamedTempFile, CliError> {
    let mut f = NamedTempFile::new_in(dir)?;
    f.write_all(bytes)?;
    f.flush()?;
    Ok(f)
}

/// Writes the table and its sidecar. Both files are staged as temporaries in
/// the target directory and only renamed into place once both are complete.
pub fn write_outputs(
    dir: &Path,
    stem: &str,
    table: &Table,
    cfg: &RunConfig,
    system: Option<&CfSystem>,
    summary: &Value,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let (name, body) = match cfg.format {
        Format::Csv => (format!("{stem}.csv"), table.to_csv()?),
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&table.to_json()).map_err(std::io::Error::other)?;
            v.push(b'\n');
            (format!("{stem}.json"), v)
        }
    };
    let meta_name = format!("{stem}.meta.json");
    let meta = json!({
        "config": cfg,
        "system": system.map(SystemDescription::of),
        "version": env!("CARGO_PKG_VERSION"),
        "outputs": [name],
        "summary": summary,
    });
    let mut meta_bytes = serde_json::to_vec_pretty(&meta).map_err(std::io::Error::other)?;
    meta_bytes.push(b'\n');

    let staged = [
        (stage(dir, &body)?, dir.join(&name)),
        (stage(dir, &meta_bytes)?, dir.join(&meta_name)),
    ];
    let mut written = Vec::new();
    for (tmp, target) in staged {
        tmp.persist(&target).map_err(|e| CliError::Io(e.error))?;
        written.push(target);
    }
    Ok(written)
}
