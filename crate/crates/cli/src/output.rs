use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use myxo_core::homogeneous::RNG_ALGORITHM;

use crate::config::CliError;

/// One CSV cell. Reals are written with 17 significant digits.
pub enum Cell {
    Real(f64),
    Int(usize),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| io_err(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> Result<(), CliError> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
        w.write_record(header).map_err(|e| io_err(&path, e))?;
        for row in rows {
            w.write_record(row.iter().map(Cell::render))
                .map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))
    }

    pub fn json(&self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))
    }

    /// Flat little-endian `f64` dump.
    pub fn binary(&self, name: &str, data: &[f64]) -> Result<(), CliError> {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
        let mut w = BufWriter::new(file);
        for v in data {
            w.write_all(&v.to_le_bytes()).map_err(|e| io_err(&path, e))?;
        }
        w.flush().map_err(|e| io_err(&path, e))
    }
}

#[derive(Serialize)]
pub struct Metadata<'a, P: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    /// The resolved parameters; passing them back through `--config`
    /// reproduces the run.
    pub config: &'a P,
    pub seed: Option<u64>,
    pub rng: &'static str,
    pub threads: usize,
    pub wall_time_s: f64,
}

impl<'a, P: Serialize> Metadata<'a, P> {
    pub fn new(command: &'a str, config: &'a P, seed: Option<u64>, threads: usize, wall: Duration) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: concat!("v", env!("CARGO_PKG_VERSION")),
            command,
            config,
            seed,
            rng: RNG_ALGORITHM,
            threads,
            wall_time_s: wall.as_secs_f64(),
        }
    }
}
