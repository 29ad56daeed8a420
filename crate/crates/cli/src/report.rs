//! Output artifacts: row-per-iteration CSV traces and one-JSON-object-per-
//! run summaries (newline-delimited when sweeping).

use std::fs;
use std::path::Path;

use serde::Serialize;

/// Full-precision decimal rendering (17 significant digits) so trace files
/// round-trip and identical runs are byte-identical.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// One trace cell: integers stay integers, floats get full precision.
pub enum Cell {
    Int(usize),
    Num(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(k) => k.to_string(),
            Cell::Num(v) => num(*v),
        }
    }
}

pub fn write_trace(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> anyhow::Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub tol: f64,
    pub quad_tol: f64,
    pub inner_tol: Option<f64>,
}

/// Per-run summary. Field order is the serialization order; the first
/// eight fields are the stable schema, `details` carries mode-specific
/// extras.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub mode: String,
    pub converged: bool,
    pub final_point: Vec<f64>,
    pub iterations: usize,
    pub max_residual_last5: f64,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub wall_time: f64,
    pub run: usize,
    pub details: serde_json::Value,
}

pub fn write_summaries(path: &Path, summaries: &[Summary]) -> anyhow::Result<()> {
    let mut out = String::new();
    for s in summaries {
        out.push_str(&serde_json::to_string(s)?);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}
