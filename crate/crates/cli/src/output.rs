//! Artifact envelope and the three output formats.

use crate::reproduce::{row_cells, TableResult, TableSpec};
use clap::ValueEnum;
use serde::Serialize;
use std::io::{self, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

/// Configuration echoed into every artifact.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub policy: String,
    pub budget: u64,
    pub cache: bool,
}

#[derive(Serialize)]
pub struct Artifact<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a ConfigEcho,
    pub seed: u64,
    pub certification: &'a str,
    pub result: &'a T,
}

impl<'a, T: Serialize> Artifact<'a, T> {
    pub fn new(command: &'a str, config: &'a ConfigEcho, certification: &'a str, result: &'a T) -> Self {
        Artifact {
            tool: "sltensor",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            seed: config.seed,
            certification,
            result,
        }
    }

    pub fn write_json(&self, out: &mut dyn Write) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)
    }
}

pub fn table_csv(spec: &TableSpec, t: &TableResult, out: &mut dyn Write) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&t.columns)?;
    for r in &t.rows {
        w.write_record(row_cells(spec, r))?;
    }
    w.flush()
}

/// Plain column-aligned text with a header block.
pub fn table_pretty(spec: &TableSpec, t: &TableResult, config: &ConfigEcho, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{}: {}", t.table, t.title)?;
    writeln!(
        out,
        "sltensor {}  seed {}  policy {}  certification {}",
        env!("CARGO_PKG_VERSION"),
        config.seed,
        config.policy,
        t.certification
    )?;
    let rows: Vec<Vec<String>> = t.rows.iter().map(|r| row_cells(spec, r)).collect();
    let widths: Vec<usize> = (0..t.columns.len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).chain([t.columns[c].chars().count()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| -> String {
        cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ")
    };
    writeln!(out, "{}", line(&t.columns))?;
    for r in &rows {
        writeln!(out, "{}", line(r))?;
    }
    if let Some(b) = t.best_bound {
        write!(out, "best Koszul bound {b}")?;
        if let (Some(c), Some(k)) = (t.best_combined_bound, t.codim) {
            write!(out, "; codimension {k}; combined bound {c}")?;
        }
        writeln!(out)?;
    }
    for m in &t.mismatches {
        writeln!(out, "differs from reference: {m}")?;
    }
    for n in &t.notes {
        writeln!(out, "note: {n}")?;
    }
    Ok(())
}

/// Key/value lines for non-table results: the JSON object flattened one level.
pub fn pretty_value(v: &serde_json::Value, out: &mut dyn Write) -> io::Result<()> {
    match v {
        serde_json::Value::Object(map) => {
            for (k, x) in map {
                match x {
                    serde_json::Value::String(s) => writeln!(out, "{k}: {s}")?,
                    serde_json::Value::Array(a) if a.iter().all(|e| !e.is_object() && !e.is_array()) => {
                        writeln!(out, "{k}: {}", serde_json::to_string(a)?)?
                    }
                    serde_json::Value::Array(a) => writeln!(out, "{k}: [{} items]", a.len())?,
                    serde_json::Value::Object(_) => writeln!(out, "{k}: {}", serde_json::to_string(x)?)?,
                    _ => writeln!(out, "{k}: {x}")?,
                }
            }
            Ok(())
        }
        _ => writeln!(out, "{v}"),
    }
}
