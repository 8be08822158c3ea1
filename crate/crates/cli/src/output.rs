//! CSV tables with `#` metadata lines.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// A finished result table, written in one piece after the run.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub fn write(table: &Table, command: &str, cfg: &ExperimentConfig) -> Result<(), CliError> {
    let mut sink: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let config = serde_json::to_string(cfg).map_err(io::Error::other)?;
    writeln!(sink, "# tool: puncture {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(sink, "# command: {command}")?;
    match cfg.seed {
        Some(seed) => writeln!(sink, "# seed: {seed}")?,
        None => writeln!(sink, "# seed: pinned per check")?,
    }
    writeln!(sink, "# config: {config}")?;
    for note in &table.notes {
        writeln!(sink, "# note: {note}")?;
    }
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Formats a float for CSV: shortest round-trip form, `inf`/`nan` spelled out.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
