use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{ExperimentConfig, Format};
use crate::experiments::{Check, Table, TableRows, ROW_COLUMNS, SUMMARY_COLUMNS};

pub const SCHEMA_VERSION: u32 = 1;

fn schema_line(table: &Table, columns: &[&str]) -> String {
    format!(
        "sls-{} v{SCHEMA_VERSION}; columns: {}; reference: {}",
        table.name,
        columns.join(","),
        table.reference
    )
}

fn write_rows<T: Serialize>(path: &Path, schema: &str, rows: &[T], format: Format) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    match format {
        Format::Csv => {
            writeln!(w, "# schema: {schema}")?;
            let mut csv = csv::Writer::from_writer(&mut w);
            for row in rows {
                csv.serialize(row)?;
            }
            csv.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a, T> {
                schema: &'a str,
                rows: &'a [T],
            }
            serde_json::to_writer_pretty(&mut w, &Doc { schema, rows })?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes each table as `<name>.csv` or `<name>.json` in `dir`.
pub fn write_tables(dir: &Path, tables: &[Table], format: Format) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut written = Vec::new();
    for table in tables {
        let path = dir.join(format!("{}.{ext}", table.name));
        match &table.rows {
            TableRows::Curves(rows) => write_rows(&path, &schema_line(table, ROW_COLUMNS), rows, format)?,
            TableRows::Summary(rows) => write_rows(&path, &schema_line(table, SUMMARY_COLUMNS), rows, format)?,
        }
        written.push(path);
    }
    Ok(written)
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub schema_version: u32,
    pub experiment: &'static str,
    pub seed: u64,
    pub config: &'a ExperimentConfig,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub files: Vec<String>,
    pub warnings: &'a [String],
    pub checks: &'a [Check],
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<PathBuf> {
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
