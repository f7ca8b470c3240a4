//! CSV ingestion: header-driven schema inference and columnar encoding.
//!
//! Empty fields are missing values. Column kinds are inferred per column
//! (integer, then decimal, then datetime, with categorical as the fallback)
//! unless a hint overrides the guess.

use anyhow::{bail, Context, Result};
use pwh_core::preprocess::{encode_column, infer_column_spec};
use pwh_core::{ColumnKind, EncodedTable};
use std::collections::HashMap;
use std::path::Path;

/// Raw CSV contents in columnar form: header names plus one cell vector per
/// column, with `None` for empty fields.
pub struct RawTable {
    pub headers: Vec<String>,
    pub cells: Vec<Vec<Option<String>>>,
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }
}

pub fn read_csv(path: &Path) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let headers: Vec<String> = reader
        .headers()
        .context("cannot read the header row")?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() {
        bail!("{}: no columns in the header row", path.display());
    }

    let mut cells: Vec<Vec<Option<String>>> = vec![Vec::new(); headers.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("row {}", i + 1))?;
        if record.len() != headers.len() {
            bail!(
                "row {}: {} fields where the header has {}",
                i + 1,
                record.len(),
                headers.len()
            );
        }
        for (c, field) in record.iter().enumerate() {
            cells[c].push(if field.is_empty() {
                None
            } else {
                Some(field.to_string())
            });
        }
    }
    if cells[0].is_empty() {
        bail!("{}: no data rows", path.display());
    }
    Ok(RawTable { headers, cells })
}

/// Infers a spec for every column and encodes the table. `hints` maps column
/// names to declared kinds for cases the inference would get wrong.
pub fn encode_table(raw: &RawTable, hints: &HashMap<String, ColumnKind>) -> Result<EncodedTable> {
    let mut specs = Vec::with_capacity(raw.headers.len());
    let mut columns = Vec::with_capacity(raw.headers.len());
    for (i, name) in raw.headers.iter().enumerate() {
        let cells: Vec<Option<&str>> = raw.cells[i].iter().map(Option::as_deref).collect();
        let spec = infer_column_spec(i, name, &cells, hints.get(name).copied())
            .with_context(|| format!("column {name}"))?;
        let encoded =
            encode_column(&cells, &spec).with_context(|| format!("column {name}"))?;
        specs.push(spec);
        columns.push(encoded);
    }
    Ok(EncodedTable { specs, columns })
}

pub fn ingest(path: &Path) -> Result<EncodedTable> {
    let raw = read_csv(path)?;
    encode_table(&raw, &HashMap::new())
}
