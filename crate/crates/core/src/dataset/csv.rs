//! CSV dialect for functional datasets.
//!
//! Rows layout (the default and the one [`write_csv`] emits):
//!
//! ```text
//! sample_id,3.5,3.4,3.3     <- grid row; first cell non-numeric => id column
//! cell_a,0.01,0.02,0.03
//! cell_b,0.00,0.01,0.05
//! ```
//!
//! Without an id column the first row holds only grid coordinates. The
//! columns layout is the transpose: first column is the grid, an optional
//! non-numeric first row carries sample ids.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::FunctionalDataset;
use crate::error::{Error, Result};
use crate::fmt::format_float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    #[default]
    RowsAreSamples,
    ColumnsAreSamples,
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rows" | "rows_are_samples" => Ok(Layout::RowsAreSamples),
            "columns" | "columns_are_samples" => Ok(Layout::ColumnsAreSamples),
            other => Err(Error::Argument(format!("unknown layout `{other}`"))),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, layout: Layout) -> Result<FunctionalDataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::Validation(format!("{} is not UTF-8: {e}", path.display())))?;
    parse_csv(&text, layout)
}

/// Parses CSV text. Number parsing is locale independent (`.` decimal point).
pub fn parse_csv(text: &str, layout: Layout) -> Result<FunctionalDataset> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let records = read_records(text)?;
    if records.is_empty() {
        return Err(Error::Validation("CSV has no rows".into()));
    }
    let width = records[0].len();
    for (r, rec) in records.iter().enumerate() {
        if rec.len() != width {
            return Err(Error::Validation(format!(
                "ragged CSV: row {} has {} fields, expected {width}",
                r + 1,
                rec.len()
            )));
        }
    }
    match layout {
        Layout::RowsAreSamples => parse_rows(&records),
        Layout::ColumnsAreSamples => parse_columns(&records),
    }
}

fn read_records(text: &str) -> Result<Vec<Vec<String>>> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: r + 1,
            col: 0,
            msg: e.to_string(),
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push(rec.iter().map(str::to_owned).collect());
    }
    Ok(out)
}

fn is_numeric(cell: &str) -> bool {
    cell.parse::<f64>().is_ok()
}

/// `row`/`col` are 1-based file positions.
fn parse_cell(cell: &str, row: usize, col: usize) -> Result<f64> {
    let v: f64 = cell.parse().map_err(|_| Error::Parse {
        row,
        col,
        msg: format!("`{cell}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Validation(format!(
            "non-finite value `{cell}` at row {row}, column {col}"
        )));
    }
    Ok(v)
}

fn parse_rows(records: &[Vec<String>]) -> Result<FunctionalDataset> {
    let header = &records[0];
    let has_id = !is_numeric(&header[0]);
    let start = usize::from(has_id);
    let grid = header[start..]
        .iter()
        .enumerate()
        .map(|(j, c)| parse_cell(c, 1, start + j + 1))
        .collect::<Result<Vec<_>>>()?;
    let body = &records[1..];
    let p = grid.len();
    let mut values = DMatrix::zeros(body.len(), p);
    let mut ids = Vec::with_capacity(body.len());
    for (i, rec) in body.iter().enumerate() {
        ids.push(if has_id {
            rec[0].clone()
        } else {
            i.to_string()
        });
        for j in 0..p {
            values[(i, j)] = parse_cell(&rec[start + j], i + 2, start + j + 1)?;
        }
    }
    FunctionalDataset::new(values, grid, ids)
}

fn parse_columns(records: &[Vec<String>]) -> Result<FunctionalDataset> {
    let has_ids = !is_numeric(&records[0][0]);
    let body = if has_ids { &records[1..] } else { records };
    let n = records[0].len().saturating_sub(1);
    let p = body.len();
    let mut grid = Vec::with_capacity(p);
    let mut values = DMatrix::zeros(n, p);
    let row_offset = usize::from(has_ids) + 1;
    for (j, rec) in body.iter().enumerate() {
        grid.push(parse_cell(&rec[0], j + row_offset, 1)?);
        for i in 0..n {
            values[(i, j)] = parse_cell(&rec[i + 1], j + row_offset, i + 2)?;
        }
    }
    let ids = if has_ids {
        records[0][1..].to_vec()
    } else {
        (0..n).map(|i| i.to_string()).collect()
    };
    FunctionalDataset::new(values, grid, ids)
}

/// Serializes in the rows layout with an id column, LF line endings and
/// shortest round-trip floats.
pub fn to_csv_string(ds: &FunctionalDataset) -> String {
    let mut out = String::from("sample_id");
    for g in ds.grid() {
        out.push(',');
        out.push_str(&format_float(*g));
    }
    out.push('\n');
    for i in 0..ds.n() {
        out.push_str(&quote_id(&ds.sample_ids()[i]));
        for j in 0..ds.p() {
            out.push(',');
            out.push_str(&format_float(ds.values()[(i, j)]));
        }
        out.push('\n');
    }
    out
}

// A numeric-looking id would be read back as data only in the header cell,
// which is always "sample_id", so ids need quoting only for CSV syntax.
fn quote_id(id: &str) -> String {
    if id.contains([',', '"', '\n', '\r']) || id.trim() != id {
        format!("\"{}\"", id.replace('"', "\"\""))
    } else {
        id.to_owned()
    }
}

pub fn write_csv(ds: &FunctionalDataset, path: impl AsRef<Path>) -> Result<()> {
    crate::io::write_atomic(path.as_ref(), to_csv_string(ds).as_bytes())
}
