//! Matrix edge lists, record tables and JSON reports on disk.
//!
//! Matrix files hold a `rows cols nnz` header followed by one `i j` line per
//! nonzero, 1-indexed and sorted row-major. Blank lines and lines starting
//! with `#` are ignored on load.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{TrialRecord, CSV_HEADER};
use crate::matrix::SparseBinaryMatrix;

pub fn matrix_to_string(a: &SparseBinaryMatrix) -> String {
    let mut out = format!("{} {} {}\n", a.rows(), a.cols(), a.nnz());
    for i in 0..a.rows() {
        for &j in a.row(i) {
            out.push_str(&format!("{} {}\n", i + 1, j + 1));
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_pair(line: usize, text: &str, want: usize) -> Result<Vec<usize>> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != want {
        return Err(parse_err(line, format!("expected {want} integers, found {:?}", text.trim())));
    }
    fields
        .iter()
        .map(|f| f.parse().map_err(|_| parse_err(line, format!("bad integer {f:?}"))))
        .collect()
}

pub fn matrix_from_str(text: &str) -> Result<SparseBinaryMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let h = parse_pair(hline, header, 3)?;
    let (rows, cols, nnz) = (h[0], h[1], h[2]);
    let mut supports: Vec<Vec<usize>> = vec![Vec::new(); rows];
    let mut count = 0;
    let mut last: Option<(usize, usize)> = None;
    for (line, text) in lines {
        let e = parse_pair(line, text, 2)?;
        let (i, j) = (e[0], e[1]);
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(parse_err(line, format!("entry ({i}, {j}) outside {rows}x{cols}")));
        }
        if let Some(prev) = last {
            if (i, j) == prev {
                return Err(parse_err(line, format!("duplicate entry ({i}, {j})")));
            }
            if (i, j) < prev {
                return Err(parse_err(line, format!("entry ({i}, {j}) out of row-major order")));
            }
        }
        last = Some((i, j));
        supports[i - 1].push(j - 1);
        count += 1;
    }
    if count != nnz {
        return Err(parse_err(hline, format!("header declares {nnz} entries, file has {count}")));
    }
    SparseBinaryMatrix::from_row_supports(rows, cols, supports)
}

pub fn emit_matrix(a: &SparseBinaryMatrix, path: &Path) -> Result<()> {
    write_file(path, matrix_to_string(a).as_bytes())
}

pub fn load_matrix(path: &Path) -> Result<SparseBinaryMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    matrix_from_str(&text)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

pub fn records_to_csv(records: &[TrialRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.to_csv_row())?;
    }
    w.into_inner().map_err(|e| Error::param(format!("csv buffer: {e}")))
}

/// Write records in the fixed column order. The caller is expected to pass
/// them in canonical order, as every runner returns them.
pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    write_file(path, &records_to_csv(records)?)
}

pub fn records_from_csv(bytes: &[u8]) -> Result<Vec<TrialRecord>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(parse_err(1, "unexpected CSV header"));
    }
    let mut out = Vec::new();
    for (k, row) in rd.records().enumerate() {
        let row = row?;
        let cells: Vec<&str> = row.iter().collect();
        out.push(TrialRecord::from_csv_row(&cells, k + 2)?);
    }
    Ok(out)
}

pub fn load_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    records_from_csv(&bytes)
}

/// Pretty JSON with a trailing newline.
pub fn emit_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}
