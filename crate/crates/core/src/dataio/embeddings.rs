use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_bytes, read_text, write_bytes, DataError};
use crate::linalg::Matrix;

pub const BINARY_MAGIC: &[u8; 4] = b"HCEB";
pub const BINARY_VERSION: u8 = 1;
/// Magic, version byte, then row and column counts as little-endian `u64`.
pub const BINARY_HEADER_LEN: usize = 4 + 1 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingFormat {
    Csv,
    Binary,
}

impl EmbeddingFormat {
    /// Guesses the format from a file extension: `.csv` is text, anything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Self::Csv,
            _ => Self::Binary,
        }
    }
}

/// Little-endian `f32` payload behind a fixed header.
pub fn write_embeddings_binary(m: &Matrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(BINARY_HEADER_LEN + 4 * m.len());
    out.extend_from_slice(BINARY_MAGIC);
    out.push(BINARY_VERSION);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for &v in m.as_slice() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn parse_embeddings_binary(bytes: &[u8]) -> Result<Matrix<f32>, DataError> {
    if bytes.len() < BINARY_HEADER_LEN {
        return Err(DataError::invalid("header", format!("{} bytes, need {BINARY_HEADER_LEN}", bytes.len())));
    }
    if &bytes[..4] != BINARY_MAGIC {
        return Err(DataError::invalid("magic", format!("found {:?}", &bytes[..4])));
    }
    if bytes[4] != BINARY_VERSION {
        return Err(DataError::invalid("version", format!("unsupported version {}", bytes[4])));
    }
    let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let (rows, cols) = (read_u64(5), read_u64(13));
    let expected = usize::try_from(rows)
        .ok()
        .zip(usize::try_from(cols).ok())
        .and_then(|(r, c)| r.checked_mul(c))
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(BINARY_HEADER_LEN))
        .ok_or_else(|| DataError::invalid("shape", format!("{rows}x{cols} is too large")))?;
    if bytes.len() != expected {
        return Err(DataError::invalid(
            "payload",
            format!("{} bytes for a {rows}x{cols} matrix, expected {expected}", bytes.len()),
        ));
    }
    let data = bytes[BINARY_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    Ok(Matrix::from_vec(rows as usize, cols as usize, data).expect("length checked"))
}

/// A `#rows=R,cols=C` line, a `dim_0,...` header, then one row per node.
pub fn write_embeddings_csv(m: &Matrix<f64>) -> String {
    let mut s = format!("#rows={},cols={}\n", m.rows(), m.cols());
    let header: Vec<String> = (0..m.cols()).map(|j| format!("dim_{j}")).collect();
    s.push_str(&header.join(","));
    s.push('\n');
    for row in m.row_iter() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                s.push(',');
            }
            write!(s, "{}", *v as f32).expect("writing to a String");
        }
        s.push('\n');
    }
    s
}

fn parse_shape_line(line: &str) -> Option<(usize, usize)> {
    let rest = line.strip_prefix("#rows=")?;
    let (r, c) = rest.split_once(",cols=")?;
    Some((r.trim().parse().ok()?, c.trim().parse().ok()?))
}

pub fn parse_embeddings_csv(text: &str) -> Result<Matrix<f32>, DataError> {
    let mut lines = text.lines();
    let first = lines.next().unwrap_or("");
    let (rows, cols) = parse_shape_line(first.trim_end()).ok_or_else(|| DataError::Parse {
        line: 1,
        column: 1,
        message: "expected `#rows=R,cols=C`".into(),
    })?;
    let body: String = lines.collect::<Vec<_>>().join("\n");
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(body.as_bytes());
    let header_len = reader.headers().map_err(|e| csv_error(e, 2))?.len();
    if header_len != cols && !(cols == 0 && header_len <= 1) {
        return Err(DataError::invalid("header", format!("{header_len} columns, expected {cols}")));
    }
    let mut data = Vec::new();
    let mut seen = 0usize;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(e, i + 3))?;
        if seen == rows {
            return Err(DataError::invalid("rows", format!("more than the declared {rows} rows")));
        }
        if record.len() != cols && !(cols == 0 && record.len() == 1 && record[0].is_empty()) {
            return Err(DataError::Parse {
                line: i + 3,
                column: 1,
                message: format!("{} fields, expected {cols}", record.len()),
            });
        }
        for (j, field) in record.iter().enumerate().take(cols) {
            let v: f32 = field.trim().parse().map_err(|_| DataError::Parse {
                line: i + 3,
                column: j + 1,
                message: format!("expected a number, found {field:?}"),
            })?;
            data.push(v);
        }
        seen += 1;
    }
    if seen != rows {
        return Err(DataError::invalid("rows", format!("found {seen}, declared {rows}")));
    }
    Ok(Matrix::from_vec(rows, cols, data).expect("row count and widths checked"))
}

fn csv_error(e: csv::Error, line: usize) -> DataError {
    DataError::Parse { line, column: 1, message: e.to_string() }
}

pub fn save_embeddings(m: &Matrix<f64>, path: &Path, format: EmbeddingFormat) -> Result<(), DataError> {
    match format {
        EmbeddingFormat::Csv => write_bytes(path, write_embeddings_csv(m).as_bytes()),
        EmbeddingFormat::Binary => write_bytes(path, &write_embeddings_binary(m)),
    }
}

pub fn load_embeddings(path: &Path, format: EmbeddingFormat) -> Result<Matrix<f32>, DataError> {
    match format {
        EmbeddingFormat::Csv => parse_embeddings_csv(&read_text(path)?),
        EmbeddingFormat::Binary => parse_embeddings_binary(&read_bytes(path)?),
    }
    .map_err(|e| e.at(path))
}
