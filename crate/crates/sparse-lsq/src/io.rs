//! Matrix and vector files.
//!
//! * Matrix Market (`%%MatrixMarket matrix ...`), `array` and `coordinate`
//!   formats, fields `real`, `integer` and `pattern`, symmetries `general`,
//!   `symmetric` and `skew-symmetric`. Coordinate entries are 1-based and
//!   duplicates are summed. Everything is materialized densely.
//! * Headerless CSV, one matrix row per line.
//! * Vectors: one real per line, or a single-column Matrix Market file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sparse_lsq_core::{DenseMatrix, Vector};

use crate::error::{Error, Result};

const BANNER: &str = "%%matrixmarket";

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn parse_real(path: &Path, line: usize, token: &str) -> Result<f64> {
    let value: f64 =
        token.trim().parse().map_err(|_| Error::parse(path, line, format!("`{token}` is not a number")))?;
    if !value.is_finite() {
        return Err(Error::parse(path, line, format!("non-finite entry `{token}`")));
    }
    Ok(value)
}

/// Reads a Matrix Market or headerless CSV matrix, chosen by the banner.
pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = read_text(path)?;
    if text.trim_start().to_ascii_lowercase().starts_with(BANNER) {
        parse_matrix_market(path, &text)
    } else {
        parse_csv(path, &text)
    }
}

/// Reads a vector: one real per line (blank lines ignored), or a Matrix
/// Market file with a single column.
pub fn read_vector(path: &Path) -> Result<Vector> {
    let text = read_text(path)?;
    if text.trim_start().to_ascii_lowercase().starts_with(BANNER) {
        let m = parse_matrix_market(path, &text)?;
        if m.cols() != 1 {
            return Err(Error::parse(path, 1, format!("expected one column, found {}", m.cols())));
        }
        return Ok(Vector::new(m.into_vec())?);
    }
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        values.push(parse_real(path, idx + 1, line)?);
    }
    if values.is_empty() {
        return Err(Error::parse(path, 1, "empty vector file"));
    }
    Ok(Vector::new(values)?)
}

/// Reads the matrix and vector and checks that their lengths agree.
pub fn ingest(matrix_path: &Path, vector_path: &Path) -> Result<(DenseMatrix, Vector)> {
    let a = read_matrix(matrix_path)?;
    let b = read_vector(vector_path)?;
    if b.dim() != a.rows() {
        return Err(Error::Usage(format!(
            "{} has {} entries but {} has {} rows",
            vector_path.display(),
            b.dim(),
            matrix_path.display(),
            a.rows()
        )));
    }
    Ok((a, b))
}

fn parse_csv(path: &Path, text: &str) -> Result<DenseMatrix> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record.iter().map(|t| parse_real(path, line, t)).collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::parse(path, line, format!("expected {} fields, found {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(path, 1, "empty matrix file"));
    }
    Ok(DenseMatrix::from_rows(&rows)?)
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

fn parse_matrix_market(path: &Path, text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != BANNER || fields[1] != "matrix" {
        return Err(Error::parse(path, 1, "malformed Matrix Market banner"));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(Error::parse(path, 1, format!("unsupported format `{other}`"))),
    };
    let pattern = match fields[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" if coordinate => true,
        other => return Err(Error::parse(path, 1, format!("unsupported field `{other}`"))),
    };
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(Error::parse(path, 1, format!("unsupported symmetry `{other}`"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = data.next().ok_or_else(|| Error::parse(path, 1, "missing size line"))?;
    let dims = size
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| Error::parse(path, size_line, format!("bad size `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    let expected_dims = if coordinate { 3 } else { 2 };
    if dims.len() != expected_dims {
        return Err(Error::parse(path, size_line, format!("expected {expected_dims} integers on the size line")));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if rows == 0 || cols == 0 {
        return Err(Error::parse(path, size_line, "matrix has a zero dimension"));
    }
    if symmetry != Symmetry::General && rows != cols {
        return Err(Error::parse(path, size_line, "symmetric storage requires a square matrix"));
    }
    let mut m = DenseMatrix::zeros(rows, cols);

    if coordinate {
        let nnz = dims[2];
        let mut count = 0;
        for (line, entry) in data {
            let tokens: Vec<&str> = entry.split_whitespace().collect();
            let want = if pattern { 2 } else { 3 };
            if tokens.len() != want {
                return Err(Error::parse(path, line, format!("expected {want} fields, found {}", tokens.len())));
            }
            let index = |t: &str, bound: usize| -> Result<usize> {
                match t.parse::<usize>() {
                    Ok(i) if (1..=bound).contains(&i) => Ok(i - 1),
                    _ => Err(Error::parse(path, line, format!("index `{t}` out of range 1..={bound}"))),
                }
            };
            let (i, j) = (index(tokens[0], rows)?, index(tokens[1], cols)?);
            let v = if pattern { 1.0 } else { parse_real(path, line, tokens[2])? };
            match symmetry {
                Symmetry::General => m[(i, j)] += v,
                Symmetry::Symmetric => {
                    m[(i, j)] += v;
                    if i != j {
                        m[(j, i)] += v;
                    }
                }
                Symmetry::Skew => {
                    if i == j {
                        return Err(Error::parse(path, line, "diagonal entry in skew-symmetric matrix"));
                    }
                    m[(i, j)] += v;
                    m[(j, i)] -= v;
                }
            }
            count += 1;
        }
        if count != nnz {
            return Err(Error::parse(path, size_line, format!("declared {nnz} entries, found {count}")));
        }
    } else {
        // column-major; symmetric storage lists the lower triangle only
        let positions: Vec<(usize, usize)> = (0..cols)
            .flat_map(|j| {
                let start = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::Symmetric => j,
                    Symmetry::Skew => j + 1,
                };
                (start..rows).map(move |i| (i, j))
            })
            .collect();
        let mut last_line = size_line;
        let mut values = Vec::with_capacity(positions.len());
        for (line, entry) in data {
            last_line = line;
            for token in entry.split_whitespace() {
                values.push(parse_real(path, line, token)?);
            }
        }
        if values.len() != positions.len() {
            return Err(Error::parse(
                path,
                last_line,
                format!("expected {} values, found {}", positions.len(), values.len()),
            ));
        }
        for (&(i, j), v) in positions.iter().zip(values) {
            m[(i, j)] = v;
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => m[(j, i)] = v,
                Symmetry::Skew => m[(j, i)] = -v,
            }
        }
    }
    Ok(DenseMatrix::new(rows, cols, m.into_vec())?)
}

/// Matrix Market `array real general` text (column-major, shortest
/// round-trip decimal representation).
pub fn matrix_market_string(m: &DenseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let _ = writeln!(out, "{}", m[(i, j)]);
        }
    }
    out
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    write_text(path, &matrix_market_string(m))
}

/// One value per line.
pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    let mut out = String::new();
    for x in v {
        let _ = writeln!(out, "{x}");
    }
    write_text(path, &out)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Output { path: path.to_path_buf(), source })
}
