//! Matrix Market (coordinate and array, real/integer, general/symmetric)
//! reading and writing, plus a dense CSV reader.
//!
//! Values are written with 17 significant digits so every `f64` survives a
//! write/read round trip bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Storage layout of a Matrix Market file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmFormat {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn number(path: &Path, line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(path, line, format!("not a number: {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

fn index(path: &Path, line: usize, tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("not an index: {tok:?}")))
}

/// Reads a Matrix Market file.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(&text, path)
}

/// Parses Matrix Market text; `origin` only labels error messages.
pub fn parse_matrix_market(text: &str, origin: impl AsRef<Path>) -> Result<Matrix> {
    let path = origin.as_ref();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(path, 1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let format = match fields[2].as_str() {
        "coordinate" => MmFormat::Coordinate,
        "array" => MmFormat::Array,
        other => return Err(parse_err(path, 1, format!("unsupported format {other:?}"))),
    };
    match fields[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(parse_err(path, 1, format!("unsupported field {other:?}"))),
    }
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(parse_err(path, 1, format!("unsupported symmetry {other:?}"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = data
        .next()
        .ok_or_else(|| parse_err(path, 2, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let expected = if format == MmFormat::Coordinate { 3 } else { 2 };
    if dims.len() != expected {
        return Err(parse_err(path, size_line, "malformed size line"));
    }
    let rows = index(path, size_line, dims[0])?;
    let cols = index(path, size_line, dims[1])?;
    if symmetry != Symmetry::General && rows != cols {
        return Err(parse_err(path, size_line, "symmetric storage needs a square matrix"));
    }
    let mut a = Matrix::zeros(rows, cols);

    match format {
        MmFormat::Coordinate => {
            let nnz = index(path, size_line, dims[2])?;
            let mut seen = 0;
            for (ln, l) in data {
                let tok: Vec<&str> = l.split_whitespace().collect();
                if tok.len() != 3 {
                    return Err(parse_err(path, ln, "expected 'row col value'"));
                }
                let (i, j) = (index(path, ln, tok[0])?, index(path, ln, tok[1])?);
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(path, ln, format!("entry ({i}, {j}) out of bounds")));
                }
                let v = number(path, ln, tok[2])?;
                a[(i - 1, j - 1)] += v;
                match symmetry {
                    Symmetry::Symmetric if i != j => a[(j - 1, i - 1)] += v,
                    Symmetry::SkewSymmetric if i != j => a[(j - 1, i - 1)] -= v,
                    _ => {}
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(path, size_line, format!("declared {nnz} entries, found {seen}")));
            }
        }
        MmFormat::Array => {
            // Column-major; symmetric variants store the lower triangle only.
            let slots: Vec<(usize, usize)> = match symmetry {
                Symmetry::General => (0..cols).flat_map(|j| (0..rows).map(move |i| (i, j))).collect(),
                Symmetry::Symmetric => (0..cols).flat_map(|j| (j..rows).map(move |i| (i, j))).collect(),
                Symmetry::SkewSymmetric => (0..cols).flat_map(|j| (j + 1..rows).map(move |i| (i, j))).collect(),
            };
            let mut it = slots.iter();
            let mut last = size_line;
            for (ln, l) in data {
                last = ln;
                for tok in l.split_whitespace() {
                    let &(i, j) = it
                        .next()
                        .ok_or_else(|| parse_err(path, ln, "more values than the declared size"))?;
                    let v = number(path, ln, tok)?;
                    a[(i, j)] = v;
                    match symmetry {
                        Symmetry::Symmetric => a[(j, i)] = v,
                        Symmetry::SkewSymmetric => a[(j, i)] = -v,
                        Symmetry::General => {}
                    }
                }
            }
            if it.next().is_some() {
                return Err(parse_err(path, last, "fewer values than the declared size"));
            }
        }
    }
    Ok(a)
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders `a` as Matrix Market text. Coordinate output lists nonzeros only.
pub fn to_matrix_market(a: &Matrix, format: MmFormat) -> String {
    let mut out = String::new();
    let (m, n) = a.shape();
    match format {
        MmFormat::Array => {
            let _ = writeln!(out, "%%MatrixMarket matrix array real general");
            let _ = writeln!(out, "{m} {n}");
            for col in a.columns() {
                for &v in col {
                    let _ = writeln!(out, "{}", fmt17(v));
                }
            }
        }
        MmFormat::Coordinate => {
            let nnz = a.as_slice().iter().filter(|v| **v != 0.0).count();
            let _ = writeln!(out, "%%MatrixMarket matrix coordinate real general");
            let _ = writeln!(out, "{m} {n} {nnz}");
            for (j, col) in a.columns().enumerate() {
                for (i, &v) in col.iter().enumerate() {
                    if v != 0.0 {
                        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, fmt17(v));
                    }
                }
            }
        }
    }
    out
}

/// Writes `a` to `path` in Matrix Market form.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &Matrix, format: MmFormat) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_matrix_market(a, format)).map_err(|e| Error::io(path, e))
}

/// Reads a dense CSV matrix. A first row that contains no numbers is taken as
/// a header and skipped; every other row must have the same length.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path)
}

/// Parses dense CSV text; `origin` only labels error messages.
pub fn parse_csv(text: &str, origin: impl AsRef<Path>) -> Result<Matrix> {
    let path: PathBuf = origin.as_ref().to_path_buf();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let line = |r: &csv::StringRecord| r.position().map_or(idx + 1, |p| p.line() as usize);
        let rec = rec.map_err(|e| parse_err(&path, idx + 1, e.to_string()))?;
        let ln = line(&rec);
        if rows.is_empty() && idx == 0 && rec.iter().all(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| number(&path, ln, f))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    &path,
                    ln,
                    format!("row has {} fields, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(&path, 1, "no data rows"));
    }
    Ok(Matrix::from_rows(&rows))
}
