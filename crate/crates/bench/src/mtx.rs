//! MatrixMarket reading and writing for dense real matrices.
//!
//! Supported headers: `%%MatrixMarket matrix {coordinate|array}
//! {real|integer} {general|symmetric|skew-symmetric}`. Coordinate entries
//! with repeated indices are summed.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::ParseError;

/// Default largest matrix order converted to dense storage.
pub const DEFAULT_DENSE_LIMIT: usize = 4096;

/// Environment variable overriding [`DEFAULT_DENSE_LIMIT`].
pub const DENSE_LIMIT_ENV: &str = "PHMOR_DENSE_LIMIT";

/// Dense limit from `PHMOR_DENSE_LIMIT`, falling back to the default when
/// unset or unparsable.
pub fn dense_limit_from_env() -> usize {
    match std::env::var(DENSE_LIMIT_ENV) {
        Ok(v) => match v.trim().parse() {
            Ok(n) => n,
            Err(_) => {
                log::warn!("ignoring {DENSE_LIMIT_ENV}={v:?}: not an unsigned integer");
                DEFAULT_DENSE_LIMIT
            }
        },
        Err(_) => DEFAULT_DENSE_LIMIT,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtxFormat {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtxSymmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MtxHeader {
    pub format: MtxFormat,
    pub symmetry: MtxSymmetry,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MtxError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("matrix of size {rows}x{cols} exceeds the dense limit {limit}")]
    DenseLimitExceeded { rows: usize, cols: usize, limit: usize },
}

fn parse_header(line: &str, lineno: usize) -> Result<MtxHeader, ParseError> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(ParseError::new(
            lineno,
            "expected header '%%MatrixMarket matrix <format> <field> <symmetry>'",
        ));
    }
    if tokens[1] != "matrix" {
        return Err(ParseError::new(lineno, format!("unsupported object '{}'", tokens[1])));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => MtxFormat::Coordinate,
        "array" => MtxFormat::Array,
        other => return Err(ParseError::new(lineno, format!("unsupported format '{other}'"))),
    };
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(ParseError::new(lineno, format!("unsupported field '{other}'"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => MtxSymmetry::General,
        "symmetric" => MtxSymmetry::Symmetric,
        "skew-symmetric" => MtxSymmetry::SkewSymmetric,
        other => return Err(ParseError::new(lineno, format!("unsupported symmetry '{other}'"))),
    };
    Ok(MtxHeader { format, symmetry })
}

fn parse_usize(tok: &str, what: &str, lineno: usize) -> Result<usize, ParseError> {
    tok.parse()
        .map_err(|_| ParseError::new(lineno, format!("invalid {what} '{tok}'")))
}

fn parse_value(tok: &str, lineno: usize) -> Result<f64, ParseError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| ParseError::new(lineno, format!("invalid value '{tok}'")))?;
    if !v.is_finite() {
        return Err(ParseError::new(lineno, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

/// Data lines with their 1-based line numbers, comments and blank lines
/// removed.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'))
}

/// Parses a MatrixMarket document into a dense matrix. Matrices with more
/// than `dense_limit` rows or columns are rejected before allocation.
pub fn parse_matrix_market(text: &str, dense_limit: usize) -> Result<DMatrix<f64>, MtxError> {
    let first = text.lines().next().unwrap_or("");
    let header = parse_header(first, 1)?;
    let mut lines = data_lines(text);
    let last_line = text.lines().count().max(1);

    let (size_line, size) = lines
        .next()
        .ok_or_else(|| ParseError::new(last_line, "missing size line"))?;
    let tok: Vec<&str> = size.split_whitespace().collect();
    let expected_tokens = match header.format {
        MtxFormat::Coordinate => 3,
        MtxFormat::Array => 2,
    };
    if tok.len() != expected_tokens {
        return Err(ParseError::new(
            size_line,
            format!("size line needs {expected_tokens} integers, found {}", tok.len()),
        )
        .into());
    }
    let rows = parse_usize(tok[0], "row count", size_line)?;
    let cols = parse_usize(tok[1], "column count", size_line)?;
    if rows > dense_limit || cols > dense_limit {
        return Err(MtxError::DenseLimitExceeded {
            rows,
            cols,
            limit: dense_limit,
        });
    }
    if header.symmetry != MtxSymmetry::General && rows != cols {
        return Err(ParseError::new(size_line, format!("{rows}x{cols} matrix declared with symmetry")).into());
    }
    let mut m = DMatrix::zeros(rows, cols);

    match header.format {
        MtxFormat::Coordinate => {
            let nnz = parse_usize(tok[2], "entry count", size_line)?;
            let max_nnz = rows.saturating_mul(cols);
            if nnz > max_nnz && max_nnz > 0 {
                log::debug!("entry count {nnz} exceeds {rows}x{cols}; duplicates will be summed");
            }
            let mut seen = 0usize;
            for (lineno, line) in lines.by_ref() {
                if seen == nnz {
                    return Err(ParseError::new(lineno, format!("more than the declared {nnz} entries")).into());
                }
                let t: Vec<&str> = line.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(
                        ParseError::new(lineno, format!("expected 'row col value', found {} tokens", t.len())).into(),
                    );
                }
                let i = parse_usize(t[0], "row index", lineno)?;
                let j = parse_usize(t[1], "column index", lineno)?;
                if i == 0 || i > rows || j == 0 || j > cols {
                    return Err(ParseError::new(
                        lineno,
                        format!("index ({i}, {j}) out of range for a {rows}x{cols} matrix"),
                    )
                    .into());
                }
                let v = parse_value(t[2], lineno)?;
                let (i, j) = (i - 1, j - 1);
                match header.symmetry {
                    MtxSymmetry::General => m[(i, j)] += v,
                    MtxSymmetry::Symmetric => {
                        if i < j {
                            return Err(
                                ParseError::new(lineno, "symmetric storage holds the lower triangle only").into(),
                            );
                        }
                        m[(i, j)] += v;
                        if i != j {
                            m[(j, i)] += v;
                        }
                    }
                    MtxSymmetry::SkewSymmetric => {
                        if i <= j {
                            return Err(ParseError::new(
                                lineno,
                                "skew-symmetric storage holds the strict lower triangle only",
                            )
                            .into());
                        }
                        m[(i, j)] += v;
                        m[(j, i)] -= v;
                    }
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(ParseError::new(last_line, format!("expected {nnz} entries, found {seen}")).into());
            }
        }
        MtxFormat::Array => {
            // column-major; symmetric kinds store the (strict) lower triangle
            let positions: Vec<(usize, usize)> = match header.symmetry {
                MtxSymmetry::General => (0..cols).flat_map(|j| (0..rows).map(move |i| (i, j))).collect(),
                MtxSymmetry::Symmetric => (0..cols).flat_map(|j| (j..rows).map(move |i| (i, j))).collect(),
                MtxSymmetry::SkewSymmetric => (0..cols).flat_map(|j| (j + 1..rows).map(move |i| (i, j))).collect(),
            };
            let mut next = positions.iter();
            let mut seen = 0usize;
            for (lineno, line) in lines.by_ref() {
                for tok in line.split_whitespace() {
                    let &(i, j) = next.next().ok_or_else(|| {
                        ParseError::new(lineno, format!("more than the expected {} values", positions.len()))
                    })?;
                    let v = parse_value(tok, lineno)?;
                    m[(i, j)] = v;
                    match header.symmetry {
                        MtxSymmetry::General => {}
                        MtxSymmetry::Symmetric => m[(j, i)] = v,
                        MtxSymmetry::SkewSymmetric => m[(j, i)] = -v,
                    }
                    seen += 1;
                }
            }
            if seen != positions.len() {
                return Err(
                    ParseError::new(last_line, format!("expected {} values, found {seen}", positions.len())).into(),
                );
            }
        }
    }
    Ok(m)
}

/// Writes `m` in MatrixMarket form. Values use Rust's shortest round-trip
/// representation, so reading the output back reproduces `m` exactly.
/// Symmetric kinds store the lower triangle and expect `m` to have that
/// symmetry; the upper triangle is not written.
pub fn write_matrix_market(m: &DMatrix<f64>, header: MtxHeader) -> String {
    let format = match header.format {
        MtxFormat::Coordinate => "coordinate",
        MtxFormat::Array => "array",
    };
    let symmetry = match header.symmetry {
        MtxSymmetry::General => "general",
        MtxSymmetry::Symmetric => "symmetric",
        MtxSymmetry::SkewSymmetric => "skew-symmetric",
    };
    let keep = |i: usize, j: usize| match header.symmetry {
        MtxSymmetry::General => true,
        MtxSymmetry::Symmetric => i >= j,
        MtxSymmetry::SkewSymmetric => i > j,
    };
    let mut out = format!("%%MatrixMarket matrix {format} real {symmetry}\n");
    match header.format {
        MtxFormat::Coordinate => {
            let mut entries = Vec::new();
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    if keep(i, j) && m[(i, j)] != 0.0 {
                        entries.push((i, j, m[(i, j)]));
                    }
                }
            }
            let _ = writeln!(out, "{} {} {}", m.nrows(), m.ncols(), entries.len());
            for (i, j, v) in entries {
                let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, v);
            }
        }
        MtxFormat::Array => {
            let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    if keep(i, j) {
                        let _ = writeln!(out, "{:e}", m[(i, j)]);
                    }
                }
            }
        }
    }
    out
}
