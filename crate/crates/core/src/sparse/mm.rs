//! Matrix Market coordinate format.
//!
//! Supported: `matrix coordinate {real|integer|pattern} {general|symmetric}`.
//! Indices are 1-based on disk and 0-based in memory. Symmetric files store
//! one triangle; off-diagonal entries are mirrored on read.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::semiring::{MmField, Scalar, Semiring};
use crate::sparse::matrix::{SparseMatrix, StorageMode, Triplet};

/// Cap on up-front allocation driven by the declared entry count.
const MAX_PREALLOC: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

pub fn read_matrix_market<S: Semiring>(
    path: impl AsRef<Path>,
    semiring: &S,
) -> Result<SparseMatrix<S::Scalar>> {
    let f = File::open(path)?;
    parse_matrix_market(BufReader::new(f), semiring)
}

/// Parses from any buffered reader. Pattern files get the semiring's `one`.
pub fn parse_matrix_market<R: BufRead, S: Semiring>(
    reader: R,
    semiring: &S,
) -> Result<SparseMatrix<S::Scalar>> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (lineno, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(Error::parse(1, "empty input")),
    };
    let (field, symmetry) = parse_header(lineno, &header)?;

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<Triplet<S::Scalar>> = Vec::new();
    let mut seen = 0usize;

    for (lineno, line) in lines {
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('%') {
            continue;
        }
        let mut toks = body.split_whitespace();
        match size {
            None => {
                let m = parse_usize(lineno, toks.next(), "row count")?;
                let n = parse_usize(lineno, toks.next(), "column count")?;
                let nnz = parse_usize(lineno, toks.next(), "entry count")?;
                if toks.next().is_some() {
                    return Err(Error::parse(lineno, "trailing tokens on size line"));
                }
                if symmetry == Symmetry::Symmetric && m != n {
                    return Err(Error::parse(lineno, "symmetric matrix must be square"));
                }
                triplets.reserve(nnz.min(MAX_PREALLOC));
                size = Some((m, n, nnz));
            }
            Some((m, n, nnz)) => {
                if seen == nnz {
                    return Err(Error::parse(lineno, format!("more than {nnz} entries")));
                }
                let i = parse_usize(lineno, toks.next(), "row index")?;
                let j = parse_usize(lineno, toks.next(), "column index")?;
                if i == 0 || i > m || j == 0 || j > n {
                    return Err(Error::parse(
                        lineno,
                        format!("entry ({i}, {j}) outside {m}x{n} (indices are 1-based)"),
                    ));
                }
                let val = match field {
                    MmField::Pattern => semiring.one(),
                    _ => {
                        let tok = toks
                            .next()
                            .ok_or_else(|| Error::parse(lineno, "missing value"))?;
                        S::Scalar::parse_token(tok)
                            .ok_or_else(|| Error::parse(lineno, format!("bad value {tok:?}")))?
                    }
                };
                if toks.next().is_some() {
                    return Err(Error::parse(lineno, "trailing tokens on entry line"));
                }
                let (r, c) = (i - 1, j - 1);
                triplets.push(Triplet::new(r, c, val));
                if symmetry == Symmetry::Symmetric && r != c {
                    triplets.push(Triplet::new(c, r, val));
                }
                seen += 1;
            }
        }
    }

    let (m, n, nnz) = size.ok_or_else(|| Error::parse(lineno + 1, "missing size line"))?;
    if seen != nnz {
        return Err(Error::parse(
            0,
            format!("declared {nnz} entries but found {seen}"),
        ));
    }
    SparseMatrix::from_triplets(m, n, triplets, StorageMode::Dcsc, semiring)
}

fn parse_header(lineno: usize, header: &str) -> Result<(MmField, Symmetry)> {
    let toks: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" {
        return Err(Error::parse(lineno, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
    }
    if toks[1] != "matrix" {
        return Err(Error::parse(lineno, format!("unsupported object {:?}", toks[1])));
    }
    if toks[2] != "coordinate" {
        return Err(Error::parse(lineno, format!("unsupported format {:?}", toks[2])));
    }
    let field = match toks[3].as_str() {
        "real" | "double" => MmField::Real,
        "integer" => MmField::Integer,
        "pattern" => MmField::Pattern,
        other => return Err(Error::parse(lineno, format!("unsupported field {other:?}"))),
    };
    let symmetry = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(Error::parse(lineno, format!("unsupported symmetry {other:?}"))),
    };
    Ok((field, symmetry))
}

fn parse_usize(lineno: usize, tok: Option<&str>, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::parse(lineno, format!("missing {what}")))?;
    tok.parse::<usize>()
        .map_err(|_| Error::parse(lineno, format!("bad {what} {tok:?}")))
}

pub fn write_matrix_market<T: Scalar>(a: &SparseMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    format_matrix_market(a, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes a `general` coordinate file in column-major entry order.
pub fn format_matrix_market<T: Scalar, W: Write>(a: &SparseMatrix<T>, w: &mut W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate {} general", T::FIELD.keyword())?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for t in a.iter() {
        match t.val.format_token() {
            Some(v) => writeln!(w, "{} {} {}", t.row + 1, t.col + 1, v)?,
            None => writeln!(w, "{} {}", t.row + 1, t.col + 1)?,
        }
    }
    Ok(())
}
