//! Matrix Market coordinate-format reader and writer.
//!
//! Indices are 1-based on disk and 0-based in memory. `symmetric` and
//! `skew-symmetric` files are expanded to general form on load, duplicate
//! entries are summed, and `pattern` entries read as one.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

pub fn load_matrix_market<T: Scalar>(path: impl AsRef<Path>) -> Result<CsrMatrix<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    read_matrix_market(BufReader::new(file), path)
}

pub fn read_matrix_market<T: Scalar, R: BufRead>(reader: R, label: &Path) -> Result<CsrMatrix<T>> {
    let perr = |line: usize, msg: String| Error::Parse { path: label.to_path_buf(), line, msg };
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (lno, banner) = match lines.next() {
        Some((n, Ok(l))) => (n, l),
        Some((n, Err(e))) => return Err(perr(n, e.to_string())),
        None => return Err(perr(1, "empty file".into())),
    };
    let toks: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(perr(lno, format!("malformed banner: {banner:?}")));
    }
    if toks[2] != "coordinate" {
        return Err(perr(lno, format!("unsupported format {:?}, expected coordinate", toks[2])));
    }
    let field = match toks[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(perr(lno, format!("unsupported field {other:?}"))),
    };
    let symmetry = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(perr(lno, format!("unsupported symmetry {other:?}"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut trip: Vec<(u32, u32, T)> = Vec::new();
    let mut seen = 0usize;
    for (lno, line) in lines {
        let line = line.map_err(|e| perr(lno, e.to_string()))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut it = t.split_whitespace();
        let Some((rows, cols, nnz)) = size else {
            let mut next = || -> Result<usize> {
                it.next()
                    .ok_or_else(|| perr(lno, "size line needs rows, cols, nnz".into()))?
                    .parse::<usize>()
                    .map_err(|e| perr(lno, format!("bad size field: {e}")))
            };
            let s = (next()?, next()?, next()?);
            if s.0 >= u32::MAX as usize || s.1 >= u32::MAX as usize {
                return Err(perr(lno, "dimensions exceed 32-bit indices".into()));
            }
            size = Some(s);
            trip.reserve(s.2);
            continue;
        };
        if seen == nnz {
            return Err(perr(lno, format!("more than the declared {nnz} entries")));
        }
        let mut index = |name: &str, bound: usize| -> Result<u32> {
            let tok = it.next().ok_or_else(|| perr(lno, format!("missing {name} index")))?;
            let v: usize = tok.parse().map_err(|_| perr(lno, format!("non-numeric {name} index {tok:?}")))?;
            if v == 0 || v > bound {
                return Err(perr(lno, format!("{name} index {v} out of range 1..={bound}")));
            }
            Ok((v - 1) as u32)
        };
        let r = index("row", rows)?;
        let c = index("column", cols)?;
        let v = match field {
            Field::Pattern => T::one(),
            Field::Real | Field::Integer => {
                let tok = it.next().ok_or_else(|| perr(lno, "missing value".into()))?;
                T::parse_value(tok).ok_or_else(|| perr(lno, format!("non-numeric value {tok:?}")))?
            }
        };
        seen += 1;
        trip.push((r, c, v));
        if r != c {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => trip.push((c, r, v)),
                Symmetry::SkewSymmetric => trip.push((c, r, T::zero() - v)),
            }
        }
    }
    let Some((rows, cols, nnz)) = size else {
        return Err(perr(1, "missing size line".into()));
    };
    if seen != nnz {
        return Err(perr(0, format!("declared {nnz} entries, found {seen}")));
    }
    CsrMatrix::from_triplets(rows, cols, trip)
}

pub fn write_matrix_market<T: Scalar>(m: &CsrMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io { path: PathBuf::from(path), source };
    let file = File::create(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    write_to(m, &mut w).map_err(io)?;
    w.flush().map_err(io)
}

/// Writes `m` in `coordinate real general` form.
pub fn write_to<T: Scalar, W: Write>(m: &CsrMatrix<T>, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.num_rows(), m.num_cols(), m.nnz())?;
    for (r, c, v) in m.iter() {
        writeln!(w, "{} {} {}", r + 1, c + 1, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<CsrMatrix<f64>> {
        read_matrix_market(text.as_bytes(), Path::new("inline.mtx"))
    }

    #[test]
    fn diagonal_two_by_two() {
        let m = parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 5.0\n2 2 3.0\n").unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!((m.get(0, 0), m.get(1, 1)), (Some(5.0), Some(3.0)));
    }

    #[test]
    fn symmetric_expansion() {
        let m = parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 4.0\n").unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), Some(4.0));
        assert_eq!(m.get(1, 0), Some(4.0));
    }

    #[test]
    fn symmetric_diagonal_not_doubled() {
        let m = parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2.0\n2 1 1.0\n").unwrap();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 0), Some(2.0));
    }

    #[test]
    fn skew_symmetric_negates() {
        let m = parse("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 4.0\n").unwrap();
        assert_eq!(m.get(0, 1), Some(-4.0));
        assert_eq!(m.get(1, 0), Some(4.0));
    }

    #[test]
    fn duplicates_summed() {
        let m = parse("%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 2.0\n1 1 3.0\n").unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), Some(5.0));
    }

    #[test]
    fn pattern_reads_as_one() {
        let m = parse("%%MatrixMarket matrix coordinate pattern general\n% comment\n3 3 1\n2 3\n").unwrap();
        assert_eq!(m.get(1, 2), Some(1.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_index = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
        assert!(matches!(bad_index, Err(Error::Parse { line: 3, .. })));
        let bad_value = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n% c\n1 1 abc\n");
        assert!(matches!(bad_value, Err(Error::Parse { line: 4, .. })));
        let bad_banner = parse("%%MatrixMarket matrix array real general\n2 2\n");
        assert!(matches!(bad_banner, Err(Error::Parse { line: 1, .. })));
        let complex = parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
        assert!(matches!(complex, Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn identity_written_one_based() {
        let mut buf = Vec::new();
        write_to(&CsrMatrix::<f64>::identity(3), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "%%MatrixMarket matrix coordinate real general");
        assert_eq!(lines[1], "3 3 3");
        assert_eq!(&lines[2..], &["1 1 1", "2 2 1", "3 3 1"]);
    }

    #[test]
    fn empty_matrix_header_only() {
        let mut buf = Vec::new();
        write_to(&CsrMatrix::<f64>::zeros(4, 4), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "%%MatrixMarket matrix coordinate real general\n4 4 0\n");
    }
}
