//! Matrix Market reader for dense symmetric use.
//!
//! Coverage: `coordinate` and `array` formats, `real` field, `general` and
//! `symmetric` symmetry. Symmetric storage is expanded from the stored
//! triangle; general data is accepted only if numerically symmetric within
//! 1e-10 of the largest entry. Everything else is rejected with the line
//! number of the offense.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Asymmetry gate for `general` files, relative to the max-abs entry.
const GENERAL_SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::MtxFormat {
        line,
        msg: msg.into(),
    }
}

/// Loads a Matrix Market file as a dense symmetric matrix.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SymMatrix> {
    let text = fs::read_to_string(path.as_ref())?;
    parse_matrix_market(&text)
}

pub(crate) fn parse_matrix_market(text: &str) -> Result<SymMatrix> {
    // lines() keeps the \r of CRLF files; strip it so tokens compare clean
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

    let (banner_no, banner) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = banner
        .split_whitespace()
        .map(|t| t.to_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(
            banner_no,
            "expected banner '%%MatrixMarket matrix <format> <field> <symmetry>'",
        ));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        other => {
            return Err(parse_err(
                banner_no,
                format!("unsupported format '{other}'"),
            ))
        }
    };
    if tokens[3] != "real" {
        return Err(parse_err(
            banner_no,
            format!("unsupported field '{}': only 'real' is handled", tokens[3]),
        ));
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => {
            return Err(parse_err(
                banner_no,
                format!("unsupported symmetry '{other}': only general/symmetric"),
            ))
        }
    };

    // skip comments and blank lines up to the size line
    let (size_no, size_line) = loop {
        match lines.next() {
            Some((_, l)) if l.starts_with('%') || l.trim().is_empty() => continue,
            Some((no, l)) => break (no, l),
            None => return Err(parse_err(banner_no, "missing size line")),
        }
    };
    let size_tokens: Vec<&str> = size_line.split_whitespace().collect();

    match format {
        Format::Coordinate => {
            if size_tokens.len() != 3 {
                return Err(parse_err(
                    size_no,
                    "coordinate size line needs 'rows cols nnz'",
                ));
            }
            let rows: usize = size_tokens[0]
                .parse()
                .map_err(|_| parse_err(size_no, "bad row count"))?;
            let cols: usize = size_tokens[1]
                .parse()
                .map_err(|_| parse_err(size_no, "bad column count"))?;
            let nnz: usize = size_tokens[2]
                .parse()
                .map_err(|_| parse_err(size_no, "bad entry count"))?;
            if rows != cols {
                return Err(parse_err(
                    size_no,
                    format!("matrix must be square, got {rows}x{cols}"),
                ));
            }
            let n = rows;
            let mut data = vec![0.0; n * n];
            let mut seen = 0usize;
            for (no, line) in lines {
                if line.starts_with('%') || line.trim().is_empty() {
                    continue;
                }
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(parse_err(no, "coordinate entry needs 'i j value'"));
                }
                let i: usize = parts[0]
                    .parse()
                    .map_err(|_| parse_err(no, "bad row index"))?;
                let j: usize = parts[1]
                    .parse()
                    .map_err(|_| parse_err(no, "bad column index"))?;
                let v: f64 = parts[2].parse().map_err(|_| parse_err(no, "bad value"))?;
                if i < 1 || i > n || j < 1 || j > n {
                    return Err(parse_err(
                        no,
                        format!("index ({i}, {j}) out of range for n={n}"),
                    ));
                }
                let (i, j) = (i - 1, j - 1);
                data[i * n + j] = v;
                if symmetry == Symmetry::Symmetric {
                    data[j * n + i] = v;
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(
                    size_no,
                    format!("size line declares {nnz} entries but file has {seen}"),
                ));
            }
            finish(n, data, symmetry)
        }
        Format::Array => {
            if size_tokens.len() != 2 {
                return Err(parse_err(size_no, "array size line needs 'rows cols'"));
            }
            let rows: usize = size_tokens[0]
                .parse()
                .map_err(|_| parse_err(size_no, "bad row count"))?;
            let cols: usize = size_tokens[1]
                .parse()
                .map_err(|_| parse_err(size_no, "bad column count"))?;
            if rows != cols {
                return Err(parse_err(
                    size_no,
                    format!("matrix must be square, got {rows}x{cols}"),
                ));
            }
            let n = rows;
            // array data is column-major; symmetric stores the lower triangle
            let mut coords = Vec::new();
            match symmetry {
                Symmetry::General => {
                    for j in 0..n {
                        for i in 0..n {
                            coords.push((i, j));
                        }
                    }
                }
                Symmetry::Symmetric => {
                    for j in 0..n {
                        for i in j..n {
                            coords.push((i, j));
                        }
                    }
                }
            }
            let mut data = vec![0.0; n * n];
            let mut idx = 0usize;
            let mut last_no = size_no;
            for (no, line) in lines {
                if line.starts_with('%') || line.trim().is_empty() {
                    continue;
                }
                for tok in line.split_whitespace() {
                    if idx >= coords.len() {
                        return Err(parse_err(no, "more values than the size line declares"));
                    }
                    let v: f64 = tok.parse().map_err(|_| parse_err(no, "bad value"))?;
                    let (i, j) = coords[idx];
                    data[i * n + j] = v;
                    if symmetry == Symmetry::Symmetric {
                        data[j * n + i] = v;
                    }
                    idx += 1;
                }
                last_no = no;
            }
            if idx != coords.len() {
                return Err(parse_err(
                    last_no,
                    format!("expected {} values, found {idx}", coords.len()),
                ));
            }
            finish(n, data, symmetry)
        }
    }
}

fn finish(n: usize, mut data: Vec<f64>, symmetry: Symmetry) -> Result<SymMatrix> {
    if symmetry == Symmetry::General {
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut max_asym = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                max_asym = max_asym.max((data[i * n + j] - data[j * n + i]).abs());
            }
        }
        let tol = GENERAL_SYMMETRY_TOL * scale.max(1e-300);
        if max_asym > tol {
            return Err(Error::Asymmetric { max_asym, tol });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (data[i * n + j] + data[j * n + i]);
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
    }
    SymMatrix::from_dense(n, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_symmetric_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n\
                    % a comment\n\
                    2 2 3\n\
                    1 1 2.0\n\
                    2 1 1.0\n\
                    2 2 2.0\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 0), 1.0);
        assert_eq!(m.get(1, 1), 2.0);
    }

    #[test]
    fn array_general_identity() {
        let text = "%%MatrixMarket matrix array real general\n\
                    3 3\n1\n0\n0\n0\n1\n0\n0\n0\n1\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m, SymMatrix::identity(3));
    }

    #[test]
    fn array_symmetric_lower_triangle_column_major() {
        // lower triangle of [[1, 2], [2, 3]] column-major: 1, 2, 3
        let text = "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(1, 1), 3.0);
    }

    #[test]
    fn general_asymmetric_rejected() {
        let text = "%%MatrixMarket matrix coordinate real general\n\
                    2 2 4\n1 1 1.0\n1 2 5.0\n2 1 -5.0\n2 2 1.0\n";
        assert!(matches!(
            parse_matrix_market(text),
            Err(Error::Asymmetric { .. })
        ));
    }

    #[test]
    fn bad_value_reports_line() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n\
                    2 2 2\n1 1 2.0\n2 1 oops\n";
        match parse_matrix_market(text) {
            Err(Error::MtxFormat { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_square_rejected() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 1.0\n";
        assert!(matches!(
            parse_matrix_market(text),
            Err(Error::MtxFormat { line: 2, .. })
        ));
    }

    #[test]
    fn pattern_field_rejected() {
        let text = "%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n1 1\n";
        assert!(parse_matrix_market(text).is_err());
    }

    #[test]
    fn out_of_range_index_rejected() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1.0\n";
        assert!(matches!(
            parse_matrix_market(text),
            Err(Error::MtxFormat { line: 3, .. })
        ));
    }

    #[test]
    fn crlf_line_endings_accepted() {
        let text =
            "%%MatrixMarket matrix coordinate real symmetric\r\n2 2 2\r\n1 1 1.5\r\n2 2 2.5\r\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m.get(0, 0), 1.5);
        assert_eq!(m.get(1, 1), 2.5);
    }
}
