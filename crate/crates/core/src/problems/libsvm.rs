//! LIBSVM regression format: `target idx:val idx:val ...`, 1-based indices.

use std::io::BufRead;

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, DenseVector};

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

/// Reads a LIBSVM stream into a dense feature matrix (absent features are
/// zero, column count = largest index) and the target vector.
///
/// Blank lines and lines starting with `#` are skipped; a `#` after the
/// features starts a trailing comment. Indices must be strictly increasing
/// within a line unless `lenient`, in which case they are sorted and
/// duplicates are still rejected.
pub fn parse_libsvm<R: BufRead>(reader: R, lenient: bool) -> Result<(DenseMatrix, DenseVector)> {
    let mut targets = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut cols = 0;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| parse_err(lineno, format!("read failed: {e}")))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let target_tok = tokens.next().expect("nonempty line has a token");
        let target: f64 = target_tok
            .parse()
            .map_err(|_| parse_err(lineno, format!("target `{target_tok}` is not a number")))?;
        if !target.is_finite() {
            return Err(parse_err(lineno, "target is not finite"));
        }
        let mut feats = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("feature `{tok}` is not idx:val")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(lineno, format!("index `{idx}` is not a positive integer")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "indices are 1-based"));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(lineno, format!("value `{val}` is not a number")))?;
            if !val.is_finite() {
                return Err(parse_err(lineno, format!("value for index {idx} is not finite")));
            }
            feats.push((idx, val));
        }
        if lenient {
            feats.sort_by_key(|f| f.0);
        }
        for w in feats.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(parse_err(
                    lineno,
                    format!("index {} does not increase after {}", w[1].0, w[0].0),
                ));
            }
        }
        cols = cols.max(feats.last().map_or(0, |f| f.0));
        targets.push(target);
        rows.push(feats);
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no data lines"));
    }
    let mut x = DenseMatrix::zeros(rows.len(), cols);
    for (i, feats) in rows.iter().enumerate() {
        for &(j, v) in feats {
            x.set(i, j - 1, v);
        }
    }
    Ok((x, targets.into()))
}

pub fn parse_libsvm_str(text: &str, lenient: bool) -> Result<(DenseMatrix, DenseVector)> {
    parse_libsvm(text.as_bytes(), lenient)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_line() {
        let (x, y) = parse_libsvm_str("1.5 1:2.0 3:-1.0\n", false).unwrap();
        assert_eq!(y.0, vec![1.5]);
        assert_eq!((x.rows(), x.cols()), (1, 3));
        assert_eq!(x.row(0), &[2.0, 0.0, -1.0]);
    }

    #[test]
    fn comments_and_blank_lines() {
        let (x, y) = parse_libsvm_str("# comment\n0 1:1\n\n", false).unwrap();
        assert_eq!(y.0, vec![0.0]);
        assert_eq!(x.row(0), &[1.0]);
    }

    #[test]
    fn malformed_target() {
        assert_eq!(
            parse_libsvm_str("x 1:1\n", false).unwrap_err(),
            Error::Parse {
                line: 1,
                reason: "target `x` is not a number".into()
            }
        );
    }

    #[test]
    fn ordering_and_leniency() {
        let text = "1 1:1\n2 3:1 2:5\n";
        assert!(matches!(parse_libsvm_str(text, false), Err(Error::Parse { line: 2, .. })));
        let (x, _) = parse_libsvm_str(text, true).unwrap();
        assert_eq!(x.row(1), &[0.0, 5.0, 1.0]);
        assert!(matches!(parse_libsvm_str("1 2:1 2:3\n", true), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(parse_libsvm_str("# only\n\n", false), Err(Error::Parse { line: 0, .. })));
    }
}
