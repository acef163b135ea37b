//! Plain-text matrix files.
//!
//! ```text
//! QMAT m n
//! a b c d        (m·n lines, row-major, 17 significant digits)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::qmat::QMatrix;
use crate::quaternion::Quaternion;

pub fn format_qmat(a: &QMatrix<f64>) -> String {
    let mut out = String::with_capacity(32 + a.data().len() * 96);
    let _ = writeln!(out, "QMAT {} {}", a.rows(), a.cols());
    for q in a.data() {
        let _ = writeln!(out, "{} {} {} {}", g17(q.a), g17(q.b), g17(q.c), g17(q.d));
    }
    out
}

/// Shortest-roundtrip rendering; Rust's `{}` for f64 already reproduces the
/// value exactly, which is what `%.17g` guarantees in C.
fn g17(x: f64) -> String {
    if x == 0.0 && x.is_sign_negative() {
        "-0".to_string()
    } else {
        format!("{x}")
    }
}

pub fn parse_qmat(text: &str) -> Result<QMatrix<f64>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("QMAT") {
        return Err(Error::Parse(format!("bad header {header:?}")));
    }
    let dim = |p: Option<&str>| -> Result<usize> {
        p.ok_or_else(|| Error::Parse("missing dimension".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad dimension: {e}")))
    };
    let m = dim(parts.next())?;
    let n = dim(parts.next())?;
    let mut data = Vec::with_capacity(m * n);
    for (lineno, line) in lines.enumerate() {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("entry {lineno}: {e}"))))
            .collect::<Result<_>>()?;
        if vals.len() != 4 {
            return Err(Error::Parse(format!("entry {lineno}: expected 4 components, got {}", vals.len())));
        }
        data.push(Quaternion::new(vals[0], vals[1], vals[2], vals[3]));
    }
    if data.len() != m * n {
        return Err(Error::Parse(format!("expected {} entries, found {}", m * n, data.len())));
    }
    QMatrix::from_vec(m, n, data)
}

pub fn read_qmat(path: impl AsRef<Path>) -> Result<QMatrix<f64>> {
    parse_qmat(&std::fs::read_to_string(path)?)
}

pub fn write_qmat(path: impl AsRef<Path>, a: &QMatrix<f64>) -> Result<()> {
    std::fs::write(path, format_qmat(a))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_layout() {
        let a = QMatrix::from_vec(1, 2, vec![Quaternion::new(1.0, 0.5, -2.0, 0.0), Quaternion::i()]).unwrap();
        let text = format_qmat(&a);
        assert_eq!(text, "QMAT 1 2\n1 0.5 -2 0\n0 1 0 0\n");
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_qmat("").is_err());
        assert!(parse_qmat("QMAT 1 1\n1 2 3\n").is_err());
        assert!(parse_qmat("QMAT 2 1\n1 2 3 4\n").is_err());
        assert!(parse_qmat("MAT 1 1\n1 2 3 4\n").is_err());
    }

    proptest! {
        #[test]
        fn text_roundtrip_is_exact(seed in 0u64..1000, m in 0usize..5, n in 0usize..5) {
            let a = QMatrix::<f64>::randn(m, n, seed).scale(1e-3f64.powi((seed % 7) as i32));
            prop_assert_eq!(parse_qmat(&format_qmat(&a)).unwrap(), a);
        }
    }
}
