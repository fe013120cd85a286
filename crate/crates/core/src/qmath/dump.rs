//! Plain-text matrix dump used for golden files and for matrix-valued input
//! files.
//!
//! ```text
//! # complex-matrix 2 2
//! 5.0000000000000000e-1+0.0000000000000000e0i 0.0000000000000000e0+0.0000000000000000e0i
//! 0.0000000000000000e0+0.0000000000000000e0i 5.0000000000000000e-1+0.0000000000000000e0i
//! ```
//!
//! Rows are written in order, entries separated by single spaces, each entry
//! as `re±imi` with 17 significant digits.

use std::fmt::Write;

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

pub const HEADER: &str = "# complex-matrix";

pub fn format_entry(v: C64) -> String {
    let sign = if v.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{}{:.16e}i", v.re, sign, v.im.abs())
}

pub fn dump_matrix(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER} {} {}", m.rows(), m.cols()).unwrap();
    out.push_str(&dump_rows(m));
    out
}

/// Rows only, without the header line.
pub fn dump_rows(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|c| format_entry(m.get(r, c))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`, `i` or `-i`.
pub fn parse_complex(token: &str) -> Option<C64> {
    let t = token.trim();
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().ok()?,
    };
    Some(C64::new(re.parse::<f64>().ok()?, im))
}

/// Parses `rows` whitespace-separated rows of complex entries.
pub fn parse_rows(lines: &[(usize, &str)], cols: usize) -> Result<ComplexMatrix> {
    let mut data = Vec::with_capacity(lines.len() * cols);
    for &(line_no, line) in lines {
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != cols {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {cols} entries, found {}", entries.len()),
            });
        }
        for e in entries {
            data.push(parse_complex(e).ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("bad complex entry {e:?}"),
            })?);
        }
    }
    ComplexMatrix::new(lines.len(), cols, data)
}

/// Inverse of [`dump_matrix`].
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty matrix dump".into(),
    })?;
    let dims: Vec<usize> = header
        .strip_prefix(HEADER)
        .ok_or_else(|| Error::Parse {
            line: hline,
            message: format!("expected {HEADER:?} header"),
        })?
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: hline,
            message: format!("bad dimensions: {e}"),
        })?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse {
            line: hline,
            message: "header needs rows and cols".into(),
        });
    };
    let body: Vec<(usize, &str)> = lines.collect();
    if body.len() != rows {
        return Err(Error::Parse {
            line: hline,
            message: format!("expected {rows} rows, found {}", body.len()),
        });
    }
    parse_rows(&body, cols)
}
