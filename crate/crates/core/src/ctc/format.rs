//! Circuit input files.
//!
//! ```text
//! # grandfather paradox: one CTC qubit, U = X
//! dim-ch 1
//! dim-tv 2
//! unitary
//! 0 1
//! 1 0
//! rho-in
//! 1
//! ```
//!
//! `unitary` is followed by `dim-ch·dim-tv` rows and `rho-in` by `dim-ch`
//! rows, each row a whitespace-separated list of complex entries (`a`,
//! `a+bi`, `a-bi`, `bi`). Lines starting with `#` and blank lines are
//! ignored. The chronology-respecting factor is the slow tensor index.

use std::fmt::Write;

use super::circuit::CtcCircuit;
use crate::error::{Error, Result};
use crate::qmath::{dump_rows, parse_rows, DensityMatrix};

/// A parsed circuit file.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitFile {
    pub circuit: CtcCircuit,
    pub rho_in: DensityMatrix,
}

pub fn parse_circuit_file(text: &str) -> Result<CircuitFile> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let mut pos = 0;
    let mut keyed = |key: &str| -> Result<(usize, String)> {
        let &(n, line) = lines.get(pos).ok_or(Error::Parse {
            line: lines.last().map_or(0, |l| l.0),
            message: format!("missing {key:?}"),
        })?;
        pos += 1;
        let rest = line.strip_prefix(key).ok_or_else(|| Error::Parse {
            line: n,
            message: format!("expected {key:?}"),
        })?;
        Ok((n, rest.trim().to_string()))
    };
    let dim = |(n, v): (usize, String)| -> Result<usize> {
        v.parse().map_err(|_| Error::Parse {
            line: n,
            message: format!("bad dimension {v:?}"),
        })
    };
    let dim_ch = dim(keyed("dim-ch")?)?;
    let dim_tv = dim(keyed("dim-tv")?)?;
    let total = dim_ch * dim_tv;
    let (n, _) = keyed("unitary")?;
    let take = |from: usize, count: usize, what: &str| -> Result<&[(usize, &str)]> {
        lines.get(from..from + count).ok_or(Error::Parse {
            line: n,
            message: format!("{what} needs {count} rows"),
        })
    };
    let u_rows = take(pos, total, "unitary")?;
    let unitary = parse_rows(u_rows, total)?;
    pos += total;
    let (n2, _) = lines
        .get(pos)
        .filter(|(_, l)| *l == "rho-in")
        .copied()
        .ok_or(Error::Parse {
            line: lines.get(pos).map_or(n, |l| l.0),
            message: "expected \"rho-in\"".into(),
        })?;
    pos += 1;
    let r_rows = take(pos, dim_ch, "rho-in")?;
    let rho = parse_rows(r_rows, dim_ch)?;
    pos += dim_ch;
    if let Some(&(extra, _)) = lines.get(pos) {
        return Err(Error::Parse {
            line: extra,
            message: "trailing content".into(),
        });
    }
    let circuit = CtcCircuit::new(dim_ch, dim_tv, unitary)?;
    let rho_in = DensityMatrix::new(rho).map_err(|e| Error::Parse {
        line: n2,
        message: e.to_string(),
    })?;
    Ok(CircuitFile { circuit, rho_in })
}

pub fn write_circuit_file(file: &CircuitFile) -> String {
    let mut out = String::new();
    writeln!(out, "dim-ch {}", file.circuit.dim_ch()).unwrap();
    writeln!(out, "dim-tv {}", file.circuit.dim_tv()).unwrap();
    out.push_str("unitary\n");
    out.push_str(&dump_rows(file.circuit.unitary()));
    out.push_str("rho-in\n");
    out.push_str(&dump_rows(file.rho_in.matrix()));
    out
}
