// SPDX-License-Identifier: Apache-2.0

//! Text format for matrices.
//!
//! ```text
//! rows=2 cols=4 policy=SameIndex
//! $0:Int 0:Int false:Bool true:Bool
//! N_Int_1 N_Bool_1
//! 1 0 x x
//! x x 1 0
//! ```

use thiserror::Error;

use super::instance::MatrixInstance;
use super::structure::{MatrixSort, MatrixStructure, ProductionRule, StructureError, WiringPolicy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixFormatError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("expected {expected} {what}, found {found}")]
    Dimension { what: &'static str, expected: usize, found: usize },
    #[error("row {row}, column {col}: unexpected symbol `{symbol}`")]
    BadSymbol { row: usize, col: usize, symbol: String },
    #[error("row {row}, column {col}: `x` must mark exactly the sort-incompatible cells")]
    MaskMismatch { row: usize, col: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Serialize a matrix with its structure header.
pub fn serialize_matrix(s: &MatrixStructure, m: &MatrixInstance) -> String {
    assert!(m.same_shape(s), "instance does not belong to the structure");
    let mut out = format!("rows={} cols={} policy={}\n", s.n_rows(), s.n_cols(), s.wiring());
    out.push_str(&s.cols().iter().map(|c| c.label()).collect::<Vec<_>>().join(" "));
    out.push('\n');
    out.push_str(&s.rows().iter().map(|r| r.key()).collect::<Vec<_>>().join(" "));
    out.push('\n');
    out.push_str(&m.render(s));
    out
}

fn parse_row_key(key: &str) -> Option<(MatrixSort, u8)> {
    let rest = key.strip_prefix("N_")?;
    let (sort, ordinal) = rest.rsplit_once('_')?;
    Some((sort.parse().ok()?, ordinal.parse().ok()?))
}

fn header_field<'a>(field: Option<&'a str>, name: &str) -> Result<&'a str, MatrixFormatError> {
    field
        .and_then(|f| f.strip_prefix(name)?.strip_prefix('='))
        .ok_or_else(|| MatrixFormatError::Malformed { line: 1, message: format!("expected `{name}=...`") })
}

/// Inverse of [`serialize_matrix`]. Row and column numbers in errors are 0-based.
pub fn deserialize_matrix(text: &str) -> Result<(MatrixStructure, MatrixInstance), MatrixFormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| MatrixFormatError::Malformed { line: 0, message: format!("missing {what}") })
    };
    let (_, header) = next("header")?;
    let mut fields = header.split_whitespace();
    let num = |v: &str| {
        v.parse::<usize>()
            .map_err(|_| MatrixFormatError::Malformed { line: 1, message: format!("`{v}` is not a count") })
    };
    let n_rows = num(header_field(fields.next(), "rows")?)?;
    let n_cols = num(header_field(fields.next(), "cols")?)?;
    let wiring: WiringPolicy = header_field(fields.next(), "policy")?
        .parse()
        .map_err(|message| MatrixFormatError::Malformed { line: 1, message })?;
    if let Some(extra) = fields.next() {
        return Err(MatrixFormatError::Malformed { line: 1, message: format!("unexpected `{extra}`") });
    }

    let (ln, col_line) = next("column labels")?;
    let labels: Vec<&str> = col_line.split_whitespace().collect();
    if labels.len() != n_cols {
        return Err(MatrixFormatError::Dimension { what: "column labels", expected: n_cols, found: labels.len() });
    }
    let cols = labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            ProductionRule::parse_label(i, l).map(|r| (r.result_sort, r.kind)).ok_or_else(|| {
                MatrixFormatError::Malformed { line: ln + 1, message: format!("bad column label `{l}`") }
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let (ln, row_line) = next("row labels")?;
    let keys: Vec<&str> = row_line.split_whitespace().collect();
    if keys.len() != n_rows {
        return Err(MatrixFormatError::Dimension { what: "row labels", expected: n_rows, found: keys.len() });
    }
    let rows = keys
        .iter()
        .map(|k| {
            parse_row_key(k)
                .ok_or_else(|| MatrixFormatError::Malformed { line: ln + 1, message: format!("bad row label `{k}`") })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let s = MatrixStructure::new(rows, cols, wiring)?;

    let mut m = MatrixInstance::zeros(n_rows, n_cols);
    let mut seen = 0;
    for (_, line) in lines {
        if seen == n_rows {
            return Err(MatrixFormatError::Dimension { what: "grid rows", expected: n_rows, found: seen + 1 });
        }
        let r = seen;
        let symbols: Vec<&str> = line.split_whitespace().collect();
        if symbols.len() != n_cols {
            return Err(MatrixFormatError::Dimension { what: "grid columns", expected: n_cols, found: symbols.len() });
        }
        for (c, sym) in symbols.into_iter().enumerate() {
            let bit = match sym {
                "0" => Some(false),
                "1" => Some(true),
                "x" => None,
                other => return Err(MatrixFormatError::BadSymbol { row: r, col: c, symbol: other.to_string() }),
            };
            if bit.is_some() != s.is_valid(r, c) {
                return Err(MatrixFormatError::MaskMismatch { row: r, col: c });
            }
            m.set(r, c, bit.unwrap_or(false));
        }
        seen += 1;
    }
    if seen != n_rows {
        return Err(MatrixFormatError::Dimension { what: "grid rows", expected: n_rows, found: seen });
    }
    Ok((s, m))
}
