// SPDX-License-Identifier: Apache-2.0

use std::fmt;

/// Sorts of the supported theories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Int,
    /// Fixed-width bitvector, width in `1..=64`.
    BitVec(u32),
}

/// Widest bitvector the evaluator can represent.
pub const MAX_BV_WIDTH: u32 = 64;

impl Sort {
    pub fn is_bitvec(self) -> bool {
        matches!(self, Sort::BitVec(_))
    }

    /// Short name used when deriving non-terminal names (`Int`, `Bool`, `BV8`).
    pub fn short_name(self) -> String {
        match self {
            Sort::Bool => "Bool".to_string(),
            Sort::Int => "Int".to_string(),
            Sort::BitVec(w) => format!("BV{w}"),
        }
    }

    pub fn from_short_name(s: &str) -> Option<Sort> {
        match s {
            "Bool" => Some(Sort::Bool),
            "Int" => Some(Sort::Int),
            _ => {
                let w: u32 = s.strip_prefix("BV")?.parse().ok()?;
                (1..=MAX_BV_WIDTH).contains(&w).then_some(Sort::BitVec(w))
            }
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => f.write_str("Bool"),
            Sort::Int => f.write_str("Int"),
            Sort::BitVec(w) => write!(f, "(_ BitVec {w})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_names_round_trip() {
        for s in [Sort::Bool, Sort::Int, Sort::BitVec(1), Sort::BitVec(64)] {
            assert_eq!(Sort::from_short_name(&s.short_name()), Some(s));
        }
        assert_eq!(Sort::from_short_name("BV0"), None);
        assert_eq!(Sort::from_short_name("BV65"), None);
        assert_eq!(Sort::from_short_name("Real"), None);
    }

    #[test]
    fn display_uses_smtlib_syntax() {
        assert_eq!(Sort::BitVec(8).to_string(), "(_ BitVec 8)");
        assert_eq!(Sort::Int.to_string(), "Int");
    }
}
