// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::sygus::{Builtin, Literal, Sort};

/// Sort of a matrix row or column. A bitvector sort may leave its width open,
/// so that one structure can serve benchmarks of different widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatrixSort {
    Bool,
    Int,
    BitVec(Option<u32>),
}

impl MatrixSort {
    pub fn exact(sort: Sort) -> MatrixSort {
        match sort {
            Sort::Bool => MatrixSort::Bool,
            Sort::Int => MatrixSort::Int,
            Sort::BitVec(w) => MatrixSort::BitVec(Some(w)),
        }
    }

    /// Width-generic view of a sort.
    pub fn generic(sort: Sort) -> MatrixSort {
        match sort {
            Sort::BitVec(_) => MatrixSort::BitVec(None),
            s => MatrixSort::exact(s),
        }
    }

    pub fn matches(self, sort: Sort) -> bool {
        match (self, sort) {
            (MatrixSort::Bool, Sort::Bool) | (MatrixSort::Int, Sort::Int) => true,
            (MatrixSort::BitVec(None), Sort::BitVec(_)) => true,
            (MatrixSort::BitVec(Some(a)), Sort::BitVec(b)) => a == b,
            _ => false,
        }
    }

    pub fn label(self) -> String {
        match self {
            MatrixSort::Bool => "Bool".into(),
            MatrixSort::Int => "Int".into(),
            MatrixSort::BitVec(Some(w)) => format!("BV{w}"),
            MatrixSort::BitVec(None) => "BV".into(),
        }
    }
}

impl FromStr for MatrixSort {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        if s == "BV" {
            return Ok(MatrixSort::BitVec(None));
        }
        Sort::from_short_name(s).map(MatrixSort::exact).ok_or(())
    }
}

impl fmt::Display for MatrixSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// How operands of an operator rule attached to row N^k_T are wired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum WiringPolicy {
    /// Operands of sort T' go to N^k_T' (same ordinal).
    #[default]
    SameIndex,
    /// Ordinal-1 rows wire to ordinal-2 rows; ordinal-2 rows wire to themselves.
    Cascade,
}

impl WiringPolicy {
    pub fn target_ordinal(self, row_ordinal: u8) -> u8 {
        match self {
            WiringPolicy::SameIndex => row_ordinal,
            WiringPolicy::Cascade => 2,
        }
    }
}

impl fmt::Display for WiringPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WiringPolicy::SameIndex => "SameIndex",
            WiringPolicy::Cascade => "Cascade",
        })
    }
}

impl FromStr for WiringPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "SameIndex" | "same-index" => Ok(WiringPolicy::SameIndex),
            "Cascade" | "cascade" => Ok(WiringPolicy::Cascade),
            _ => Err(format!("unknown wiring policy `{s}`")),
        }
    }
}

/// A matrix row: the `ordinal`-th non-terminal of `sort`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NonTerminal {
    pub id: usize,
    pub sort: MatrixSort,
    pub ordinal: u8,
    pub name: String,
}

impl NonTerminal {
    /// Key used in matrix files, e.g. `N_Int_1`.
    pub fn key(&self) -> String {
        format!("N_{}_{}", self.sort.label(), self.ordinal)
    }
}

/// What a column produces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RuleKind {
    /// A theory operator over non-terminals.
    Operator { op: Builtin, operands: Vec<MatrixSort> },
    /// A helper function with parameters, applied like an operator.
    Helper { name: String, operands: Vec<MatrixSort> },
    /// The synth-fun argument at this position.
    Argument { index: usize },
    /// The basic constant 0 of the column sort (`false` for Bool).
    Zero,
    /// The basic constant 1 of the column sort (`true` for Bool).
    One,
    /// A constant taken from the specification.
    Literal(Literal),
    /// A helper function without parameters.
    HelperConst { name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductionRule {
    pub id: usize,
    pub result_sort: MatrixSort,
    pub kind: RuleKind,
}

impl ProductionRule {
    pub fn operands(&self) -> &[MatrixSort] {
        match &self.kind {
            RuleKind::Operator { operands, .. } | RuleKind::Helper { operands, .. } => operands,
            _ => &[],
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.operands().is_empty()
    }

    /// Space-free label, unique within a structure.
    pub fn label(&self) -> String {
        let sorts = |ops: &[MatrixSort]| ops.iter().map(|s| s.label()).collect::<Vec<_>>().join(",");
        let res = self.result_sort.label();
        match &self.kind {
            RuleKind::Operator { op, operands } => format!("{}({})->{res}", op.name(), sorts(operands)),
            RuleKind::Helper { name, operands } => format!("@{name}({})->{res}", sorts(operands)),
            RuleKind::Argument { index } => format!("${index}:{res}"),
            RuleKind::Zero if self.result_sort == MatrixSort::Bool => format!("false:{res}"),
            RuleKind::One if self.result_sort == MatrixSort::Bool => format!("true:{res}"),
            RuleKind::Zero => format!("0:{res}"),
            RuleKind::One => format!("1:{res}"),
            RuleKind::Literal(Literal::Int(n)) => format!("{n}:{res}"),
            RuleKind::Literal(l) => format!("{l}:{res}"),
            RuleKind::HelperConst { name } => format!("@{name}:{res}"),
        }
    }

    /// Inverse of [`ProductionRule::label`].
    pub fn parse_label(id: usize, label: &str) -> Option<ProductionRule> {
        let sorts = |s: &str| -> Option<Vec<MatrixSort>> {
            if s.is_empty() {
                return Some(Vec::new());
            }
            s.split(',').map(|p| p.parse().ok()).collect()
        };
        if let Some((head, res)) = label.rsplit_once("->") {
            let result_sort: MatrixSort = res.parse().ok()?;
            let (name, args) = head.split_once('(')?;
            let operands = sorts(args.strip_suffix(')')?)?;
            let kind = match name.strip_prefix('@') {
                Some(h) if !h.is_empty() => RuleKind::Helper { name: h.to_string(), operands },
                Some(_) => return None,
                None => RuleKind::Operator { op: Builtin::from_name(name)?, operands },
            };
            return Some(ProductionRule { id, result_sort, kind });
        }
        let (head, res) = label.rsplit_once(':')?;
        let result_sort: MatrixSort = res.parse().ok()?;
        let kind = if let Some(i) = head.strip_prefix('$') {
            RuleKind::Argument { index: i.parse().ok()? }
        } else if let Some(h) = head.strip_prefix('@') {
            if h.is_empty() {
                return None;
            }
            RuleKind::HelperConst { name: h.to_string() }
        } else {
            match (head, result_sort) {
                ("false", MatrixSort::Bool) => RuleKind::Zero,
                ("true", MatrixSort::Bool) => RuleKind::One,
                ("0", MatrixSort::Int | MatrixSort::BitVec(_)) => RuleKind::Zero,
                ("1", MatrixSort::Int | MatrixSort::BitVec(_)) => RuleKind::One,
                _ => {
                    let lit = parse_literal(head)?;
                    if !result_sort.matches(lit.sort()) {
                        return None;
                    }
                    RuleKind::Literal(lit)
                }
            }
        };
        Some(ProductionRule { id, result_sort, kind })
    }
}

fn parse_literal(s: &str) -> Option<Literal> {
    if let Some(d) = s.strip_prefix("#b") {
        let w = d.len() as u32;
        return (1..=64).contains(&w).then(|| u64::from_str_radix(d, 2).ok().map(|v| Literal::bv(w, v)))?;
    }
    if let Some(d) = s.strip_prefix("#x") {
        let w = d.len() as u32 * 4;
        return (1..=64).contains(&w).then(|| u64::from_str_radix(d, 16).ok().map(|v| Literal::bv(w, v)))?;
    }
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok().map(Literal::Int)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("a structure needs at least one row and one column")]
    Empty,
    #[error("duplicate row {0}")]
    DuplicateRow(String),
    #[error("duplicate column {0}")]
    DuplicateColumn(String),
    #[error("row {row} wires operand of column {column} to missing non-terminal N_{sort}_{ordinal}")]
    MissingTarget { row: String, column: String, sort: MatrixSort, ordinal: u8 },
    #[error("ordinals must be 1 or 2, found {0}")]
    BadOrdinal(u8),
    #[error("unsupported logic `{0}`")]
    UnsupportedLogic(String),
}

/// The metagrammar: non-terminal rows, production-rule columns and the
/// mask of type-compatible cells. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixStructure {
    rows: Vec<NonTerminal>,
    cols: Vec<ProductionRule>,
    wiring: WiringPolicy,
    valid: Vec<bool>,
}

impl MatrixStructure {
    /// Build from `(sort, ordinal)` rows and `(sort, kind)` columns. Row 0 is
    /// the start symbol and is named `Start`.
    pub fn new(
        rows: Vec<(MatrixSort, u8)>,
        cols: Vec<(MatrixSort, RuleKind)>,
        wiring: WiringPolicy,
    ) -> Result<MatrixStructure, StructureError> {
        if rows.is_empty() || cols.is_empty() {
            return Err(StructureError::Empty);
        }
        let rows: Vec<NonTerminal> = rows
            .into_iter()
            .enumerate()
            .map(|(id, (sort, ordinal))| {
                let mut nt = NonTerminal { id, sort, ordinal, name: String::new() };
                nt.name = if id == 0 { "Start".to_string() } else { nt.key() };
                nt
            })
            .collect();
        let cols: Vec<ProductionRule> = cols
            .into_iter()
            .enumerate()
            .map(|(id, (result_sort, kind))| ProductionRule { id, result_sort, kind })
            .collect();
        let mut seen = HashSet::new();
        for r in &rows {
            if !(1..=2).contains(&r.ordinal) {
                return Err(StructureError::BadOrdinal(r.ordinal));
            }
            if !seen.insert(r.key()) {
                return Err(StructureError::DuplicateRow(r.key()));
            }
        }
        let mut seen = HashSet::new();
        for c in &cols {
            if !seen.insert(c.label()) {
                return Err(StructureError::DuplicateColumn(c.label()));
            }
        }
        let valid = rows.iter().flat_map(|r| cols.iter().map(move |c| r.sort == c.result_sort)).collect();
        let s = MatrixStructure { rows, cols, wiring, valid };
        for r in &s.rows {
            for c in s.cols.iter().filter(|c| c.result_sort == r.sort) {
                for &operand in c.operands() {
                    let ordinal = wiring.target_ordinal(r.ordinal);
                    if s.row_of(operand, ordinal).is_none() {
                        return Err(StructureError::MissingTarget {
                            row: r.key(),
                            column: c.label(),
                            sort: operand,
                            ordinal,
                        });
                    }
                }
            }
        }
        Ok(s)
    }

    pub fn rows(&self) -> &[NonTerminal] {
        &self.rows
    }

    pub fn cols(&self) -> &[ProductionRule] {
        &self.cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn wiring(&self) -> WiringPolicy {
        self.wiring
    }

    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.valid[row * self.cols.len() + col]
    }

    /// Row-major validity mask.
    pub fn valid_mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Row-major indices of valid cells.
    pub fn valid_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.valid.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i)
    }

    pub fn row_of(&self, sort: MatrixSort, ordinal: u8) -> Option<usize> {
        self.rows.iter().position(|r| r.sort == sort && r.ordinal == ordinal)
    }

    /// Row that an operand of sort `operand` is wired to when the rule is
    /// attached to `row`.
    pub fn operand_row(&self, row: usize, operand: MatrixSort) -> usize {
        let ordinal = self.wiring.target_ordinal(self.rows[row].ordinal);
        self.row_of(operand, ordinal).expect("wiring targets are checked at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        let kinds = vec![
            (
                MatrixSort::Int,
                RuleKind::Operator { op: Builtin::Add, operands: vec![MatrixSort::Int, MatrixSort::Int] },
            ),
            (
                MatrixSort::Bool,
                RuleKind::Operator { op: Builtin::Implies, operands: vec![MatrixSort::Bool, MatrixSort::Bool] },
            ),
            (
                MatrixSort::BitVec(None),
                RuleKind::Operator { op: Builtin::BvNot, operands: vec![MatrixSort::BitVec(None)] },
            ),
            (MatrixSort::Int, RuleKind::Helper { name: "inc".into(), operands: vec![MatrixSort::Int] }),
            (MatrixSort::Int, RuleKind::Argument { index: 3 }),
            (MatrixSort::Bool, RuleKind::Zero),
            (MatrixSort::Bool, RuleKind::One),
            (MatrixSort::BitVec(Some(8)), RuleKind::One),
            (MatrixSort::Int, RuleKind::Literal(Literal::int(-7))),
            (MatrixSort::BitVec(Some(4)), RuleKind::Literal(Literal::bv(4, 9))),
            (MatrixSort::BitVec(Some(3)), RuleKind::Literal(Literal::bv(3, 5))),
            (MatrixSort::Int, RuleKind::HelperConst { name: "c".into() }),
        ];
        for (i, (sort, kind)) in kinds.into_iter().enumerate() {
            let r = ProductionRule { id: i, result_sort: sort, kind };
            let label = r.label();
            assert!(!label.contains(' '), "{label}");
            assert_eq!(ProductionRule::parse_label(i, &label), Some(r), "{label}");
        }
        assert_eq!(ProductionRule::parse_label(0, "frob(Int)->Int"), None);
        assert_eq!(ProductionRule::parse_label(0, "#x0f:BV4"), None);
    }

    #[test]
    fn mask_follows_sorts() {
        let s = MatrixStructure::new(
            vec![(MatrixSort::Int, 1), (MatrixSort::Bool, 1)],
            vec![(MatrixSort::Int, RuleKind::Zero), (MatrixSort::Bool, RuleKind::One)],
            WiringPolicy::SameIndex,
        )
        .unwrap();
        assert_eq!(s.valid_mask(), &[true, false, false, true]);
        assert_eq!(s.rows()[0].name, "Start");
        assert_eq!(s.rows()[1].name, "N_Bool_1");
    }

    #[test]
    fn missing_wiring_target_is_rejected() {
        let err = MatrixStructure::new(
            vec![(MatrixSort::Int, 1)],
            vec![(MatrixSort::Int, RuleKind::Operator { op: Builtin::Add, operands: vec![MatrixSort::Int; 2] })],
            WiringPolicy::Cascade,
        )
        .unwrap_err();
        assert!(matches!(err, StructureError::MissingTarget { ordinal: 2, .. }));
    }
}
