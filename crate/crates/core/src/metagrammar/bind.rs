// SPDX-License-Identifier: Apache-2.0

//! Binding a structure to one benchmark and instantiating grammars.

use thiserror::Error;

use crate::grammar::{Grammar, NonTerminalDecl, Rhs};
use crate::sygus::{Benchmark, FunDef, Literal, Op, Sort, Term};

use super::instance::MatrixInstance;
use super::structure::{MatrixSort, MatrixStructure, RuleKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindError {
    #[error("{benchmark}: sort {sort} has no rows in the structure")]
    MissingSort { benchmark: String, sort: String },
    #[error("{benchmark}: column {column} has no counterpart in the benchmark")]
    MissingColumn { benchmark: String, column: String },
    #[error("{benchmark}: bitvectors of several widths cannot share the generic rows")]
    MixedWidths { benchmark: String },
    #[error("{benchmark}: structure has no ordinal-1 row for return sort {sort}")]
    NoStart { benchmark: String, sort: String },
}

/// How one cell becomes a production.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Template {
    Leaf(Term),
    Node(Op),
}

/// A structure specialised to one benchmark: the concrete sort of each row,
/// the production each column stands for, and the extra always-on rules.
#[derive(Debug, Clone)]
pub struct Binding {
    structure: MatrixStructure,
    row_sorts: Vec<Option<Sort>>,
    columns: Vec<Option<(Template, Vec<Sort>)>>,
    aux: Vec<(Sort, Template, Vec<Sort>)>,
    start: usize,
}

fn concrete(ms: MatrixSort, sorts: &[Sort]) -> Option<Sort> {
    sorts.iter().copied().find(|s| ms.matches(*s))
}

fn helper_matches(h: &FunDef, ret: Sort, operands: &[Sort]) -> bool {
    h.ret == ret && h.params.len() == operands.len() && h.params.iter().zip(operands).all(|((_, a), b)| a == b)
}

impl Binding {
    pub fn new(structure: &MatrixStructure, b: &Benchmark) -> Result<Binding, BindError> {
        let id = || b.source_id.clone();
        let mut sorts = b.signature_sorts();
        if !sorts.contains(&Sort::Bool) {
            sorts.push(Sort::Bool);
        }
        let widths: Vec<u32> = sorts
            .iter()
            .filter_map(|s| match s {
                Sort::BitVec(w) => Some(*w),
                _ => None,
            })
            .collect();
        let generic_bv = structure.rows().iter().any(|r| r.sort == MatrixSort::BitVec(None));
        if generic_bv && widths.len() > 1 {
            return Err(BindError::MixedWidths { benchmark: id() });
        }
        for &s in &sorts {
            if !structure.rows().iter().any(|r| r.sort.matches(s)) {
                return Err(BindError::MissingSort { benchmark: id(), sort: s.short_name() });
            }
        }
        let row_sorts: Vec<Option<Sort>> = structure.rows().iter().map(|r| concrete(r.sort, &sorts)).collect();
        let ret = b.synth_fun.ret;
        let start = structure
            .rows()
            .iter()
            .position(|r| r.ordinal == 1 && r.sort.matches(ret))
            .ok_or_else(|| BindError::NoStart { benchmark: id(), sort: ret.short_name() })?;

        let mut covered: Vec<Literal> = Vec::new();
        let mut helpers_used: Vec<&str> = Vec::new();
        let mut columns = Vec::with_capacity(structure.n_cols());
        for col in structure.cols() {
            let Some(res) = concrete(col.result_sort, &sorts) else {
                columns.push(None);
                continue;
            };
            let operands: Option<Vec<Sort>> = col.operands().iter().map(|&o| concrete(o, &sorts)).collect();
            let Some(operands) = operands else {
                columns.push(None);
                continue;
            };
            let missing = || BindError::MissingColumn { benchmark: id(), column: col.label() };
            let t = match &col.kind {
                RuleKind::Operator { op, .. } => Some(Template::Node(Op::Builtin(*op))),
                RuleKind::Helper { name, .. } => {
                    let h = b.helper(name).filter(|h| helper_matches(h, res, &operands)).ok_or_else(missing)?;
                    helpers_used.push(&h.name);
                    Some(Template::Node(Op::Call(name.clone())))
                }
                RuleKind::HelperConst { name } => {
                    let h = b.helper(name).filter(|h| helper_matches(h, res, &[])).ok_or_else(missing)?;
                    helpers_used.push(&h.name);
                    Some(Template::Leaf(Term::call(name.clone(), Vec::new())))
                }
                RuleKind::Argument { index } => b
                    .synth_fun
                    .params
                    .get(*index)
                    .filter(|(_, s)| *s == res)
                    .map(|(n, s)| Template::Leaf(Term::var(n.clone(), *s))),
                RuleKind::Zero => {
                    covered.push(Literal::zero(res));
                    Some(Template::Leaf(Term::Const(Literal::zero(res))))
                }
                RuleKind::One => {
                    covered.push(Literal::one(res));
                    Some(Template::Leaf(Term::Const(Literal::one(res))))
                }
                RuleKind::Literal(l) if l.sort() == res => {
                    covered.push(l.clone());
                    Some(Template::Leaf(Term::Const(l.clone())))
                }
                RuleKind::Literal(_) => None,
            };
            columns.push(t.map(|t| (t, operands)));
        }

        let mut aux = Vec::new();
        for l in b.literal_constants() {
            if !covered.contains(&l) && row_sorts.contains(&Some(l.sort())) {
                aux.push((l.sort(), Template::Leaf(Term::Const(l)), Vec::new()));
            }
        }
        for h in &b.helpers {
            if helpers_used.contains(&h.name.as_str()) {
                continue;
            }
            let operands: Vec<Sort> = h.params.iter().map(|(_, s)| *s).collect();
            if !row_sorts.contains(&Some(h.ret)) || !operands.iter().all(|s| row_sorts.contains(&Some(*s))) {
                continue;
            }
            let t = if operands.is_empty() {
                Template::Leaf(Term::call(h.name.clone(), Vec::new()))
            } else {
                Template::Node(Op::Call(h.name.clone()))
            };
            aux.push((h.ret, t, operands));
        }
        Ok(Binding { structure: structure.clone(), row_sorts, columns, aux, start })
    }

    pub fn structure(&self) -> &MatrixStructure {
        &self.structure
    }

    /// Row used as the start symbol for this benchmark.
    pub fn start_row(&self) -> usize {
        self.start
    }

    pub fn row_sort(&self, row: usize) -> Option<Sort> {
        self.row_sorts[row]
    }

    /// Whether cell (row, col) contributes a production for this benchmark.
    pub fn is_bound(&self, row: usize, col: usize) -> bool {
        self.structure.is_valid(row, col) && self.row_sorts[row].is_some() && self.columns[col].is_some()
    }

    /// Number of always-on rules added per row of their sort.
    pub fn aux_count(&self) -> usize {
        self.aux.len()
    }

    fn row_name(&self, row: usize) -> String {
        if row == self.start {
            return "Start".to_string();
        }
        let r = &self.structure.rows()[row];
        let sort = self.row_sorts[row].map_or_else(|| r.sort.label(), |s| s.short_name());
        format!("N_{sort}_{}", r.ordinal)
    }

    /// The grammar of `m` for this benchmark: one non-terminal per bound row
    /// (in row order), one production per set cell, then the always-on rules.
    /// Not pruned.
    pub fn instantiate(&self, m: &MatrixInstance) -> Grammar {
        let s = &self.structure;
        assert!(m.same_shape(s), "instance does not belong to the structure");
        let mut index = vec![usize::MAX; s.n_rows()];
        let mut non_terminals = Vec::new();
        for (row, sort) in self.row_sorts.iter().enumerate() {
            if let Some(sort) = sort {
                index[row] = non_terminals.len();
                non_terminals.push(NonTerminalDecl { name: self.row_name(row), sort: *sort });
            }
        }
        let operand_nt = |row: usize, operand: Sort| -> usize {
            let ordinal = s.wiring().target_ordinal(s.rows()[row].ordinal);
            let target = (0..s.n_rows())
                .find(|&r| s.rows()[r].ordinal == ordinal && self.row_sorts[r] == Some(operand))
                .expect("operand sorts are bound");
            index[target]
        };
        let mut rules = vec![Vec::new(); non_terminals.len()];
        for row in 0..s.n_rows() {
            if self.row_sorts[row].is_none() {
                continue;
            }
            let out = &mut rules[index[row]];
            for (col, t) in self.columns.iter().enumerate() {
                let Some((t, operands)) = t else { continue };
                if !m.get(row, col) || !s.is_valid(row, col) {
                    continue;
                }
                out.push(match t {
                    Template::Leaf(term) => Rhs::Leaf(term.clone()),
                    Template::Node(op) => {
                        Rhs::Node { op: op.clone(), args: operands.iter().map(|&o| operand_nt(row, o)).collect() }
                    }
                });
            }
            for (sort, t, operands) in &self.aux {
                if Some(*sort) != self.row_sorts[row] {
                    continue;
                }
                out.push(match t {
                    Template::Leaf(term) => Rhs::Leaf(term.clone()),
                    Template::Node(op) => {
                        Rhs::Node { op: op.clone(), args: operands.iter().map(|&o| operand_nt(row, o)).collect() }
                    }
                });
            }
        }
        Grammar { non_terminals, rules, start: index[self.start] }
    }
}

/// Instantiate `m` for the benchmark the structure was built from.
pub fn instantiate(s: &MatrixStructure, b: &Benchmark, m: &MatrixInstance) -> Result<Grammar, BindError> {
    Ok(Binding::new(s, b)?.instantiate(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metagrammar::build::{build_shared_structure, build_structure};
    use crate::metagrammar::instance::full_instance;
    use crate::metagrammar::structure::WiringPolicy;
    use crate::sygus::{parse_benchmark, sort_of};

    const ID: &str =
        "(set-logic LIA)(synth-fun id ((x Int)) Int)(declare-var a Int)(constraint (= (id a) a))(check-synth)";

    #[test]
    fn single_cell_gives_single_rule() {
        let b = parse_benchmark(ID).unwrap();
        let s = build_structure(&b, WiringPolicy::SameIndex).unwrap();
        let mut m = MatrixInstance::zeros(s.n_rows(), s.n_cols());
        m.set(0, 0, true);
        let g = instantiate(&s, &b, &m).unwrap();
        assert_eq!(g.to_string(), "Start : Int ::= x\nN_Int_2 : Int ::=\nN_Bool_1 : Bool ::=\nN_Bool_2 : Bool ::=\n");
        assert_eq!(g.prune().unwrap().to_string(), "Start : Int ::= x\n");
    }

    #[test]
    fn full_instance_has_every_valid_pair() {
        let b = parse_benchmark(ID).unwrap();
        for wiring in [WiringPolicy::SameIndex, WiringPolicy::Cascade] {
            let s = build_structure(&b, wiring).unwrap();
            let g = instantiate(&s, &b, &full_instance(&s)).unwrap();
            assert_eq!(g.rule_count(), s.valid_count());
            assert_eq!(g.start, 0);
            assert_eq!(g.start_sort(), Sort::Int);
            let env = g.placeholder_env(&b.body_env());
            for r in g.rules.iter().flatten() {
                sort_of(&g.rhs_term(r), &env).unwrap();
            }
        }
    }

    #[test]
    fn cascade_wires_to_second_row() {
        let b = parse_benchmark(ID).unwrap();
        let s = build_structure(&b, WiringPolicy::Cascade).unwrap();
        let g = instantiate(&s, &b, &full_instance(&s)).unwrap();
        let plus = g.rules[0].iter().find(|r| matches!(r, Rhs::Node { op, .. } if op.name() == "+")).unwrap();
        assert_eq!(g.rhs_term(plus).to_string(), "(+ N_Int_2 N_Int_2)");
        let ite = g.rules[0].iter().find(|r| matches!(r, Rhs::Node { op, .. } if op.name() == "ite")).unwrap();
        assert_eq!(g.rhs_term(ite).to_string(), "(ite N_Bool_2 N_Int_2 N_Int_2)");
    }

    #[test]
    fn shared_structure_binds_per_benchmark() {
        let a =
            parse_benchmark("(set-logic LIA)(synth-fun f ((x Int) (y Int)) Int)(constraint (= (f 1 2) 3))").unwrap();
        let b = parse_benchmark(
            "(set-logic BV)(synth-fun g ((x (_ BitVec 4))) (_ BitVec 4))(declare-var v (_ BitVec 4))\
             (constraint (= (g v) (bvadd v #x3)))",
        )
        .unwrap();
        let s = build_shared_structure(&[a.clone(), b.clone()], WiringPolicy::SameIndex).unwrap();
        let ga = instantiate(&s, &a, &full_instance(&s)).unwrap();
        assert_eq!(ga.non_terminals[ga.start].name, "Start");
        assert!(ga.non_terminals.iter().all(|n| n.sort != Sort::BitVec(4)));
        // literals 1, 2 are covered by 1 and aux 2, 3
        let start_terms: Vec<String> = ga.rules[ga.start].iter().map(|r| ga.rhs_term(r).to_string()).collect();
        assert!(start_terms.contains(&"y".to_string()));
        assert!(start_terms.contains(&"3".to_string()));

        let gb = instantiate(&s, &b, &full_instance(&s)).unwrap();
        assert_eq!(gb.start_sort(), Sort::BitVec(4));
        assert_eq!(gb.non_terminals[gb.start].name, "Start");
        let names: Vec<&str> = gb.non_terminals.iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, ["Start", "N_BV4_2", "N_Bool_1", "N_Bool_2"]);
        let terms: Vec<String> = gb.rules[gb.start].iter().map(|r| gb.rhs_term(r).to_string()).collect();
        assert!(terms.contains(&"#x3".to_string()), "{terms:?}");
        assert!(terms.contains(&"#x0".to_string()));
        let env = gb.placeholder_env(&b.body_env());
        for r in gb.rules.iter().flatten() {
            sort_of(&gb.rhs_term(r), &env).unwrap();
        }
    }

    #[test]
    fn mixed_widths_are_rejected_by_generic_rows() {
        let b =
            parse_benchmark("(set-logic BV)(synth-fun g ((x (_ BitVec 4))) (_ BitVec 8))(constraint (= (g #x1) #x02))")
                .unwrap();
        let s = build_shared_structure(std::slice::from_ref(&b), WiringPolicy::SameIndex).unwrap();
        assert!(matches!(Binding::new(&s, &b), Err(BindError::MixedWidths { .. })));
        let exact = build_structure(&b, WiringPolicy::SameIndex).unwrap();
        assert!(Binding::new(&exact, &b).is_ok());
    }

    #[test]
    fn missing_helper_is_an_error() {
        let with = parse_benchmark(
            "(set-logic LIA)(define-fun inc ((x Int)) Int (+ x 1))(synth-fun f ((x Int)) Int)\
             (constraint (= (f 1) (inc 1)))",
        )
        .unwrap();
        let without = parse_benchmark("(set-logic LIA)(synth-fun f ((x Int)) Int)(constraint (= (f 1) 2))").unwrap();
        let s = build_structure(&with, WiringPolicy::SameIndex).unwrap();
        assert!(matches!(Binding::new(&s, &without), Err(BindError::MissingColumn { .. })));
    }
}
