// SPDX-License-Identifier: Apache-2.0

//! Construction of the metagrammar for one benchmark or for a whole corpus.

use crate::sygus::{Benchmark, Builtin, Literal, Logic, Sort};

use super::structure::{MatrixSort, MatrixStructure, RuleKind, StructureError, WiringPolicy};

const INT_OPS: [Builtin; 3] = [Builtin::Add, Builtin::Sub, Builtin::Ite];
const BOOL_OPS: [Builtin; 4] = [Builtin::Not, Builtin::And, Builtin::Or, Builtin::Implies];
const INT_PREDICATES: [Builtin; 5] = [Builtin::Ge, Builtin::Le, Builtin::Gt, Builtin::Lt, Builtin::Eq];
const BV_OPS: [Builtin; 14] = [
    Builtin::BvNot,
    Builtin::BvNeg,
    Builtin::BvAdd,
    Builtin::BvSub,
    Builtin::BvMul,
    Builtin::BvUdiv,
    Builtin::BvUrem,
    Builtin::BvAnd,
    Builtin::BvOr,
    Builtin::BvXor,
    Builtin::BvShl,
    Builtin::BvLshr,
    Builtin::BvAshr,
    Builtin::Ite,
];
const BV_PREDICATES: [Builtin; 5] = [Builtin::BvUle, Builtin::BvUlt, Builtin::BvUge, Builtin::BvUgt, Builtin::Eq];

fn operand_sorts(op: Builtin, sort: MatrixSort) -> Vec<MatrixSort> {
    match op {
        Builtin::Not | Builtin::BvNot | Builtin::BvNeg => vec![sort],
        Builtin::Ite => vec![MatrixSort::Bool, sort, sort],
        _ => vec![sort, sort],
    }
}

/// Operator columns producing `sort`, given the sorts present in the structure.
fn operator_columns(sort: MatrixSort, present: &[MatrixSort]) -> Vec<(MatrixSort, RuleKind)> {
    let mut out = Vec::new();
    let mut push = |op: Builtin, operand: MatrixSort| {
        out.push((sort, RuleKind::Operator { op, operands: operand_sorts(op, operand) }));
    };
    match sort {
        MatrixSort::Int => INT_OPS.iter().for_each(|&op| push(op, sort)),
        MatrixSort::BitVec(_) => BV_OPS.iter().for_each(|&op| push(op, sort)),
        MatrixSort::Bool => {
            BOOL_OPS.iter().for_each(|&op| push(op, sort));
            for &p in present {
                match p {
                    MatrixSort::Int => INT_PREDICATES.iter().for_each(|&op| push(op, p)),
                    MatrixSort::BitVec(_) => BV_PREDICATES.iter().for_each(|&op| push(op, p)),
                    MatrixSort::Bool => {}
                }
            }
        }
    }
    out
}

fn check_logic(b: &Benchmark) -> Result<Logic, StructureError> {
    b.logic_kind().ok_or_else(|| StructureError::UnsupportedLogic(b.logic.clone()))
}

fn rows_for(sorts: &[MatrixSort]) -> Vec<(MatrixSort, u8)> {
    sorts.iter().flat_map(|&s| [(s, 1), (s, 2)]).collect()
}

/// Sorts of a signature, return sort first, Bool last unless already present.
fn with_bool(mut sorts: Vec<MatrixSort>) -> Vec<MatrixSort> {
    if !sorts.contains(&MatrixSort::Bool) {
        sorts.push(MatrixSort::Bool);
    }
    sorts
}

/// The metagrammar of a single benchmark: two non-terminals per occurring
/// sort, one column per theory operator, plus terminal columns for the
/// synth-fun arguments, the constants 0 and 1, the literals of the
/// specification and the helper functions.
pub fn build_structure(b: &Benchmark, wiring: WiringPolicy) -> Result<MatrixStructure, StructureError> {
    check_logic(b)?;
    let sorts = with_bool(b.signature_sorts().into_iter().map(MatrixSort::exact).collect());
    let literals = b.literal_constants();
    let mut cols = Vec::new();
    for &ms in &sorts {
        for (i, (_, s)) in b.synth_fun.params.iter().enumerate() {
            if ms.matches(*s) {
                cols.push((ms, RuleKind::Argument { index: i }));
            }
        }
        cols.push((ms, RuleKind::Zero));
        cols.push((ms, RuleKind::One));
        let basic = |l: &Literal| {
            let s = l.sort();
            *l == Literal::zero(s) || *l == Literal::one(s)
        };
        for l in literals.iter().filter(|l| ms.matches(l.sort()) && !basic(l)) {
            cols.push((ms, RuleKind::Literal(l.clone())));
        }
        for h in &b.helpers {
            let operands: Option<Vec<MatrixSort>> =
                h.params.iter().map(|(_, s)| Some(MatrixSort::exact(*s)).filter(|m| sorts.contains(m))).collect();
            match operands {
                Some(ops) if ms.matches(h.ret) && ops.is_empty() => {
                    cols.push((ms, RuleKind::HelperConst { name: h.name.clone() }))
                }
                Some(ops) if ms.matches(h.ret) => {
                    cols.push((ms, RuleKind::Helper { name: h.name.clone(), operands: ops }))
                }
                _ => {}
            }
        }
        cols.extend(operator_columns(ms, &sorts));
    }
    MatrixStructure::new(rows_for(&sorts), cols, wiring)
}

/// One metagrammar for a set of benchmarks. Columns are keyed by role:
/// operators and the constants 0/1 are shared, argument `k` of sort `T` is a
/// positional column, and bitvector rows are width-generic. Literals and
/// helpers of individual benchmarks are not columns; binding adds them as
/// always-on rules.
pub fn build_shared_structure(
    benchmarks: &[Benchmark],
    wiring: WiringPolicy,
) -> Result<MatrixStructure, StructureError> {
    let mut sorts: Vec<MatrixSort> = Vec::new();
    let add = |s: Sort, sorts: &mut Vec<MatrixSort>| {
        let m = MatrixSort::generic(s);
        if !sorts.contains(&m) {
            sorts.push(m);
        }
    };
    for b in benchmarks {
        check_logic(b)?;
        add(b.synth_fun.ret, &mut sorts);
    }
    for b in benchmarks {
        for (_, s) in &b.synth_fun.params {
            add(*s, &mut sorts);
        }
    }
    let sorts = with_bool(sorts);
    let mut cols = Vec::new();
    for &ms in &sorts {
        let arity = benchmarks.iter().map(|b| b.synth_fun.params.len()).max().unwrap_or(0);
        for index in 0..arity {
            if benchmarks.iter().any(|b| b.synth_fun.params.get(index).is_some_and(|(_, s)| ms.matches(*s))) {
                cols.push((ms, RuleKind::Argument { index }));
            }
        }
        cols.push((ms, RuleKind::Zero));
        cols.push((ms, RuleKind::One));
        cols.extend(operator_columns(ms, &sorts));
    }
    MatrixStructure::new(rows_for(&sorts), cols, wiring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sygus::parse_benchmark;

    const ID: &str =
        "(set-logic LIA)(synth-fun id ((x Int)) Int)(declare-var a Int)(constraint (= (id a) a))(check-synth)";

    fn labels(s: &MatrixStructure) -> Vec<String> {
        s.cols().iter().map(|c| c.label()).collect()
    }

    #[test]
    fn identity_structure() {
        let b = parse_benchmark(ID).unwrap();
        let s = build_structure(&b, WiringPolicy::SameIndex).unwrap();
        let rows: Vec<_> = s.rows().iter().map(|r| r.name.as_str()).collect();
        assert_eq!(rows, ["Start", "N_Int_2", "N_Bool_1", "N_Bool_2"]);
        // Int: x, 0, 1, +, -, ite. Bool: false, true, not, and, or, =>, >=, <=, >, <, =.
        assert_eq!(s.n_cols(), 17);
        assert_eq!(s.valid_count(), 2 * 6 + 2 * 11);
        let l = labels(&s);
        assert_eq!(&l[..3], ["$0:Int", "0:Int", "1:Int"]);
        assert!(!l.iter().any(|c| c.starts_with("7:")));
    }

    #[test]
    fn spec_literals_become_columns() {
        let text = "(set-logic LIA)(synth-fun f ((x Int)) Int)(declare-var a Int)(constraint (= (f a) (+ a 7)))";
        let s = build_structure(&parse_benchmark(text).unwrap(), WiringPolicy::SameIndex).unwrap();
        let c = s.cols().iter().find(|c| c.label() == "7:Int").expect("literal column");
        assert_eq!(c.result_sort, MatrixSort::Int);
    }

    #[test]
    fn helpers_become_columns() {
        let text = "(set-logic LIA)(define-fun inc ((x Int)) Int (+ x 1))(define-fun k () Int 5)\
                    (synth-fun f ((x Int)) Int)(declare-var a Int)(constraint (= (f a) (inc a)))";
        let s = build_structure(&parse_benchmark(text).unwrap(), WiringPolicy::SameIndex).unwrap();
        let l = labels(&s);
        assert!(l.contains(&"@inc(Int)->Int".to_string()), "{l:?}");
        assert!(l.contains(&"@k:Int".to_string()), "{l:?}");
    }

    #[test]
    fn bitvector_structure() {
        let text = "(set-logic BV)(synth-fun f ((x (_ BitVec 8))) Bool)(declare-var a (_ BitVec 8))\
                    (constraint (f a))";
        let s = build_structure(&parse_benchmark(text).unwrap(), WiringPolicy::Cascade).unwrap();
        let rows: Vec<_> = s.rows().iter().map(|r| r.key()).collect();
        assert_eq!(rows, ["N_Bool_1", "N_Bool_2", "N_BV8_1", "N_BV8_2"]);
        assert_eq!(s.rows()[0].name, "Start");
        // Bool: false, true, 4 connectives, 5 predicates. BV8: x, 0, 1, 14 operators.
        assert_eq!(s.n_cols(), 11 + 17);
    }

    #[test]
    fn shared_structure_uses_roles() {
        let a =
            parse_benchmark("(set-logic LIA)(synth-fun f ((x Int) (y Int)) Int)(constraint (= (f 1 2) 3))").unwrap();
        let b =
            parse_benchmark("(set-logic BV)(synth-fun g ((x (_ BitVec 4))) (_ BitVec 4))(constraint (= (g #x1) #x2))")
                .unwrap();
        let s = build_shared_structure(&[a, b], WiringPolicy::SameIndex).unwrap();
        let rows: Vec<_> = s.rows().iter().map(|r| r.key()).collect();
        assert_eq!(rows, ["N_Int_1", "N_Int_2", "N_BV_1", "N_BV_2", "N_Bool_1", "N_Bool_2"]);
        let l = labels(&s);
        assert!(l.contains(&"$1:Int".to_string()));
        assert!(l.contains(&"$0:BV".to_string()));
        assert!(!l.iter().any(|c| c.starts_with("3:") || c.starts_with("#x2")));
        assert!(l.contains(&"bvule(BV,BV)->Bool".to_string()));
    }
}
