// SPDX-License-Identifier: Apache-2.0

//! Sort checking against the fixed operator tables.

use std::collections::HashMap;

use thiserror::Error;

use super::sort::Sort;
use super::term::{Builtin, Op, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SortError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("`{op}` expects {expected} argument(s), found {found}")]
    Arity { op: String, expected: String, found: usize },
    #[error("operand {position} of `{op}` has sort {found} where {expected} is required")]
    Operand { op: String, position: usize, expected: String, found: Sort },
    #[error("variable `{name}` used with sort {used} but bound with sort {bound}")]
    VarSort { name: String, used: Sort, bound: Sort },
}

/// Signature of a user-defined function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunSig {
    pub params: Vec<Sort>,
    pub ret: Sort,
}

/// Symbol environment: variables and callable functions.
#[derive(Debug, Clone, Default)]
pub struct Env {
    vars: HashMap<String, Sort>,
    funs: HashMap<String, FunSig>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind_var(&mut self, name: impl Into<String>, sort: Sort) {
        self.vars.insert(name.into(), sort);
    }

    pub fn bind_fun(&mut self, name: impl Into<String>, sig: FunSig) {
        self.funs.insert(name.into(), sig);
    }

    pub fn var(&self, name: &str) -> Option<Sort> {
        self.vars.get(name).copied()
    }

    pub fn fun(&self, name: &str) -> Option<&FunSig> {
        self.funs.get(name)
    }
}

fn arity(op: Builtin, expected: &str, found: usize) -> SortError {
    SortError::Arity { op: op.name().to_string(), expected: expected.to_string(), found }
}

fn operand(op: Builtin, position: usize, expected: impl ToString, found: Sort) -> SortError {
    SortError::Operand { op: op.name().to_string(), position, expected: expected.to_string(), found }
}

fn all_of(op: Builtin, args: &[Sort], want: Sort) -> Result<(), SortError> {
    match args.iter().position(|&s| s != want) {
        Some(i) => Err(operand(op, i, want, args[i])),
        None => Ok(()),
    }
}

fn same_bv(op: Builtin, args: &[Sort]) -> Result<Sort, SortError> {
    let first = args[0];
    if !first.is_bitvec() {
        return Err(operand(op, 0, "a bitvector sort", first));
    }
    all_of(op, args, first)?;
    Ok(first)
}

/// Result sort of a builtin applied to operands of the given sorts.
pub fn builtin_sort(op: Builtin, args: &[Sort]) -> Result<Sort, SortError> {
    use Builtin::*;
    let n = args.len();
    match op {
        Add | And | Or => {
            if n < 2 {
                return Err(arity(op, "at least 2", n));
            }
        }
        Sub => {
            if n < 1 {
                return Err(arity(op, "at least 1", n));
            }
        }
        Not | BvNot | BvNeg => {
            if n != 1 {
                return Err(arity(op, "1", n));
            }
        }
        Ite => {
            if n != 3 {
                return Err(arity(op, "3", n));
            }
        }
        _ => {
            if n != 2 {
                return Err(arity(op, "2", n));
            }
        }
    }
    match op {
        Not | And | Or | Implies => all_of(op, args, Sort::Bool).map(|_| Sort::Bool),
        Eq => {
            if args[1] != args[0] {
                return Err(operand(op, 1, args[0], args[1]));
            }
            Ok(Sort::Bool)
        }
        Ite => {
            if args[0] != Sort::Bool {
                return Err(operand(op, 0, Sort::Bool, args[0]));
            }
            if args[2] != args[1] {
                return Err(operand(op, 2, args[1], args[2]));
            }
            Ok(args[1])
        }
        Add | Sub => all_of(op, args, Sort::Int).map(|_| Sort::Int),
        Ge | Le | Gt | Lt => all_of(op, args, Sort::Int).map(|_| Sort::Bool),
        BvUle | BvUlt | BvUge | BvUgt => same_bv(op, args).map(|_| Sort::Bool),
        _ => same_bv(op, args),
    }
}

/// Sort of `term` under `env`, rejecting arity and operand mismatches.
pub fn sort_of(term: &Term, env: &Env) -> Result<Sort, SortError> {
    match term {
        Term::Const(l) => Ok(l.sort()),
        Term::Var(name, sort) => match env.var(name) {
            Some(bound) if bound == *sort => Ok(bound),
            Some(bound) => Err(SortError::VarSort { name: name.clone(), used: *sort, bound }),
            None => Err(SortError::Unbound(name.clone())),
        },
        Term::App(op, args) => {
            let sorts = args.iter().map(|a| sort_of(a, env)).collect::<Result<Vec<_>, _>>()?;
            match op {
                Op::Builtin(b) => builtin_sort(*b, &sorts),
                Op::Call(name) => {
                    let sig = env.fun(name).ok_or_else(|| SortError::Unbound(name.clone()))?;
                    if sig.params.len() != sorts.len() {
                        return Err(SortError::Arity {
                            op: name.clone(),
                            expected: sig.params.len().to_string(),
                            found: sorts.len(),
                        });
                    }
                    for (i, (want, got)) in sig.params.iter().zip(&sorts).enumerate() {
                        if want != got {
                            return Err(SortError::Operand {
                                op: name.clone(),
                                position: i,
                                expected: want.to_string(),
                                found: *got,
                            });
                        }
                    }
                    Ok(sig.ret)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> Env {
        let mut env = Env::new();
        env.bind_var("x", Sort::Int);
        env.bind_var("p", Sort::Bool);
        env.bind_var("a", Sort::BitVec(4));
        env.bind_var("b", Sort::BitVec(4));
        env.bind_var("c", Sort::BitVec(8));
        env
    }

    #[test]
    fn int_addition() {
        let t = Term::app(Builtin::Add, vec![Term::var("x", Sort::Int), Term::int(1)]);
        assert_eq!(sort_of(&t, &env()), Ok(Sort::Int));
    }

    #[test]
    fn and_with_int_operand_is_rejected() {
        let t = Term::app(Builtin::And, vec![Term::var("p", Sort::Bool), Term::int(1)]);
        assert_eq!(
            sort_of(&t, &env()),
            Err(SortError::Operand { op: "and".into(), position: 1, expected: "Bool".into(), found: Sort::Int })
        );
    }

    #[test]
    fn bvadd_keeps_width() {
        let t = Term::app(Builtin::BvAdd, vec![Term::var("a", Sort::BitVec(4)), Term::var("b", Sort::BitVec(4))]);
        assert_eq!(sort_of(&t, &env()), Ok(Sort::BitVec(4)));
        let mixed = Term::app(Builtin::BvAdd, vec![Term::var("a", Sort::BitVec(4)), Term::var("c", Sort::BitVec(8))]);
        assert!(matches!(sort_of(&mixed, &env()), Err(SortError::Operand { position: 1, .. })));
    }

    #[test]
    fn arity_and_unbound_errors() {
        let t = Term::app(Builtin::Not, vec![Term::bool(true), Term::bool(false)]);
        assert!(matches!(sort_of(&t, &env()), Err(SortError::Arity { .. })));
        assert_eq!(sort_of(&Term::var("zz", Sort::Int), &env()), Err(SortError::Unbound("zz".into())));
        assert!(matches!(sort_of(&Term::call("f", vec![]), &env()), Err(SortError::Unbound(_))));
    }

    #[test]
    fn ite_branches_must_agree() {
        let good = Term::app(Builtin::Ite, vec![Term::bool(true), Term::int(1), Term::int(2)]);
        assert_eq!(sort_of(&good, &env()), Ok(Sort::Int));
        let bad = Term::app(Builtin::Ite, vec![Term::bool(true), Term::int(1), Term::bool(false)]);
        assert!(sort_of(&bad, &env()).is_err());
    }
}
