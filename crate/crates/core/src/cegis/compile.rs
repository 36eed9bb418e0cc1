// SPDX-License-Identifier: Apache-2.0

//! Terms lowered to slot-indexed expressions with helpers inlined.

use thiserror::Error;

use crate::sygus::{Builtin, FunDef, Op, Term};

use super::value::{apply, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{0}` applied to the wrong number of arguments")]
    Arity(String),
    #[error("integer overflow")]
    Overflow,
    #[error("synth-fun argument depends on the synth-fun")]
    NestedCall,
}

/// An expression over numbered slots. `Const(None)` is an undefined value
/// (integer overflow), which propagates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum CExpr {
    Const(Option<Value>),
    Slot(usize),
    App(Builtin, Vec<CExpr>),
}

impl CExpr {
    pub(crate) fn eval(&self, slots: &[Option<Value>]) -> Option<Value> {
        match self {
            CExpr::Const(v) => *v,
            CExpr::Slot(i) => slots[*i],
            CExpr::App(Builtin::Ite, args) => match args[0].eval(slots)? {
                Value::Bool(true) => args[1].eval(slots),
                _ => args[2].eval(slots),
            },
            CExpr::App(op, args) => {
                let mut vals = [Value::Bool(false); 4];
                if args.len() <= 4 {
                    for (v, a) in vals.iter_mut().zip(args) {
                        *v = a.eval(slots)?;
                    }
                    apply(*op, &vals[..args.len()])
                } else {
                    let vals: Option<Vec<Value>> = args.iter().map(|a| a.eval(slots)).collect();
                    apply(*op, &vals?)
                }
            }
        }
    }

    pub(crate) fn size(&self) -> usize {
        match self {
            CExpr::App(_, args) => 1 + args.iter().map(CExpr::size).sum::<usize>(),
            _ => 1,
        }
    }

    fn app(op: Builtin, args: Vec<CExpr>) -> CExpr {
        if args.iter().all(|a| matches!(a, CExpr::Const(_))) {
            let vals: Option<Vec<Value>> =
                args.iter().map(|a| if let CExpr::Const(v) = a { *v } else { None }).collect();
            return CExpr::Const(vals.and_then(|v| apply(op, &v)));
        }
        CExpr::App(op, args)
    }
}

/// Lowers terms, inlining helper definitions. Calls to `synth` (if set) are
/// handed to the caller's hook with their lowered arguments.
pub(crate) struct Compiler<'a> {
    pub helpers: &'a [FunDef],
    pub synth: Option<&'a str>,
}

impl<'a> Compiler<'a> {
    pub(crate) fn compile(
        &self,
        t: &Term,
        vars: &dyn Fn(&str) -> Option<CExpr>,
        hook: &mut dyn FnMut(Vec<CExpr>) -> Result<CExpr, EvalError>,
    ) -> Result<CExpr, EvalError> {
        match t {
            Term::Const(l) => Ok(CExpr::Const(Value::from_literal(l))),
            Term::Var(name, _) => vars(name).ok_or_else(|| EvalError::Unbound(name.clone())),
            Term::App(op, args) => {
                let args = args.iter().map(|a| self.compile(a, vars, hook)).collect::<Result<Vec<_>, _>>()?;
                match op {
                    Op::Builtin(b) => Ok(CExpr::app(*b, args)),
                    Op::Call(name) if Some(name.as_str()) == self.synth => hook(args),
                    Op::Call(name) => {
                        let h = self
                            .helpers
                            .iter()
                            .find(|h| &h.name == name)
                            .ok_or_else(|| EvalError::UnknownFunction(name.clone()))?;
                        if h.params.len() != args.len() {
                            return Err(EvalError::Arity(name.clone()));
                        }
                        let inner = |n: &str| h.params.iter().position(|(p, _)| p == n).map(|i| args[i].clone());
                        let plain = Compiler { helpers: self.helpers, synth: None };
                        plain.compile(&h.body, &inner, &mut |_| Err(EvalError::UnknownFunction(name.clone())))
                    }
                }
            }
        }
    }

    /// Lower `t` with named parameters mapped to consecutive slots.
    pub(crate) fn with_slots(&self, t: &Term, params: &[String]) -> Result<CExpr, EvalError> {
        let vars = |n: &str| params.iter().rposition(|p| p == n).map(CExpr::Slot);
        let name = self.synth.unwrap_or_default().to_string();
        self.compile(t, &vars, &mut |_| Err(EvalError::UnknownFunction(name.clone())))
    }
}

/// Lower `body` as the synth-fun, then inline it into `constraint`, so the
/// result is over the slots of `vars`.
pub(crate) fn inline_candidate(
    helpers: &[FunDef],
    synth: &str,
    params: &[String],
    body: &Term,
    constraint: &Term,
    vars: &[String],
) -> Result<CExpr, EvalError> {
    let c = Compiler { helpers, synth: Some(synth) };
    let plain = Compiler { helpers, synth: None };
    let lookup = |n: &str| vars.iter().rposition(|p| p == n).map(CExpr::Slot);
    c.compile(constraint, &lookup, &mut |args| {
        if args.len() != params.len() {
            return Err(EvalError::Arity(synth.to_string()));
        }
        let inner = |n: &str| params.iter().rposition(|p| p == n).map(|i| args[i].clone());
        plain.compile(body, &inner, &mut |_| Err(EvalError::NestedCall))
    })
}
