// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use super::check::{Env, FunSig};
use super::sort::Sort;
use super::term::{Builtin, Literal, Op, Term, Theory};

/// Logics with a fixed operator table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Logic {
    Lia,
    Bv,
}

impl Logic {
    /// Map an SMT-LIB logic symbol to a supported logic.
    pub fn from_symbol(s: &str) -> Option<Logic> {
        match s.strip_prefix("QF_").unwrap_or(s) {
            "LIA" => Some(Logic::Lia),
            "BV" => Some(Logic::Bv),
            _ => None,
        }
    }

    pub fn allows_sort(self, sort: Sort) -> bool {
        match (self, sort) {
            (_, Sort::Bool) => true,
            (Logic::Lia, Sort::Int) => true,
            (Logic::Bv, Sort::BitVec(_)) => true,
            _ => false,
        }
    }

    pub fn allows_builtin(self, op: Builtin) -> bool {
        match (self, op.theory()) {
            (_, Theory::Core) => true,
            (Logic::Lia, Theory::Lia) => true,
            (Logic::Bv, Theory::Bv) => true,
            _ => false,
        }
    }
}

/// A `define-fun` helper.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunDef {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub ret: Sort,
    pub body: Term,
}

impl FunDef {
    pub fn sig(&self) -> FunSig {
        FunSig { params: self.params.iter().map(|(_, s)| *s).collect(), ret: self.ret }
    }
}

/// One production of a grammar written inside a synth-fun command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GTerm {
    Term(Term),
    Constant(Sort),
    Variable(Sort),
}

/// A grammar as written in SyGuS 2.1 syntax. The first non-terminal is the
/// start symbol; `rules[i]` belongs to `non_terminals[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SygusGrammar {
    pub non_terminals: Vec<(String, Sort)>,
    pub rules: Vec<Vec<GTerm>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthFun {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub ret: Sort,
    /// Grammar given in the input, if any. Kept for printing only.
    pub grammar: Option<SygusGrammar>,
}

impl SynthFun {
    pub fn sig(&self) -> FunSig {
        FunSig { params: self.params.iter().map(|(_, s)| *s).collect(), ret: self.ret }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Benchmark {
    pub logic: String,
    pub synth_fun: SynthFun,
    pub declared_vars: Vec<(String, Sort)>,
    pub constraints: Vec<Term>,
    pub helpers: Vec<FunDef>,
    pub source_id: String,
}

impl Benchmark {
    pub fn logic_kind(&self) -> Option<Logic> {
        Logic::from_symbol(&self.logic)
    }

    /// Environment of the constraints: declared variables, helpers and the synth-fun.
    pub fn env(&self) -> Env {
        let mut env = Env::new();
        for (n, s) in &self.declared_vars {
            env.bind_var(n.clone(), *s);
        }
        for h in &self.helpers {
            env.bind_fun(h.name.clone(), h.sig());
        }
        env.bind_fun(self.synth_fun.name.clone(), self.synth_fun.sig());
        env
    }

    /// Environment of a candidate body: the synth-fun parameters and the helpers.
    pub fn body_env(&self) -> Env {
        let mut env = Env::new();
        for (n, s) in &self.synth_fun.params {
            env.bind_var(n.clone(), *s);
        }
        for h in &self.helpers {
            env.bind_fun(h.name.clone(), h.sig());
        }
        env
    }

    pub fn helper(&self, name: &str) -> Option<&FunDef> {
        self.helpers.iter().find(|h| h.name == name)
    }

    /// Distinct literals occurring in the constraints, in order of first
    /// occurrence. Negative integers count as literals.
    pub fn literal_constants(&self) -> Vec<Literal> {
        let mut out: Vec<Literal> = Vec::new();
        for c in &self.constraints {
            c.walk(&mut |t| {
                if let Term::Const(l) = t {
                    if !out.contains(l) {
                        out.push(l.clone());
                    }
                }
            });
        }
        out
    }

    /// Sorts used by the synth-fun signature, return sort first.
    pub fn signature_sorts(&self) -> Vec<Sort> {
        let mut out = vec![self.synth_fun.ret];
        for (_, s) in &self.synth_fun.params {
            if !out.contains(s) {
                out.push(*s);
            }
        }
        out
    }

    /// True if every application of the synth-fun in the constraints has
    /// arguments that do not themselves call the synth-fun.
    pub fn is_single_invocation(&self) -> bool {
        let f = &self.synth_fun.name;
        let mut ok = true;
        for c in &self.constraints {
            c.walk(&mut |t| {
                if let Term::App(Op::Call(n), args) = t {
                    if n == f && args.iter().any(|a| a.calls(f)) {
                        ok = false;
                    }
                }
            });
        }
        ok
    }
}

fn write_params(f: &mut fmt::Formatter<'_>, params: &[(String, Sort)]) -> fmt::Result {
    f.write_str("(")?;
    for (i, (n, s)) in params.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "({n} {s})")?;
    }
    f.write_str(")")
}

impl fmt::Display for GTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GTerm::Term(t) => write!(f, "{t}"),
            GTerm::Constant(s) => write!(f, "(Constant {s})"),
            GTerm::Variable(s) => write!(f, "(Variable {s})"),
        }
    }
}

impl fmt::Display for SygusGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_params(f, &self.non_terminals)?;
        f.write_str(" (")?;
        for (i, ((n, s), rules)) in self.non_terminals.iter().zip(&self.rules).enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({n} {s} (")?;
            for (j, r) in rules.iter().enumerate() {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{r}")?;
            }
            f.write_str("))")?;
        }
        f.write_str(")")
    }
}

/// Canonical SyGuS-IF text: one command per line, single spaces.
impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(set-logic {})", self.logic)?;
        for h in &self.helpers {
            write!(f, "(define-fun {} ", h.name)?;
            write_params(f, &h.params)?;
            writeln!(f, " {} {})", h.ret, h.body)?;
        }
        let sf = &self.synth_fun;
        write!(f, "(synth-fun {} ", sf.name)?;
        write_params(f, &sf.params)?;
        write!(f, " {}", sf.ret)?;
        if let Some(g) = &sf.grammar {
            write!(f, " {g}")?;
        }
        writeln!(f, ")")?;
        for (n, s) in &self.declared_vars {
            writeln!(f, "(declare-var {n} {s})")?;
        }
        for c in &self.constraints {
            writeln!(f, "(constraint {c})")?;
        }
        writeln!(f, "(check-synth)")
    }
}
