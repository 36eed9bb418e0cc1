// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use super::benchmark::Benchmark;
use super::sort::Sort;
use super::term::{Op, Term};
use crate::grammar::{Grammar, Rhs};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("grammar start symbol has sort {grammar} but the synth-fun returns {synth_fun}")]
    StartSort { grammar: Sort, synth_fun: Sort },
    #[error("grammar references `{0}`, which is not a synth-fun parameter or helper")]
    UnknownSymbol(String),
    #[error("non-terminal `{0}` clashes with a parameter or helper name")]
    NameClash(String),
}

/// Print `b` with `g` attached to its synth-fun command.
pub fn emit_benchmark_with_grammar(b: &Benchmark, g: &Grammar) -> Result<String, EmitError> {
    check_grammar(b, g)?;
    let mut out = b.clone();
    out.synth_fun.grammar = Some(g.to_sygus());
    Ok(out.to_string())
}

fn check_grammar(b: &Benchmark, g: &Grammar) -> Result<(), EmitError> {
    if g.start_sort() != b.synth_fun.ret {
        return Err(EmitError::StartSort { grammar: g.start_sort(), synth_fun: b.synth_fun.ret });
    }
    let params = &b.synth_fun.params;
    for nt in &g.non_terminals {
        if params.iter().any(|(n, _)| *n == nt.name) || b.helper(&nt.name).is_some() {
            return Err(EmitError::NameClash(nt.name.clone()));
        }
    }
    for r in g.rules.iter().flatten() {
        let mut bad = None;
        let mut check = |t: &Term| match t {
            Term::Var(n, s) if !params.iter().any(|(p, ps)| p == n && ps == s) => bad = Some(n.clone()),
            Term::App(Op::Call(n), _) if b.helper(n).is_none() => bad = Some(n.clone()),
            _ => {}
        };
        match r {
            Rhs::Leaf(t) => t.walk(&mut check),
            Rhs::Node { op, .. } => check(&Term::App(op.clone(), vec![])),
        }
        if let Some(n) = bad {
            return Err(EmitError::UnknownSymbol(n));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::NonTerminalDecl;
    use crate::sygus::parse_benchmark;

    const ID: &str =
        "(set-logic LIA)(synth-fun id ((x Int)) Int)(declare-var a Int)(constraint (= (id a) a))(check-synth)";

    fn leaf_grammar(leaves: Vec<Term>, sort: Sort) -> Grammar {
        Grammar {
            non_terminals: vec![NonTerminalDecl { name: "S".into(), sort }],
            rules: vec![leaves.into_iter().map(Rhs::Leaf).collect()],
            start: 0,
        }
    }

    #[test]
    fn smallest_grammar_is_emitted_inline() {
        let b = parse_benchmark(ID).unwrap();
        let g = leaf_grammar(vec![Term::var("x", Sort::Int), Term::int(0), Term::int(1)], Sort::Int);
        let text = emit_benchmark_with_grammar(&b, &g).unwrap();
        assert!(text.contains("(synth-fun id ((x Int)) Int ((S Int)) ((S Int (x 0 1))))"), "{text}");
        let back = parse_benchmark(&text).unwrap();
        assert_eq!(back.constraints, b.constraints);
    }

    #[test]
    fn start_sort_must_match() {
        let b = parse_benchmark(ID).unwrap();
        let g = leaf_grammar(vec![Term::bool(true)], Sort::Bool);
        assert!(matches!(emit_benchmark_with_grammar(&b, &g), Err(EmitError::StartSort { .. })));
    }

    #[test]
    fn foreign_variables_are_rejected() {
        let b = parse_benchmark(ID).unwrap();
        let g = leaf_grammar(vec![Term::var("a", Sort::Int)], Sort::Int);
        assert_eq!(emit_benchmark_with_grammar(&b, &g), Err(EmitError::UnknownSymbol("a".into())));
        let g = leaf_grammar(vec![Term::var("x", Sort::Int)], Sort::Int);
        let mut clash = g.clone();
        clash.non_terminals[0].name = "x".into();
        assert_eq!(emit_benchmark_with_grammar(&b, &clash), Err(EmitError::NameClash("x".into())));
    }
}
