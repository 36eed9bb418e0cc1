// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;
use std::path::Path;

use num_bigint::BigInt;
use thiserror::Error;

use super::benchmark::{Benchmark, FunDef, GTerm, Logic, SygusGrammar, SynthFun};
use super::check::{builtin_sort, sort_of, Env, FunSig, SortError};
use super::sexp::{read_all, Pos, Sexp, SexpKind};
use super::sort::{Sort, MAX_BV_WIDTH};
use super::term::{Builtin, Literal, Op, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: unsupported command `{command}`")]
    Unsupported { pos: Pos, command: String },
    #[error("{pos}: sort error: {source}")]
    Sort { pos: Pos, source: SortError },
    #[error("unsupported logic `{0}`")]
    UnsupportedLogic(String),
    #[error("{pos}: more than one synth-fun")]
    DuplicateSynthFun { pos: Pos },
    #[error("no synth-fun command")]
    MissingSynthFun,
}

/// Commands of SyGuS 2.1 that are recognised but outside the supported subset.
const UNSUPPORTED: &[&str] = &[
    "set-option",
    "set-info",
    "set-feature",
    "synth-inv",
    "declare-primed-var",
    "inv-constraint",
    "declare-fun",
    "declare-datatype",
    "declare-datatypes",
    "define-sort",
    "define-fun-rec",
    "define-funs-rec",
    "assume",
    "chc-constraint",
    "declare-oracle-fun",
    "declare-correctness-oracle",
    "declare-correctness-cex-oracle",
    "oracle-assume",
    "oracle-constraint",
    "optimize-synth",
    "declare-weight",
    "push",
    "pop",
];

fn syntax<T>(pos: Pos, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Syntax { pos, message: message.into() })
}

fn is_numeral(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn parse_bv_literal(s: &str, pos: Pos) -> Result<Option<Literal>, ParseError> {
    let (digits, radix, bits_per_digit) = if let Some(d) = s.strip_prefix("#b") {
        (d, 2, 1)
    } else if let Some(d) = s.strip_prefix("#x") {
        (d, 16, 4)
    } else {
        return Ok(None);
    };
    let width = digits.len() as u32 * bits_per_digit;
    if width == 0 {
        return syntax(pos, format!("empty bitvector literal `{s}`"));
    }
    if width > MAX_BV_WIDTH {
        return syntax(pos, format!("bitvector literal `{s}` wider than {MAX_BV_WIDTH} bits"));
    }
    match u64::from_str_radix(digits, radix) {
        Ok(v) => Ok(Some(Literal::bv(width, v))),
        Err(_) => syntax(pos, format!("malformed bitvector literal `{s}`")),
    }
}

pub(crate) fn parse_sort(s: &Sexp) -> Result<Sort, ParseError> {
    match &s.kind {
        SexpKind::Atom(a) if a == "Int" => Ok(Sort::Int),
        SexpKind::Atom(a) if a == "Bool" => Ok(Sort::Bool),
        SexpKind::List(items)
            if items.len() == 3 && items[0].atom() == Some("_") && items[1].atom() == Some("BitVec") =>
        {
            let w = items[2]
                .atom()
                .filter(|a| is_numeral(a))
                .and_then(|a| a.parse::<u32>().ok())
                .filter(|w| (1..=MAX_BV_WIDTH).contains(w));
            match w {
                Some(w) => Ok(Sort::BitVec(w)),
                None => syntax(items[2].pos, format!("bitvector width must be in 1..={MAX_BV_WIDTH}")),
            }
        }
        _ => syntax(s.pos, format!("unknown sort `{s}`")),
    }
}

/// Term reader over a fixed environment.
pub(crate) struct TermReader<'a> {
    pub env: &'a Env,
    pub logic: Logic,
}

impl TermReader<'_> {
    fn check_sort(&self, sort: Sort, pos: Pos) -> Result<(), ParseError> {
        if self.logic.allows_sort(sort) {
            Ok(())
        } else {
            syntax(pos, format!("sort {sort} is not part of the logic"))
        }
    }

    pub fn term(&self, s: &Sexp) -> Result<Term, ParseError> {
        let t = self.term_unchecked(s)?;
        sort_of(&t, self.env).map_err(|source| ParseError::Sort { pos: s.pos, source })?;
        Ok(t)
    }

    fn term_unchecked(&self, s: &Sexp) -> Result<Term, ParseError> {
        match &s.kind {
            SexpKind::Atom(a) => {
                if a == "true" || a == "false" {
                    return Ok(Term::bool(a == "true"));
                }
                if is_numeral(a) {
                    let n: BigInt = a.parse().expect("numeral");
                    self.check_sort(Sort::Int, s.pos)?;
                    return Ok(Term::Const(Literal::Int(n)));
                }
                if let Some(l) = parse_bv_literal(a, s.pos)? {
                    self.check_sort(l.sort(), s.pos)?;
                    return Ok(Term::Const(l));
                }
                if let Some(sort) = self.env.var(a) {
                    return Ok(Term::Var(a.clone(), sort));
                }
                match self.env.fun(a) {
                    Some(sig) if sig.params.is_empty() => Ok(Term::call(a.clone(), vec![])),
                    _ => Err(ParseError::Sort { pos: s.pos, source: SortError::Unbound(a.clone()) }),
                }
            }
            SexpKind::List(items) => {
                let Some(head) = items.first() else {
                    return syntax(s.pos, "empty application");
                };
                let Some(name) = head.atom() else {
                    return syntax(head.pos, "expected an operator symbol");
                };
                // (_ bvN w)
                if name == "_" {
                    if items.len() == 3 {
                        if let (Some(v), Some(w)) = (items[1].atom(), items[2].atom()) {
                            if let (Some(v), Ok(w)) = (v.strip_prefix("bv"), w.parse::<u32>()) {
                                if is_numeral(v) && (1..=MAX_BV_WIDTH).contains(&w) {
                                    let val: BigInt = v.parse().expect("numeral");
                                    let bits = (val & BigInt::from(u64::MAX)).to_string().parse::<u64>().unwrap();
                                    let l = Literal::bv(w, bits);
                                    self.check_sort(l.sort(), s.pos)?;
                                    return Ok(Term::Const(l));
                                }
                            }
                        }
                    }
                    return syntax(s.pos, format!("unsupported indexed term `{s}`"));
                }
                // (- n) is a negative literal
                if name == "-" && items.len() == 2 {
                    if let Some(a) = items[1].atom().filter(|a| is_numeral(a)) {
                        let n: BigInt = a.parse().expect("numeral");
                        return Ok(Term::Const(Literal::Int(-n)));
                    }
                }
                if matches!(name, "let" | "forall" | "exists" | "!") {
                    return syntax(head.pos, format!("`{name}` is not supported"));
                }
                let args = items[1..].iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                if let Some(b) = Builtin::from_name(name) {
                    if !self.logic.allows_builtin(b) {
                        return syntax(head.pos, format!("operator `{name}` is not part of the logic"));
                    }
                    // Sort check happens in `term`; check here to report the innermost position.
                    let sorts: Vec<Sort> = args.iter().map(|a| sort_of(a, self.env).expect("checked")).collect();
                    builtin_sort(b, &sorts).map_err(|source| ParseError::Sort { pos: s.pos, source })?;
                    Ok(Term::app(b, args))
                } else if self.env.fun(name).is_some() {
                    Ok(Term::App(Op::Call(name.to_string()), args))
                } else {
                    Err(ParseError::Sort { pos: head.pos, source: SortError::Unbound(name.to_string()) })
                }
            }
        }
    }
}

fn symbol(s: &Sexp, what: &str) -> Result<String, ParseError> {
    match s.atom() {
        Some(a) if !is_numeral(a) && !a.starts_with('#') && !a.starts_with(':') => Ok(a.to_string()),
        _ => syntax(s.pos, format!("expected {what}")),
    }
}

fn parse_params(s: &Sexp, logic: Logic) -> Result<Vec<(String, Sort)>, ParseError> {
    let Some(items) = s.list() else {
        return syntax(s.pos, "expected a parameter list");
    };
    let mut out = Vec::new();
    for p in items {
        match p.list() {
            Some([n, sort]) => {
                let name = symbol(n, "a parameter name")?;
                if out.iter().any(|(m, _)| *m == name) {
                    return syntax(n.pos, format!("duplicate parameter `{name}`"));
                }
                let sort = parse_sort(sort)?;
                if !logic.allows_sort(sort) {
                    return syntax(p.pos, format!("sort {sort} is not part of the logic"));
                }
                out.push((name, sort));
            }
            _ => return syntax(p.pos, "expected `(name sort)`"),
        }
    }
    Ok(out)
}

fn expect_len(cmd: &Sexp, items: &[Sexp], lens: &[usize], usage: &str) -> Result<(), ParseError> {
    if lens.contains(&items.len()) {
        Ok(())
    } else {
        syntax(cmd.pos, format!("expected `{usage}`"))
    }
}

fn parse_grammar(
    decls: &Sexp,
    groups: &Sexp,
    params: &[(String, Sort)],
    helpers: &Env,
    logic: Logic,
) -> Result<SygusGrammar, ParseError> {
    let non_terminals = parse_params(decls, logic)?;
    let Some(groups) = groups.list() else {
        return syntax(groups.pos, "expected grouped rule lists");
    };
    if groups.len() != non_terminals.len() {
        return syntax(
            groups[0..].first().map_or(decls.pos, |g| g.pos),
            "rule groups do not match the non-terminal list",
        );
    }
    let mut env = helpers.clone();
    for (n, s) in params.iter().chain(&non_terminals) {
        env.bind_var(n.clone(), *s);
    }
    let reader = TermReader { env: &env, logic };
    let mut rules = Vec::new();
    for ((name, sort), g) in non_terminals.iter().zip(groups) {
        let items = match g.list() {
            Some([n, s, r]) if n.atom() == Some(name.as_str()) && parse_sort(s).ok() == Some(*sort) => r,
            _ => return syntax(g.pos, format!("expected `({name} {sort} (rules...))`")),
        };
        let Some(items) = items.list() else {
            return syntax(items.pos, "expected a rule list");
        };
        let mut group = Vec::new();
        for r in items {
            let gt = match r.list() {
                Some([h, s]) if h.atom() == Some("Constant") => GTerm::Constant(parse_sort(s)?),
                Some([h, s]) if h.atom() == Some("Variable") => GTerm::Variable(parse_sort(s)?),
                _ => {
                    let t = reader.term(r)?;
                    let got = sort_of(&t, &env).expect("checked");
                    if got != *sort {
                        return Err(ParseError::Sort {
                            pos: r.pos,
                            source: SortError::Operand {
                                op: name.clone(),
                                position: group.len(),
                                expected: sort.to_string(),
                                found: got,
                            },
                        });
                    }
                    GTerm::Term(t)
                }
            };
            group.push(gt);
        }
        rules.push(group);
    }
    Ok(SygusGrammar { non_terminals, rules })
}

/// Parse SyGuS-IF text. The result's `source_id` is `"inline"`.
pub fn parse_benchmark(text: &str) -> Result<Benchmark, ParseError> {
    let cmds = read_all(text).map_err(|e| ParseError::Syntax { pos: e.pos, message: e.message })?;
    let mut logic: Option<(String, Logic)> = None;
    let mut synth_fun: Option<SynthFun> = None;
    let mut declared_vars = Vec::new();
    let mut constraints = Vec::new();
    let mut helpers: Vec<FunDef> = Vec::new();
    let mut env = Env::new();
    let mut names: HashSet<String> = HashSet::new();

    for cmd in &cmds {
        let Some(items) = cmd.list() else {
            return syntax(cmd.pos, "expected a command");
        };
        let Some(head) = items.first() else {
            return syntax(cmd.pos, "empty command");
        };
        let Some(name) = head.atom() else {
            return syntax(head.pos, "expected a command name");
        };
        if UNSUPPORTED.contains(&name) || name.starts_with("oracle-") {
            return Err(ParseError::Unsupported { pos: head.pos, command: name.to_string() });
        }
        if name == "set-logic" {
            expect_len(cmd, items, &[2], "(set-logic L)")?;
            if logic.is_some() {
                return syntax(cmd.pos, "duplicate set-logic");
            }
            let l = symbol(&items[1], "a logic name")?;
            let kind = Logic::from_symbol(&l).ok_or_else(|| ParseError::UnsupportedLogic(l.clone()))?;
            logic = Some((l, kind));
            continue;
        }
        let known = matches!(name, "synth-fun" | "declare-var" | "define-fun" | "constraint" | "check-synth");
        if !known {
            return syntax(head.pos, format!("unknown command `{name}`"));
        }
        let Some((_, lg)) = logic.as_ref().map(|(s, l)| (s.clone(), *l)) else {
            return syntax(cmd.pos, "set-logic must come first");
        };
        let mut declare = |n: &str, pos: Pos| -> Result<(), ParseError> {
            if Builtin::from_name(n).is_some() || !names.insert(n.to_string()) {
                return syntax(pos, format!("duplicate declaration of `{n}`"));
            }
            Ok(())
        };
        match name {
            "synth-fun" => {
                expect_len(cmd, items, &[4, 6], "(synth-fun f ((x S)...) R [grammar])")?;
                if synth_fun.is_some() {
                    return Err(ParseError::DuplicateSynthFun { pos: cmd.pos });
                }
                let fname = symbol(&items[1], "a function name")?;
                declare(&fname, items[1].pos)?;
                let params = parse_params(&items[2], lg)?;
                let ret = parse_sort(&items[3])?;
                if !lg.allows_sort(ret) {
                    return syntax(items[3].pos, format!("sort {ret} is not part of the logic"));
                }
                let grammar =
                    if items.len() == 6 { Some(parse_grammar(&items[4], &items[5], &params, &env, lg)?) } else { None };
                let sf = SynthFun { name: fname, params, ret, grammar };
                env.bind_fun(sf.name.clone(), sf.sig());
                synth_fun = Some(sf);
            }
            "declare-var" => {
                expect_len(cmd, items, &[3], "(declare-var x S)")?;
                let v = symbol(&items[1], "a variable name")?;
                declare(&v, items[1].pos)?;
                let sort = parse_sort(&items[2])?;
                if !lg.allows_sort(sort) {
                    return syntax(items[2].pos, format!("sort {sort} is not part of the logic"));
                }
                env.bind_var(v.clone(), sort);
                declared_vars.push((v, sort));
            }
            "define-fun" => {
                expect_len(cmd, items, &[5], "(define-fun f ((x S)...) R body)")?;
                let fname = symbol(&items[1], "a function name")?;
                declare(&fname, items[1].pos)?;
                let params = parse_params(&items[2], lg)?;
                let ret = parse_sort(&items[3])?;
                let mut local = Env::new();
                for h in &helpers {
                    local.bind_fun(h.name.clone(), h.sig());
                }
                for (n, s) in &params {
                    local.bind_var(n.clone(), *s);
                }
                let body = TermReader { env: &local, logic: lg }.term(&items[4])?;
                let got = sort_of(&body, &local).expect("checked");
                if got != ret {
                    return Err(ParseError::Sort {
                        pos: items[4].pos,
                        source: SortError::Operand { op: fname, position: 0, expected: ret.to_string(), found: got },
                    });
                }
                let def = FunDef { name: fname, params, ret, body };
                env.bind_fun(def.name.clone(), FunSig { params: def.sig().params, ret });
                helpers.push(def);
            }
            "constraint" => {
                expect_len(cmd, items, &[2], "(constraint t)")?;
                let t = TermReader { env: &env, logic: lg }.term(&items[1])?;
                let got = sort_of(&t, &env).expect("checked");
                if got != Sort::Bool {
                    return Err(ParseError::Sort {
                        pos: items[1].pos,
                        source: SortError::Operand {
                            op: "constraint".into(),
                            position: 0,
                            expected: "Bool".into(),
                            found: got,
                        },
                    });
                }
                constraints.push(t);
            }
            "check-synth" => expect_len(cmd, items, &[1], "(check-synth)")?,
            _ => unreachable!(),
        }
    }
    let (logic, _) = logic.ok_or(ParseError::MissingSynthFun)?;
    let synth_fun = synth_fun.ok_or(ParseError::MissingSynthFun)?;
    Ok(Benchmark { logic, synth_fun, declared_vars, constraints, helpers, source_id: "inline".to_string() })
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
}

/// Read and parse a benchmark file; `source_id` is the path.
pub fn load_benchmark(path: &Path) -> Result<Benchmark, LoadError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: display.clone(), source })?;
    let mut b = parse_benchmark(&text).map_err(|source| LoadError::Parse { path: display.clone(), source })?;
    b.source_id = display;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ID: &str =
        "(set-logic LIA)(synth-fun id ((x Int)) Int)(declare-var a Int)(constraint (= (id a) a))(check-synth)";

    #[test]
    fn minimal_benchmark() {
        let b = parse_benchmark(ID).unwrap();
        assert_eq!(b.logic, "LIA");
        assert_eq!(b.synth_fun.name, "id");
        assert_eq!(b.synth_fun.params, vec![("x".to_string(), Sort::Int)]);
        assert_eq!(b.synth_fun.ret, Sort::Int);
        assert_eq!(b.declared_vars.len(), 1);
        assert_eq!(b.constraints.len(), 1);
    }

    #[test]
    fn misspelled_command_is_a_syntax_error_at_the_token() {
        let text = ID.replace("(constraint", "(constrant");
        let err = parse_benchmark(&text).unwrap_err();
        let col = text.find("constrant").unwrap() + 1;
        assert_eq!(
            err,
            ParseError::Syntax { pos: Pos { line: 1, col }, message: "unknown command `constrant`".into() }
        );
    }

    #[test]
    fn unsupported_commands_are_named() {
        let err = parse_benchmark("(set-logic LIA)(set-option :x 1)").unwrap_err();
        assert!(matches!(err, ParseError::Unsupported { ref command, .. } if command == "set-option"));
        let err = parse_benchmark("(set-logic LIA)(synth-inv inv ((x Int)))").unwrap_err();
        assert!(matches!(err, ParseError::Unsupported { ref command, .. } if command == "synth-inv"));
    }

    #[test]
    fn helpers_are_recorded_and_checked() {
        let text = "(set-logic LIA)(define-fun inc ((x Int)) Int (+ x 1))(synth-fun f ((x Int)) Int)\
                    (declare-var a Int)(constraint (= (f a) (inc a)))(check-synth)";
        let b = parse_benchmark(text).unwrap();
        assert_eq!(b.helpers.len(), 1);
        assert_eq!(b.helpers[0].name, "inc");
        let printed = b.to_string();
        assert_eq!(parse_benchmark(&printed).unwrap(), b);
        assert_eq!(parse_benchmark(&parse_benchmark(&printed).unwrap().to_string()).unwrap().to_string(), printed);
    }

    #[test]
    fn synth_fun_count_is_enforced() {
        assert_eq!(parse_benchmark("(set-logic LIA)(check-synth)").unwrap_err(), ParseError::MissingSynthFun);
        let two = "(set-logic LIA)(synth-fun f ((x Int)) Int)(synth-fun g ((x Int)) Int)";
        assert!(matches!(parse_benchmark(two).unwrap_err(), ParseError::DuplicateSynthFun { .. }));
    }

    #[test]
    fn sort_errors_carry_positions() {
        let text = "(set-logic LIA)(synth-fun f ((x Int)) Int)(declare-var p Bool)\n(constraint (and p 1))";
        match parse_benchmark(text).unwrap_err() {
            ParseError::Sort { pos, source: SortError::Operand { op, .. } } => {
                assert_eq!(pos, Pos { line: 2, col: 13 });
                assert_eq!(op, "and");
            }
            e => panic!("unexpected {e:?}"),
        }
        let text = "(set-logic LIA)(synth-fun f ((x Int)) Int)(declare-var a Int)(constraint (+ (f a) 1))";
        assert!(matches!(parse_benchmark(text).unwrap_err(), ParseError::Sort { .. }));
    }

    #[test]
    fn bitvector_literals_and_logic_checks() {
        let text = "(set-logic BV)(synth-fun f ((x (_ BitVec 4))) (_ BitVec 4))(declare-var a (_ BitVec 4))\
                    (constraint (= (f a) (bvadd a #b0001)))(constraint (= (f #x0) (_ bv1 4)))";
        let b = parse_benchmark(text).unwrap();
        assert_eq!(b.literal_constants(), vec![Literal::bv(4, 1), Literal::bv(4, 0)]);
        assert!(parse_benchmark("(set-logic BV)(synth-fun f ((x Int)) Int)").is_err());
        assert!(matches!(
            parse_benchmark("(set-logic NRA)(synth-fun f ((x Int)) Int)").unwrap_err(),
            ParseError::UnsupportedLogic(_)
        ));
    }

    #[test]
    fn negative_literals_normalise() {
        let text = "(set-logic LIA)(synth-fun f ((x Int)) Int)(constraint (= (f (- 2)) (- 0 2)))";
        let b = parse_benchmark(text).unwrap();
        assert_eq!(b.literal_constants(), vec![Literal::int(-2), Literal::int(0), Literal::int(2)]);
        assert_eq!(b.constraints[0].to_string(), "(= (f (- 2)) (- 0 2))");
    }

    #[test]
    fn input_grammars_are_parsed_and_printed() {
        let text = "(set-logic LIA)(synth-fun f ((x Int)) Int ((S Int) (B Bool)) \
                    ((S Int (x 0 (ite B S S) (Constant Int))) (B Bool ((>= S S)))))(check-synth)";
        let b = parse_benchmark(text).unwrap();
        let g = b.synth_fun.grammar.as_ref().unwrap();
        assert_eq!(g.non_terminals.len(), 2);
        assert_eq!(g.rules[0].len(), 4);
        assert!(b.to_string().contains(
            "(synth-fun f ((x Int)) Int ((S Int) (B Bool)) ((S Int (x 0 (ite B S S) (Constant Int))) (B Bool ((>= S S)))))"
        ));
        assert_eq!(parse_benchmark(&b.to_string()).unwrap(), b);
    }

    #[test]
    fn ill_sorted_grammar_rule_is_rejected() {
        let text = "(set-logic LIA)(synth-fun f ((x Int)) Int ((S Int)) ((S Int (x true))))";
        assert!(matches!(parse_benchmark(text).unwrap_err(), ParseError::Sort { .. }));
    }
}
