// SPDX-License-Identifier: Apache-2.0

//! The CEGIS loop.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::backend::{SolveResult, SolveStatus};
use crate::grammar::{Grammar, Rhs};
use crate::sygus::{Benchmark, Op, Sort, Term};

use super::compile::{CExpr, Compiler, EvalError};
use super::enumerate::{Enumerator, Prod, Stop};
use super::value::Value;
use super::verify::{compile_constraints, holds, search_counterexample, Domain, VerifyBound};

/// How solve time is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    /// Elapsed wall-clock time.
    Wall,
    /// Work units (bank entries, constraint evaluations) times a fixed cost.
    /// Reproducible across runs and machines. A wall-clock limit of
    /// `WALL_SAFETY_FACTOR` times the timeout (plus one second) still applies.
    Virtual { nanos_per_unit: u64 },
}

/// Resource limits of the builtin solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuiltinLimits {
    /// Largest candidate size (node count) enumerated.
    pub max_term_size: usize,
    /// Largest number of start-symbol candidates checked.
    pub max_candidates: u64,
    /// Largest number of stored terms across all banks.
    pub max_bank_entries: u64,
    pub verify: VerifyBound,
    /// Keep one term per behaviour on the current example set.
    pub observational_equivalence: bool,
    pub clock: Clock,
}

/// Default cost of one work unit under [`Clock::Virtual`].
pub const DEFAULT_NANOS_PER_UNIT: u64 = 40;

/// Wall-clock allowance under [`Clock::Virtual`], as a multiple of the timeout.
pub const WALL_SAFETY_FACTOR: u32 = 4;

impl Default for BuiltinLimits {
    fn default() -> Self {
        BuiltinLimits {
            max_term_size: 40,
            max_candidates: 50_000_000,
            max_bank_entries: 4_000_000,
            verify: VerifyBound::default(),
            observational_equivalence: true,
            clock: Clock::Virtual { nanos_per_unit: DEFAULT_NANOS_PER_UNIT },
        }
    }
}

#[derive(Default)]
struct Stats {
    /// Start-symbol candidates checked against the examples.
    checked: u64,
    /// Terms built by the enumerator, over all non-terminals and rounds.
    enumerated: u64,
    rounds: u64,
}

struct Budget {
    clock: Clock,
    timeout: Duration,
    started: Instant,
    work: u64,
    expired: bool,
    wall_hit: bool,
}

impl Budget {
    fn tick(&mut self, units: u64) -> bool {
        self.work += units;
        if let Clock::Virtual { nanos_per_unit } = self.clock {
            if self.virtual_time(nanos_per_unit) > self.timeout {
                self.expired = true;
            }
        }
        if self.started.elapsed() > self.wall_limit() {
            self.expired = true;
            self.wall_hit = true;
        }
        !self.expired
    }

    fn wall_limit(&self) -> Duration {
        match self.clock {
            Clock::Wall => self.timeout,
            Clock::Virtual { .. } => self.timeout * WALL_SAFETY_FACTOR + Duration::from_secs(1),
        }
    }

    fn virtual_time(&self, nanos_per_unit: u64) -> Duration {
        Duration::from_nanos(self.work.saturating_mul(nanos_per_unit))
    }

    fn charged(&self) -> Duration {
        let t = match self.clock {
            Clock::Wall => self.started.elapsed(),
            Clock::Virtual { nanos_per_unit } => self.virtual_time(nanos_per_unit),
        };
        t.min(self.timeout)
    }
}

/// Example set I compiled against the points at which candidates are evaluated.
struct Examples {
    /// Distinct synth-fun argument tuples.
    points: Vec<Vec<Value>>,
    /// Constraints instantiated per valuation, over point slots.
    checks: Vec<CExpr>,
}

fn compile_examples(b: &Benchmark, valuations: &[Vec<Value>]) -> Result<Examples, EvalError> {
    let c = Compiler { helpers: &b.helpers, synth: Some(&b.synth_fun.name) };
    let mut points: Vec<Vec<Value>> = Vec::new();
    let mut index: HashMap<Vec<Value>, usize> = HashMap::new();
    let mut checks = Vec::new();
    for v in valuations {
        let vars = |n: &str| b.declared_vars.iter().rposition(|(d, _)| d == n).map(|i| CExpr::Const(Some(v[i])));
        for constraint in &b.constraints {
            let e = c.compile(constraint, &vars, &mut |args| {
                let mut tuple = Vec::with_capacity(args.len());
                for a in args {
                    match a {
                        CExpr::Const(Some(x)) => tuple.push(x),
                        CExpr::Const(None) => return Ok(CExpr::Const(None)),
                        _ => return Err(EvalError::NestedCall),
                    }
                }
                let next = points.len();
                let i = *index.entry(tuple.clone()).or_insert(next);
                if i == next {
                    points.push(tuple);
                }
                Ok(CExpr::Slot(i))
            })?;
            if e != CExpr::Const(Some(Value::Bool(true))) {
                checks.push(e);
            }
        }
    }
    Ok(Examples { points, checks })
}

fn productions(b: &Benchmark, g: &Grammar, points: &[Vec<Value>]) -> Result<Vec<Vec<Prod>>, EvalError> {
    let params: Vec<&str> = b.synth_fun.params.iter().map(|(n, _)| n.as_str()).collect();
    let c = Compiler { helpers: &b.helpers, synth: None };
    let mut out = Vec::with_capacity(g.rules.len());
    for rules in &g.rules {
        let mut prods = Vec::with_capacity(rules.len());
        for r in rules {
            prods.push(match r {
                Rhs::Leaf(t) => {
                    let mut values = Vec::with_capacity(points.len());
                    for p in points {
                        let vars = |n: &str| params.iter().position(|q| *q == n).map(|i| CExpr::Const(Some(p[i])));
                        let e = c.compile(t, &vars, &mut |_| Err(EvalError::NestedCall))?;
                        values.push(e.eval(&[]));
                    }
                    Prod::Leaf { size: t.size(), values }
                }
                Rhs::Node { op: Op::Builtin(op), args } => Prod::Builtin { op: *op, args: args.clone() },
                Rhs::Node { op: Op::Call(name), args } => {
                    let h = b.helper(name).ok_or_else(|| EvalError::UnknownFunction(name.clone()))?;
                    let names: Vec<String> = h.params.iter().map(|(n, _)| n.clone()).collect();
                    Prod::Helper { body: c.with_slots(&h.body, &names)?, args: args.clone() }
                }
            });
        }
        out.push(prods);
    }
    Ok(out)
}

/// Check that every variable in the grammar is a synth-fun parameter.
fn check_grammar(b: &Benchmark, g: &Grammar) -> Result<(), String> {
    if g.start_sort() != b.synth_fun.ret {
        return Err(format!("grammar start sort {} differs from the return sort {}", g.start_sort(), b.synth_fun.ret));
    }
    for r in g.rules.iter().flatten() {
        if let Rhs::Leaf(t) = r {
            let mut bad = None;
            t.walk(&mut |s| {
                if let Term::Var(n, sort) = s {
                    if !b.synth_fun.params.iter().any(|(p, ps)| p == n && ps == sort) {
                        bad = Some(n.clone());
                    }
                }
            });
            if let Some(n) = bad {
                return Err(format!("grammar mentions `{n}`, which is not a synth-fun parameter"));
            }
        }
    }
    Ok(())
}

enum Outcome {
    Solved(Term),
    Stopped(SolveStatus, String),
}

/// Enumerative CEGIS: enumerate candidates by size, keep the first that
/// satisfies the constraints on every example, verify it over the bounded
/// domain, and restart with the counterexample added on failure.
pub fn synthesize(b: &Benchmark, g: &Grammar, limits: &BuiltinLimits, timeout: Duration) -> SolveResult {
    let mut budget =
        Budget { clock: limits.clock, timeout, started: Instant::now(), work: 0, expired: false, wall_hit: false };
    let mut stats = Stats::default();
    let outcome = if timeout.is_zero() {
        Outcome::Stopped(SolveStatus::Timeout, "zero timeout".into())
    } else {
        match check_grammar(b, g) {
            Err(msg) => Outcome::Stopped(SolveStatus::Unsolved, msg),
            Ok(()) => run(b, g, limits, &mut budget, &mut stats),
        }
    };
    let wall_time = budget.started.elapsed();
    let time = budget.charged();
    let (status, solution, mut diagnostics) = match outcome {
        Outcome::Solved(t) => (SolveStatus::Solved, Some(t), String::new()),
        Outcome::Stopped(s, msg) => (s, None, msg),
    };
    let bounded = b.declared_vars.iter().any(|(_, s)| match s {
        Sort::Int => true,
        Sort::BitVec(w) => *w > limits.verify.exhaustive_bv_width,
        Sort::Bool => false,
    });
    if status == SolveStatus::Solved && bounded {
        diagnostics = "bounded".into();
    }
    if budget.wall_hit && budget.clock != Clock::Wall {
        diagnostics = format!("wall-clock limit hit; {diagnostics}");
    }
    SolveResult {
        status,
        wall_time,
        time,
        solution,
        candidates: stats.enumerated,
        work: budget.work,
        diagnostics: format!("{diagnostics}{}{} rounds", if diagnostics.is_empty() { "" } else { "; " }, stats.rounds),
    }
}

fn run(b: &Benchmark, g: &Grammar, limits: &BuiltinLimits, budget: &mut Budget, stats: &mut Stats) -> Outcome {
    let sorts: Vec<Sort> = b.declared_vars.iter().map(|(_, s)| *s).collect();
    let domain = Domain::new(&sorts, &limits.verify);
    let single = b.is_single_invocation();
    let mut examples: Vec<Vec<Value>> = Vec::new();
    loop {
        stats.rounds += 1;
        let compiled = if single {
            match compile_examples(b, &examples) {
                Ok(e) => Some(e),
                Err(e) => return Outcome::Stopped(SolveStatus::Unsolved, format!("cannot evaluate constraints: {e}")),
            }
        } else {
            None
        };
        let points: &[Vec<Value>] = compiled.as_ref().map_or(&[], |e| &e.points);
        let prods = match productions(b, g, points) {
            Ok(p) => p,
            Err(e) => return Outcome::Stopped(SolveStatus::Unsolved, format!("cannot evaluate grammar: {e}")),
        };
        if compiled.as_ref().is_some_and(|e| e.checks.contains(&CExpr::Const(Some(Value::Bool(false))))) {
            return Outcome::Stopped(SolveStatus::Infeasible, "constraints are false on an example".into());
        }
        let oe = limits.observational_equivalence && single;
        let mut en = Enumerator::new(g, prods, points.len(), oe, limits.max_bank_entries);
        let check_cost = compiled.as_ref().map_or(1, |e| e.checks.iter().map(CExpr::size).sum::<usize>() as u64 + 1);
        let mut fallback_slots: Vec<Vec<Option<Value>>> = Vec::new();
        if !single {
            fallback_slots = examples.iter().map(|v| v.iter().map(|x| Some(*x)).collect()).collect();
        }
        let mut over_limit = false;
        let found: Result<Term, Outcome> = loop {
            if en.size() >= limits.max_term_size {
                break Err(Outcome::Stopped(
                    SolveStatus::Unsolved,
                    format!("size limit {} reached", limits.max_term_size),
                ));
            }
            if en.exhausted() {
                break Err(Outcome::Stopped(
                    SolveStatus::Unsolved,
                    format!("language exhausted at size {}", en.size()),
                ));
            }
            let mut pending_work = 0u64;
            let mut accept = |vals: &[Option<Value>], term: &dyn Fn() -> Term| -> bool {
                stats.checked += 1;
                if stats.checked > limits.max_candidates {
                    over_limit = true;
                    return true;
                }
                pending_work += check_cost;
                match &compiled {
                    Some(e) => holds(&e.checks, vals),
                    None => {
                        let Ok(cs) = compile_constraints(b, &term()) else { return false };
                        pending_work += cs.iter().map(CExpr::size).sum::<usize>() as u64 * fallback_slots.len() as u64;
                        fallback_slots.iter().all(|s| holds(&cs, s))
                    }
                }
            };
            let mut work = |units: u64| budget.tick(units);
            let res = en.next_size(&mut accept, &mut work);
            if !budget.tick(pending_work) && !matches!(res, Err(Stop::Found { .. })) {
                break Err(Outcome::Stopped(SolveStatus::Timeout, "timeout during enumeration".into()));
            }
            match res {
                Ok(_) => continue,
                Err(Stop::Found { .. }) if over_limit => {
                    break Err(Outcome::Stopped(
                        SolveStatus::Unsolved,
                        format!("candidate limit {} reached", limits.max_candidates),
                    ))
                }
                Err(Stop::Found { size, index }) => break Ok(en.term(g.start, size, index)),
                Err(Stop::Interrupted) => {
                    break Err(Outcome::Stopped(SolveStatus::Timeout, "timeout during enumeration".into()))
                }
                Err(Stop::Full) => {
                    break Err(Outcome::Stopped(
                        SolveStatus::Unsolved,
                        format!("bank limit {} reached", limits.max_bank_entries),
                    ))
                }
            }
        };
        stats.enumerated += en.attempts;
        let candidate = match found {
            Ok(t) => t,
            Err(stop) => return stop,
        };
        if budget.expired {
            return Outcome::Stopped(SolveStatus::Timeout, "timeout during enumeration".into());
        }
        let constraints = match compile_constraints(b, &candidate) {
            Ok(c) => c,
            Err(e) => return Outcome::Stopped(SolveStatus::Unsolved, format!("cannot evaluate candidate: {e}")),
        };
        let mut tick = |units: u64| budget.tick(units);
        match search_counterexample(&constraints, &domain, &mut tick) {
            Err(()) => return Outcome::Stopped(SolveStatus::Timeout, "timeout during verification".into()),
            Ok((None, _)) => {
                debug_assert!(g.derives(&candidate), "solution {candidate} not derivable");
                return Outcome::Solved(candidate);
            }
            Ok((Some(cex), _)) => {
                if examples.contains(&cex) {
                    return Outcome::Stopped(SolveStatus::Unsolved, "repeated counterexample".into());
                }
                examples.push(cex);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::tests::nt;
    use crate::sygus::{parse_benchmark, Builtin};

    fn limits() -> BuiltinLimits {
        BuiltinLimits { clock: Clock::Wall, ..BuiltinLimits::default() }
    }

    const ID: &str = "(set-logic LIA)(synth-fun id ((x Int)) Int)(declare-var a Int)(constraint (= (id a) a))";

    #[test]
    fn identity_with_single_rule() {
        let b = parse_benchmark(ID).unwrap();
        let g = Grammar {
            non_terminals: vec![nt("Start", Sort::Int)],
            rules: vec![vec![Rhs::Leaf(Term::var("x", Sort::Int))]],
            start: 0,
        };
        let r = synthesize(&b, &g, &limits(), Duration::from_secs(5));
        assert_eq!(r.status, SolveStatus::Solved);
        assert_eq!(r.solution, Some(Term::var("x", Sort::Int)));
        assert_eq!(r.candidates, 1);
        assert!(r.wall_time < Duration::from_millis(100));
    }

    #[test]
    fn zero_timeout() {
        let b = parse_benchmark(ID).unwrap();
        let g = Grammar {
            non_terminals: vec![nt("Start", Sort::Int)],
            rules: vec![vec![Rhs::Leaf(Term::var("x", Sort::Int))]],
            start: 0,
        };
        assert_eq!(synthesize(&b, &g, &limits(), Duration::ZERO).status, SolveStatus::Timeout);
    }

    #[test]
    fn finite_insufficient_language() {
        let b =
            parse_benchmark("(set-logic LIA)(synth-fun f ((x Int)) Int)(declare-var a Int)(constraint (= (f a) 2))")
                .unwrap();
        let g = Grammar {
            non_terminals: vec![nt("Start", Sort::Int)],
            rules: vec![vec![Rhs::Leaf(Term::int(0)), Rhs::Leaf(Term::int(1))]],
            start: 0,
        };
        let r = synthesize(&b, &g, &limits(), Duration::from_secs(5));
        assert_eq!(r.status, SolveStatus::Unsolved);
        assert!(r.diagnostics.contains("exhausted"), "{}", r.diagnostics);
    }

    fn max2_grammar() -> Grammar {
        // Start -> x | y | 0 | 1 | (ite B Start Start); B -> (>= Start Start)
        let x = Term::var("x", Sort::Int);
        let y = Term::var("y", Sort::Int);
        Grammar {
            non_terminals: vec![nt("Start", Sort::Int), nt("B", Sort::Bool)],
            rules: vec![
                vec![
                    Rhs::Leaf(x),
                    Rhs::Leaf(y),
                    Rhs::Leaf(Term::int(0)),
                    Rhs::Leaf(Term::int(1)),
                    Rhs::node(Builtin::Ite, vec![1, 0, 0]),
                ],
                vec![Rhs::node(Builtin::Ge, vec![0, 0])],
            ],
            start: 0,
        }
    }

    #[test]
    fn max2_by_examples() {
        let b = parse_benchmark(
            "(set-logic LIA)(synth-fun f ((x Int) (y Int)) Int)\
             (constraint (= (f 1 2) 2))(constraint (= (f 2 1) 2))(constraint (= (f 0 0) 0))\
             (constraint (= (f (- 1) (- 2)) (- 1)))",
        )
        .unwrap();
        for oe in [false, true] {
            let l = BuiltinLimits { observational_equivalence: oe, ..limits() };
            let r = synthesize(&b, &max2_grammar(), &l, Duration::from_secs(10));
            assert_eq!(r.status, SolveStatus::Solved, "{}", r.diagnostics);
            let t = r.solution.unwrap();
            assert_eq!(t.size(), 6, "{t}");
            assert!(matches!(
                crate::cegis::validate_solution(&b, &t, &VerifyBound::default()),
                Ok(crate::cegis::Verdict::Confirmed { .. })
            ));
        }
    }

    #[test]
    fn max2_universal() {
        let b = parse_benchmark(
            "(set-logic LIA)(synth-fun f ((x Int) (y Int)) Int)(declare-var a Int)(declare-var b Int)\
             (constraint (>= (f a b) a))(constraint (>= (f a b) b))(constraint (or (= (f a b) a) (= (f a b) b)))",
        )
        .unwrap();
        let r = synthesize(&b, &max2_grammar(), &limits(), Duration::from_secs(10));
        assert_eq!(r.status, SolveStatus::Solved, "{}", r.diagnostics);
        assert!(r.diagnostics.contains("bounded"));
    }

    #[test]
    fn nested_invocations_use_the_slow_path() {
        // f(f(a)) = a + 2 with f(x) = x + 1
        let b = parse_benchmark(
            "(set-logic LIA)(synth-fun f ((x Int)) Int)(declare-var a Int)(constraint (= (f (f a)) (+ a 2)))",
        )
        .unwrap();
        let g = Grammar {
            non_terminals: vec![nt("Start", Sort::Int)],
            rules: vec![vec![
                Rhs::Leaf(Term::var("x", Sort::Int)),
                Rhs::Leaf(Term::int(1)),
                Rhs::node(Builtin::Add, vec![0, 0]),
            ]],
            start: 0,
        };
        let r = synthesize(&b, &g, &limits(), Duration::from_secs(10));
        assert_eq!(r.status, SolveStatus::Solved, "{}", r.diagnostics);
        assert_eq!(r.solution.unwrap().to_string(), "(+ x 1)");
    }

    #[test]
    fn virtual_clock_is_reproducible() {
        let b = parse_benchmark(
            "(set-logic LIA)(synth-fun f ((x Int) (y Int)) Int)(declare-var a Int)(declare-var b Int)\
             (constraint (>= (f a b) a))(constraint (>= (f a b) b))(constraint (or (= (f a b) a) (= (f a b) b)))",
        )
        .unwrap();
        let l = BuiltinLimits::default();
        let r1 = synthesize(&b, &max2_grammar(), &l, Duration::from_secs(10));
        let r2 = synthesize(&b, &max2_grammar(), &l, Duration::from_secs(10));
        assert_eq!(r1.time, r2.time);
        assert_eq!(r1.work, r2.work);
        assert_eq!(r1.candidates, r2.candidates);
    }
}
