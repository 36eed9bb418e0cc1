// SPDX-License-Identifier: Apache-2.0

//! Bounded verification of candidate solutions.

use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sygus::{mask, Benchmark, Sort, Term};

use super::compile::{inline_candidate, CExpr, EvalError};
use super::value::{Valuation, Value};

/// Input domain used when checking universally quantified constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyBound {
    /// Integer variables range over `[-int_bound, int_bound]`.
    pub int_bound: i64,
    /// Bitvector variables up to this width are enumerated exhaustively.
    pub exhaustive_bv_width: u32,
    /// Number of random valuations when some bitvector is wider.
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyBound {
    fn default() -> Self {
        VerifyBound { int_bound: 32, exhaustive_bv_width: 8, samples: 1024, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// No violation in the domain. `exhaustive` is false when integer
    /// variables were bounded or bitvectors were sampled.
    Confirmed {
        exhaustive: bool,
        checked: u64,
    },
    Counterexample(Valuation),
}

/// Valuations of the declared variables, smallest first.
#[derive(Debug, Clone)]
pub(crate) enum Domain {
    /// Per-variable value lists; tuples are visited in shells of increasing
    /// maximum rank, so small counterexamples come first.
    Shells(Vec<Vec<Value>>),
    Sampled {
        sorts: Vec<Sort>,
        int_bound: i64,
        count: usize,
        seed: u64,
    },
}

fn int_values(bound: i64) -> Vec<Value> {
    let mut out = vec![Value::Int(0)];
    for k in 1..=bound {
        out.push(Value::Int(k));
        out.push(Value::Int(-k));
    }
    out
}

impl Domain {
    pub(crate) fn new(sorts: &[Sort], bound: &VerifyBound) -> Domain {
        let wide = sorts.iter().any(|s| matches!(s, Sort::BitVec(w) if *w > bound.exhaustive_bv_width));
        if wide {
            return Domain::Sampled {
                sorts: sorts.to_vec(),
                int_bound: bound.int_bound,
                count: bound.samples,
                seed: bound.seed,
            };
        }
        Domain::Shells(
            sorts
                .iter()
                .map(|s| match *s {
                    Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
                    Sort::Int => int_values(bound.int_bound),
                    Sort::BitVec(w) => (0..=mask(w)).map(|v| Value::bv(w, v)).collect(),
                })
                .collect(),
        )
    }

    /// True when the domain covers every valuation of the variables.
    pub(crate) fn exhaustive(&self, sorts: &[Sort]) -> bool {
        matches!(self, Domain::Shells(_)) && !sorts.contains(&Sort::Int)
    }

    pub(crate) fn visit<B>(&self, f: &mut dyn FnMut(&[Value]) -> ControlFlow<B>) -> ControlFlow<B> {
        match self {
            Domain::Shells(lists) => visit_shells(lists, f),
            Domain::Sampled { sorts, int_bound, count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut buf = Vec::with_capacity(sorts.len());
                for _ in 0..*count {
                    buf.clear();
                    for s in sorts {
                        buf.push(match *s {
                            Sort::Bool => Value::Bool(rng.random()),
                            Sort::Int => Value::Int(rng.random_range(-*int_bound..=*int_bound)),
                            Sort::BitVec(w) => Value::bv(w, rng.random()),
                        });
                    }
                    f(&buf)?;
                }
                ControlFlow::Continue(())
            }
        }
    }
}

fn visit_shells<B>(lists: &[Vec<Value>], f: &mut dyn FnMut(&[Value]) -> ControlFlow<B>) -> ControlFlow<B> {
    let n = lists.len();
    if n == 0 {
        return f(&[]);
    }
    let longest = lists.iter().map(Vec::len).max().unwrap_or(0);
    let mut buf = vec![Value::Bool(false); n];
    let mut ranks = vec![0usize; n];
    let mut limits = vec![0usize; n];
    for shell in 0..longest {
        for pivot in 0..n {
            if shell >= lists[pivot].len() {
                continue;
            }
            // positions before the pivot stay below the shell, after it at most the shell
            for (j, l) in limits.iter_mut().enumerate() {
                *l = match j.cmp(&pivot) {
                    std::cmp::Ordering::Less => shell.min(lists[j].len()),
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Greater => (shell + 1).min(lists[j].len()),
                };
            }
            if limits.contains(&0) {
                continue;
            }
            ranks.iter_mut().for_each(|r| *r = 0);
            'tuples: loop {
                for j in 0..n {
                    let r = if j == pivot { shell } else { ranks[j] };
                    buf[j] = lists[j][r];
                }
                f(&buf)?;
                let mut j = n;
                loop {
                    if j == 0 {
                        break 'tuples;
                    }
                    j -= 1;
                    if j == pivot {
                        continue;
                    }
                    ranks[j] += 1;
                    if ranks[j] < limits[j] {
                        continue 'tuples;
                    }
                    ranks[j] = 0;
                }
            }
        }
    }
    ControlFlow::Continue(())
}

/// Constraints of `b` with candidate `body` inlined, over the declared variables.
pub(crate) fn compile_constraints(b: &Benchmark, body: &Term) -> Result<Vec<CExpr>, EvalError> {
    let params: Vec<String> = b.synth_fun.params.iter().map(|(n, _)| n.clone()).collect();
    let vars: Vec<String> = b.declared_vars.iter().map(|(n, _)| n.clone()).collect();
    b.constraints.iter().map(|c| inline_candidate(&b.helpers, &b.synth_fun.name, &params, body, c, &vars)).collect()
}

pub(crate) fn holds(constraints: &[CExpr], slots: &[Option<Value>]) -> bool {
    constraints.iter().all(|c| c.eval(slots) == Some(Value::Bool(true)))
}

/// Search `domain` for a valuation violating `constraints`. `tick` is called
/// with the work done so far every few thousand valuations and may stop the
/// search by returning false.
pub(crate) fn search_counterexample(
    constraints: &[CExpr],
    domain: &Domain,
    tick: &mut dyn FnMut(u64) -> bool,
) -> Result<(Option<Vec<Value>>, u64), ()> {
    let cost = constraints.iter().map(CExpr::size).sum::<usize>().max(1) as u64;
    let mut checked = 0u64;
    let mut slots: Vec<Option<Value>> = Vec::new();
    let flow = domain.visit(&mut |vals| {
        checked += 1;
        if checked.is_multiple_of(1024) && !tick(1024 * cost) {
            return ControlFlow::Break(None);
        }
        slots.clear();
        slots.extend(vals.iter().map(|v| Some(*v)));
        if holds(constraints, &slots) {
            ControlFlow::Continue(())
        } else {
            ControlFlow::Break(Some(vals.to_vec()))
        }
    });
    tick((checked % 1024) * cost);
    match flow {
        ControlFlow::Continue(()) => Ok((None, checked)),
        ControlFlow::Break(Some(cex)) => Ok((Some(cex), checked)),
        ControlFlow::Break(None) => Err(()),
    }
}

/// Check `t` as the body of the synth-fun against every constraint over the
/// bounded domain of the declared variables.
pub fn validate_solution(b: &Benchmark, t: &Term, bound: &VerifyBound) -> Result<Verdict, EvalError> {
    let constraints = compile_constraints(b, t)?;
    let sorts: Vec<Sort> = b.declared_vars.iter().map(|(_, s)| *s).collect();
    let domain = Domain::new(&sorts, bound);
    let (cex, checked) = search_counterexample(&constraints, &domain, &mut |_| true).expect("never interrupted");
    Ok(match cex {
        None => Verdict::Confirmed { exhaustive: domain.exhaustive(&sorts), checked },
        Some(vals) => {
            Verdict::Counterexample(Valuation::new(b.declared_vars.iter().map(|(n, _)| n.clone()).zip(vals).collect()))
        }
    })
}
