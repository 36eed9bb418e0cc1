// SPDX-License-Identifier: Apache-2.0

//! Bottom-up enumeration of the terms of a grammar, by size.

use std::collections::HashSet;

use crate::grammar::{Grammar, Rhs};
use crate::sygus::{Builtin, Op, Term};

use super::compile::CExpr;
use super::value::{apply, Value};

/// How a production computes its value at a point.
#[derive(Debug, Clone)]
pub(crate) enum Prod {
    /// A leaf term of the given size and its value at each point.
    Leaf {
        size: usize,
        values: Vec<Option<Value>>,
    },
    Builtin {
        op: Builtin,
        args: Vec<usize>,
    },
    /// A helper application; `body` is over slots `0..args.len()`.
    Helper {
        body: CExpr,
        args: Vec<usize>,
    },
}

impl Prod {
    fn args(&self) -> &[usize] {
        match self {
            Prod::Leaf { .. } => &[],
            Prod::Builtin { args, .. } | Prod::Helper { args, .. } => args,
        }
    }
}

/// Terms of one non-terminal and one size, stored as rule index plus
/// references to child entries, with their values at every point.
#[derive(Debug, Clone, Default)]
struct Bank {
    rules: Vec<u32>,
    offsets: Vec<u32>,
    kids: Vec<(u32, u32)>,
    values: Vec<Option<Value>>,
}

impl Bank {
    fn len(&self) -> usize {
        self.rules.len()
    }

    fn kids(&self, i: usize, arity: usize) -> &[(u32, u32)] {
        let o = self.offsets[i] as usize;
        &self.kids[o..o + arity]
    }
}

/// Why a size step stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stop {
    /// The candidate callback asked to stop at this start-symbol entry.
    Found { size: usize, index: usize },
    /// The work callback refused more work.
    Interrupted,
    /// The entry limit was reached.
    Full,
}

pub(crate) struct Enumerator {
    g: Grammar,
    prods: Vec<Vec<Prod>>,
    npoints: usize,
    banks: Vec<Vec<Bank>>,
    size: usize,
    largest_nonempty: usize,
    max_arity: usize,
    max_leaf: usize,
    observational: Option<Vec<HashSet<Box<[Option<Value>]>>>>,
    structural: Vec<Option<HashSet<Term>>>,
    pub entries: u64,
    pub attempts: u64,
    max_entries: u64,
}

fn same_head(a: &Rhs, b: &Rhs) -> bool {
    match (a, b) {
        (Rhs::Leaf(x), Rhs::Leaf(y)) => x == y,
        (Rhs::Node { op: p, args: a1 }, Rhs::Node { op: q, args: a2 }) => p == q && a1.len() == a2.len(),
        _ => false,
    }
}

impl Enumerator {
    /// `prods[nt][r]` describes `g.rules[nt][r]`; leaf values and helper
    /// bodies are precomputed for `npoints` points.
    pub(crate) fn new(
        g: &Grammar,
        prods: Vec<Vec<Prod>>,
        npoints: usize,
        observational: bool,
        max_entries: u64,
    ) -> Self {
        let n = g.non_terminals.len();
        let max_arity = prods.iter().flatten().map(|p| p.args().len()).max().unwrap_or(0);
        let max_leaf = prods
            .iter()
            .flatten()
            .map(|p| match p {
                Prod::Leaf { size, .. } => *size,
                _ if p.args().is_empty() => 1,
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        let structural = g
            .rules
            .iter()
            .map(|rs| {
                let dup = rs.iter().enumerate().any(|(i, a)| rs[..i].iter().any(|b| same_head(a, b)));
                (dup && !observational).then(HashSet::new)
            })
            .collect();
        Enumerator {
            g: g.clone(),
            prods,
            npoints,
            banks: vec![vec![Bank::default()]; n],
            size: 0,
            largest_nonempty: 0,
            max_arity,
            max_leaf,
            observational: observational.then(|| vec![HashSet::new(); n]),
            structural,
            entries: 0,
            attempts: 0,
            max_entries,
        }
    }

    /// Plain enumeration without points.
    pub(crate) fn plain(g: &Grammar) -> Self {
        let prods = g
            .rules
            .iter()
            .map(|rs| {
                rs.iter()
                    .map(|r| match r {
                        Rhs::Leaf(t) => Prod::Leaf { size: t.size(), values: Vec::new() },
                        Rhs::Node { op: Op::Builtin(b), args } => Prod::Builtin { op: *b, args: args.clone() },
                        Rhs::Node { args, .. } => Prod::Helper { body: CExpr::Const(None), args: args.clone() },
                    })
                    .collect()
            })
            .collect();
        Enumerator::new(g, prods, 0, false, u64::MAX)
    }

    pub(crate) fn grammar(&self) -> &Grammar {
        &self.g
    }

    /// Largest size enumerated so far.
    pub(crate) fn size(&self) -> usize {
        self.size
    }

    /// No term of any larger size can exist.
    pub(crate) fn exhausted(&self) -> bool {
        self.size >= self.max_leaf && self.size > self.max_arity * self.largest_nonempty
    }

    pub(crate) fn bank_len(&self, nt: usize, size: usize) -> usize {
        self.banks[nt].get(size).map_or(0, Bank::len)
    }

    pub(crate) fn term(&self, nt: usize, size: usize, index: usize) -> Term {
        term_of(&self.g, &self.banks, nt, size, index)
    }

    /// Enumerate the next size for every non-terminal, start symbol last.
    /// `candidate` sees each new start-symbol entry (its values and a way
    /// to build its term) and returns true to stop. `work` receives work
    /// units and returns false to interrupt.
    pub(crate) fn next_size(
        &mut self,
        candidate: &mut dyn FnMut(&[Option<Value>], &dyn Fn() -> Term) -> bool,
        work: &mut dyn FnMut(u64) -> bool,
    ) -> Result<usize, Stop> {
        let k = self.size + 1;
        let start = self.g.start;
        let order: Vec<usize> = (0..self.g.non_terminals.len()).filter(|&n| n != start).chain([start]).collect();
        let mut produced = 0;
        let prods = std::mem::take(&mut self.prods);
        for nt in order {
            let mut bank = Bank::default();
            let is_start = nt == start;
            let res = self.fill(&prods[nt], nt, k, &mut bank, is_start, candidate, work);
            produced += bank.len();
            self.banks[nt].push(bank);
            if let Err(stop) = res {
                // keep the partial level consistent: every other bank gets its slot
                for other in 0..self.banks.len() {
                    if self.banks[other].len() == k {
                        self.banks[other].push(Bank::default());
                    }
                }
                self.size = k;
                self.prods = prods;
                return Err(stop);
            }
        }
        self.prods = prods;
        self.size = k;
        if produced > 0 {
            self.largest_nonempty = k;
        }
        Ok(self.banks[start][k].len())
    }

    #[allow(clippy::too_many_arguments)]
    fn fill(
        &mut self,
        prods: &[Prod],
        nt: usize,
        k: usize,
        bank: &mut Bank,
        is_start: bool,
        candidate: &mut dyn FnMut(&[Option<Value>], &dyn Fn() -> Term) -> bool,
        work: &mut dyn FnMut(u64) -> bool,
    ) -> Result<(), Stop> {
        let np = self.npoints;
        let cost = 1 + np as u64;
        let mut vals: Vec<Option<Value>> = vec![None; np];
        let mut kids: Vec<(u32, u32)> = Vec::new();
        let mut argbuf: Vec<Option<Value>> = Vec::new();
        for (ri, prod) in prods.iter().enumerate() {
            let arity = prod.args().len();
            if let Prod::Leaf { size, values } = prod {
                if *size != k {
                    continue;
                }
                vals.clone_from(values);
                vals.resize(np, None);
                kids.clear();
            } else if arity == 0 {
                if k != 1 {
                    continue;
                }
                kids.clear();
                for v in vals.iter_mut() {
                    *v = match prod {
                        Prod::Helper { body, .. } => body.eval(&[]),
                        Prod::Builtin { op, .. } => apply(*op, &[]),
                        Prod::Leaf { .. } => unreachable!(),
                    };
                }
            }
            if prod.args().is_empty() {
                self.attempts += 1;
                if self.attempts.is_multiple_of(256) && !work(256 * cost) {
                    return Err(Stop::Interrupted);
                }
                if let Some(stop) = self.admit(nt, k, ri, &kids, &vals, bank, is_start, candidate)? {
                    return Err(stop);
                }
                continue;
            }
            if k < 1 + arity {
                continue;
            }
            let args = prod.args().to_vec();
            let mut comp = vec![1usize; arity];
            comp[arity - 1] = k - arity;
            loop {
                let lens: Vec<usize> = args.iter().zip(&comp).map(|(&a, &s)| self.bank_len(a, s)).collect();
                if lens.iter().all(|&l| l > 0) {
                    let mut idx = vec![0usize; arity];
                    'tuples: loop {
                        kids.clear();
                        kids.extend(comp.iter().zip(&idx).map(|(&s, &i)| (s as u32, i as u32)));
                        for (p, v) in vals.iter_mut().enumerate() {
                            argbuf.clear();
                            for (j, &a) in args.iter().enumerate() {
                                let b = &self.banks[a][comp[j]];
                                argbuf.push(b.values[idx[j] * np + p]);
                            }
                            *v = match prod {
                                Prod::Builtin { op: Builtin::Ite, .. } => match argbuf[0] {
                                    Some(Value::Bool(true)) => argbuf[1],
                                    Some(Value::Bool(false)) => argbuf[2],
                                    _ => None,
                                },
                                Prod::Builtin { op, .. } => {
                                    let mut plain = [Value::Bool(false); 4];
                                    let mut ok = argbuf.len() <= 4;
                                    for (dst, src) in plain.iter_mut().zip(&argbuf) {
                                        match src {
                                            Some(x) => *dst = *x,
                                            None => ok = false,
                                        }
                                    }
                                    if ok {
                                        apply(*op, &plain[..argbuf.len()])
                                    } else if argbuf.iter().all(Option::is_some) {
                                        let all: Vec<Value> = argbuf.iter().map(|v| v.unwrap()).collect();
                                        apply(*op, &all)
                                    } else {
                                        None
                                    }
                                }
                                Prod::Helper { body, .. } => body.eval(&argbuf),
                                Prod::Leaf { .. } => unreachable!(),
                            };
                        }
                        self.attempts += 1;
                        if self.attempts.is_multiple_of(256) && !work(256 * cost) {
                            return Err(Stop::Interrupted);
                        }
                        if let Some(stop) = self.admit(nt, k, ri, &kids, &vals, bank, is_start, candidate)? {
                            return Err(stop);
                        }
                        let mut j = arity;
                        loop {
                            if j == 0 {
                                break 'tuples;
                            }
                            j -= 1;
                            idx[j] += 1;
                            if idx[j] < lens[j] {
                                continue 'tuples;
                            }
                            idx[j] = 0;
                        }
                    }
                }
                if !next_composition(&mut comp) {
                    break;
                }
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn admit(
        &mut self,
        nt: usize,
        k: usize,
        rule: usize,
        kids: &[(u32, u32)],
        vals: &[Option<Value>],
        bank: &mut Bank,
        is_start: bool,
        candidate: &mut dyn FnMut(&[Option<Value>], &dyn Fn() -> Term) -> bool,
    ) -> Result<Option<Stop>, Stop> {
        if let Some(seen) = &mut self.observational {
            if seen[nt].contains(vals) {
                return Ok(None);
            }
            seen[nt].insert(vals.into());
        }
        let build = |g: &Grammar, banks: &[Vec<Bank>]| -> Term {
            match &g.rules[nt][rule] {
                Rhs::Leaf(t) => t.clone(),
                Rhs::Node { op, args } => Term::App(
                    op.clone(),
                    args.iter().zip(kids).map(|(&a, &(s, i))| term_of(g, banks, a, s as usize, i as usize)).collect(),
                ),
            }
        };
        if let Some(seen) = &mut self.structural[nt] {
            if !seen.insert(build(&self.g, &self.banks)) {
                return Ok(None);
            }
        }
        if self.entries >= self.max_entries {
            return Err(Stop::Full);
        }
        self.entries += 1;
        bank.rules.push(rule as u32);
        bank.offsets.push(bank.kids.len() as u32);
        bank.kids.extend_from_slice(kids);
        bank.values.extend_from_slice(vals);
        if is_start {
            let (g, banks) = (&self.g, &self.banks);
            if candidate(vals, &|| build(g, banks)) {
                return Ok(Some(Stop::Found { size: k, index: bank.len() - 1 }));
            }
        }
        Ok(None)
    }
}

fn term_of(g: &Grammar, banks: &[Vec<Bank>], nt: usize, size: usize, index: usize) -> Term {
    let bank = &banks[nt][size];
    match &g.rules[nt][bank.rules[index] as usize] {
        Rhs::Leaf(t) => t.clone(),
        Rhs::Node { op, args } => Term::App(
            op.clone(),
            args.iter()
                .zip(bank.kids(index, args.len()))
                .map(|(&a, &(s, i))| term_of(g, banks, a, s as usize, i as usize))
                .collect(),
        ),
    }
}

/// Next composition in lexicographic order (parts ≥ 1, fixed sum).
fn next_composition(c: &mut [usize]) -> bool {
    let n = c.len();
    let mut tail = *c.last().unwrap_or(&0);
    for i in (0..n.saturating_sub(1)).rev() {
        // c[i+1..] sums to `tail` over n-1-i parts
        if tail > n - 1 - i {
            c[i] += 1;
            c[i + 1..].iter_mut().for_each(|x| *x = 1);
            c[n - 1] = tail - 1 - (n - 2 - i);
            return true;
        }
        tail += c[i];
    }
    false
}

/// Incremental enumeration state for a grammar: banks of terms per
/// non-terminal and size, with no value-based deduplication.
pub struct EnumerationState {
    inner: Enumerator,
}

impl EnumerationState {
    pub fn new(g: &Grammar) -> Self {
        EnumerationState { inner: Enumerator::plain(g) }
    }

    /// Largest size enumerated so far.
    pub fn size(&self) -> usize {
        self.inner.size()
    }

    pub fn is_exhausted(&self) -> bool {
        self.inner.exhausted()
    }

    /// Derive every term of the next size and return the start symbol's
    /// new terms, in rule order then lexicographic operand order.
    pub fn enumerate_next_size(&mut self) -> Vec<Term> {
        let k = self.inner.size() + 1;
        let _ = self.inner.next_size(&mut |_, _| false, &mut |_| true);
        self.bank(self.inner.grammar().start, k)
    }

    /// Terms of `nt` with exactly `size` nodes enumerated so far.
    pub fn bank(&self, nt: usize, size: usize) -> Vec<Term> {
        (0..self.inner.bank_len(nt, size)).map(|i| self.inner.term(nt, size, i)).collect()
    }
}
