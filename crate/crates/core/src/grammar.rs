// SPDX-License-Identifier: Apache-2.0

//! Concrete context-free grammars over SyGuS terms.

use std::collections::BTreeSet;
use std::fmt;

use crate::sygus::{Builtin, Env, GTerm, Op, Sort, SygusGrammar, Term};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NonTerminalDecl {
    pub name: String,
    pub sort: Sort,
}

/// Right-hand side of a production.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rhs {
    /// A variable, constant, or zero-arity helper call.
    Leaf(Term),
    /// An operator whose operands are non-terminals (by index).
    Node { op: Op, args: Vec<usize> },
}

impl Rhs {
    pub fn node(op: Builtin, args: Vec<usize>) -> Rhs {
        Rhs::Node { op: Op::Builtin(op), args }
    }

    fn operands(&self) -> &[usize] {
        match self {
            Rhs::Leaf(_) => &[],
            Rhs::Node { args, .. } => args,
        }
    }
}

/// A grammar (V, N, R, S). `rules[i]` are the productions of `non_terminals[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grammar {
    pub non_terminals: Vec<NonTerminalDecl>,
    pub rules: Vec<Vec<Rhs>>,
    pub start: usize,
}

impl Grammar {
    pub fn start_sort(&self) -> Sort {
        self.non_terminals[self.start].sort
    }

    pub fn rule_count(&self) -> usize {
        self.rules.iter().map(Vec::len).sum()
    }

    /// Terminal symbols V: every leaf term and every operator name.
    pub fn terminals(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for r in self.rules.iter().flatten() {
            match r {
                Rhs::Leaf(t) => {
                    out.insert(t.to_string());
                }
                Rhs::Node { op, .. } => {
                    out.insert(op.name().to_string());
                }
            }
        }
        out
    }

    /// The right-hand side as a term, with non-terminals as variables of their sort.
    pub fn rhs_term(&self, rhs: &Rhs) -> Term {
        match rhs {
            Rhs::Leaf(t) => t.clone(),
            Rhs::Node { op, args } => Term::App(
                op.clone(),
                args.iter()
                    .map(|&a| {
                        let nt = &self.non_terminals[a];
                        Term::var(nt.name.clone(), nt.sort)
                    })
                    .collect(),
            ),
        }
    }

    /// `base` extended with every non-terminal bound as a variable of its sort.
    pub fn placeholder_env(&self, base: &Env) -> Env {
        let mut env = base.clone();
        for nt in &self.non_terminals {
            env.bind_var(nt.name.clone(), nt.sort);
        }
        env
    }

    /// Least fixed point of "has a rule whose operands are all productive".
    pub fn productive(&self) -> Vec<bool> {
        let mut prod = vec![false; self.non_terminals.len()];
        loop {
            let mut changed = false;
            for (i, rules) in self.rules.iter().enumerate() {
                if !prod[i] && rules.iter().any(|r| r.operands().iter().all(|&a| prod[a])) {
                    prod[i] = true;
                    changed = true;
                }
            }
            if !changed {
                return prod;
            }
        }
    }

    /// Non-terminals reachable from the start symbol.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.non_terminals.len()];
        let mut stack = vec![self.start];
        seen[self.start] = true;
        while let Some(n) = stack.pop() {
            for r in &self.rules[n] {
                for &a in r.operands() {
                    if !seen[a] {
                        seen[a] = true;
                        stack.push(a);
                    }
                }
            }
        }
        seen
    }

    /// Remove unproductive non-terminals (and rules that mention them), then
    /// non-terminals unreachable from the start. `None` if the start symbol is
    /// unproductive, i.e. the grammar generates no finite term.
    pub fn prune(&self) -> Option<Grammar> {
        let prod = self.productive();
        if !prod[self.start] {
            return None;
        }
        let rules: Vec<Vec<Rhs>> = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, rs)| {
                if !prod[i] {
                    return Vec::new();
                }
                rs.iter().filter(|r| r.operands().iter().all(|&a| prod[a])).cloned().collect()
            })
            .collect();
        let trimmed = Grammar { non_terminals: self.non_terminals.clone(), rules, start: self.start };
        let reach = trimmed.reachable();
        let keep: Vec<usize> = (0..self.non_terminals.len()).filter(|&i| prod[i] && reach[i]).collect();
        let mut remap = vec![usize::MAX; self.non_terminals.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let rules = keep
            .iter()
            .map(|&old| {
                trimmed.rules[old]
                    .iter()
                    .map(|r| match r {
                        Rhs::Leaf(t) => Rhs::Leaf(t.clone()),
                        Rhs::Node { op, args } => {
                            Rhs::Node { op: op.clone(), args: args.iter().map(|&a| remap[a]).collect() }
                        }
                    })
                    .collect()
            })
            .collect();
        Some(Grammar {
            non_terminals: keep.iter().map(|&i| self.non_terminals[i].clone()).collect(),
            rules,
            start: remap[self.start],
        })
    }

    /// True when `term` is derivable from non-terminal `nt`.
    pub fn derives_from(&self, nt: usize, term: &Term) -> bool {
        self.rules[nt].iter().any(|r| match r {
            Rhs::Leaf(t) => t == term,
            Rhs::Node { op, args } => match term {
                Term::App(top, targs) if top == op && targs.len() == args.len() => {
                    args.iter().zip(targs).all(|(&a, t)| self.derives_from(a, t))
                }
                _ => false,
            },
        })
    }

    pub fn derives(&self, term: &Term) -> bool {
        self.derives_from(self.start, term)
    }

    /// True when the derivable language is infinite (some cycle among
    /// non-terminals that are productive and reachable).
    pub fn is_recursive(&self) -> bool {
        let n = self.non_terminals.len();
        // 0 = unvisited, 1 = on stack, 2 = done
        fn dfs(g: &Grammar, v: usize, state: &mut [u8]) -> bool {
            state[v] = 1;
            for r in &g.rules[v] {
                for &a in r.operands() {
                    if state[a] == 1 || (state[a] == 0 && dfs(g, a, state)) {
                        return true;
                    }
                }
            }
            state[v] = 2;
            false
        }
        let mut state = vec![0u8; n];
        (0..n).any(|v| state[v] == 0 && dfs(self, v, &mut state))
    }

    /// SyGuS 2.1 form, start symbol first, other non-terminals in order.
    pub fn to_sygus(&self) -> SygusGrammar {
        let order: Vec<usize> =
            std::iter::once(self.start).chain((0..self.non_terminals.len()).filter(|&i| i != self.start)).collect();
        SygusGrammar {
            non_terminals: order
                .iter()
                .map(|&i| (self.non_terminals[i].name.clone(), self.non_terminals[i].sort))
                .collect(),
            rules: order
                .iter()
                .map(|&i| self.rules[i].iter().map(|r| GTerm::Term(self.rhs_term(r))).collect())
                .collect(),
        }
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = std::iter::once(self.start).chain((0..self.non_terminals.len()).filter(|&i| i != self.start));
        for i in order {
            let nt = &self.non_terminals[i];
            write!(f, "{} : {} ::=", nt.name, nt.sort.short_name())?;
            for (j, r) in self.rules[i].iter().enumerate() {
                write!(f, "{} {}", if j == 0 { "" } else { " |" }, self.rhs_term(r))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn nt(name: &str, sort: Sort) -> NonTerminalDecl {
        NonTerminalDecl { name: name.to_string(), sort }
    }

    fn x() -> Rhs {
        Rhs::Leaf(Term::var("x", Sort::Int))
    }

    #[test]
    fn unproductive_start_is_empty() {
        // Start -> (+ A A); A has no rules
        let g = Grammar {
            non_terminals: vec![nt("Start", Sort::Int), nt("A", Sort::Int)],
            rules: vec![vec![Rhs::node(Builtin::Add, vec![1, 1])], vec![]],
            start: 0,
        };
        assert_eq!(g.prune(), None);
    }

    #[test]
    fn unreachable_non_terminals_are_dropped() {
        let g = Grammar {
            non_terminals: vec![nt("Start", Sort::Int), nt("A", Sort::Int)],
            rules: vec![vec![x()], vec![Rhs::Leaf(Term::int(0))]],
            start: 0,
        };
        let p = g.prune().unwrap();
        assert_eq!(p.non_terminals, vec![nt("Start", Sort::Int)]);
        assert_eq!(p.rules, vec![vec![x()]]);
    }

    #[test]
    fn rules_over_unproductive_operands_are_dropped() {
        // Start -> x | (+ Start A); A -> (+ A A)
        let g = Grammar {
            non_terminals: vec![nt("Start", Sort::Int), nt("A", Sort::Int)],
            rules: vec![vec![x(), Rhs::node(Builtin::Add, vec![0, 1])], vec![Rhs::node(Builtin::Add, vec![1, 1])]],
            start: 0,
        };
        let p = g.prune().unwrap();
        assert_eq!(p.rules, vec![vec![x()]]);
        assert!(!p.is_recursive());
        assert!(g.is_recursive());
    }

    #[test]
    fn derivation_membership() {
        let g = Grammar {
            non_terminals: vec![nt("Start", Sort::Int)],
            rules: vec![vec![x(), Rhs::Leaf(Term::int(0)), Rhs::node(Builtin::Add, vec![0, 0])]],
            start: 0,
        };
        let t = Term::app(Builtin::Add, vec![Term::var("x", Sort::Int), Term::int(0)]);
        assert!(g.derives(&t));
        assert!(!g.derives(&Term::int(1)));
        assert!(!g.derives(&Term::app(Builtin::Sub, vec![Term::var("x", Sort::Int), Term::int(0)])));
    }

    #[test]
    fn sygus_form_puts_start_first() {
        let g = Grammar {
            non_terminals: vec![nt("A", Sort::Int), nt("Start", Sort::Int)],
            rules: vec![vec![x()], vec![Rhs::node(Builtin::Add, vec![0, 0])]],
            start: 1,
        };
        let s = g.to_sygus();
        assert_eq!(s.non_terminals[0].0, "Start");
        assert_eq!(s.to_string(), "((Start Int) (A Int)) ((Start Int ((+ A A))) (A Int (x)))");
    }
}
