// SPDX-License-Identifier: Apache-2.0

//! Grammar search for syntax-guided synthesis.
//!
//! The space of candidate grammars for a SyGuS problem is represented as a
//! matrix whose rows are non-terminals and whose columns are production
//! rules. Each 0/1 assignment of the type-compatible cells is one
//! context-free grammar. A genetic algorithm searches that space, scoring a
//! matrix by how many training benchmarks a solver completes with the
//! grammar it induces, and how quickly.
//!
//! Modules:
//! - [`sygus`]: SyGuS-IF parsing, sort checking, printing.
//! - [`grammar`]: concrete grammars, pruning, derivation checks.
//! - [`metagrammar`]: matrix structures, instances, instantiation, file format.
//! - [`cegis`]: a small enumerative CEGIS solver.
//! - [`backend`]: the solver backend contract (builtin and external process).
//! - [`genetic`]: fitness, selection, scattered crossover, mutation, search loop.
//! - [`harness`]: corpus loading, train/test split, experiments and reports.

pub mod backend;
pub mod cegis;
pub mod genetic;
pub mod grammar;
pub mod harness;
pub mod metagrammar;
pub mod sygus;

pub use backend::{BackendConfig, BackendError, BuiltinLimits, SolveResult, SolveStatus, SolverBackend};
pub use genetic::{FitnessReport, GaConfig, SearchOutcome};
pub use grammar::{Grammar, NonTerminalDecl, Rhs};
pub use metagrammar::{MatrixInstance, MatrixStructure, WiringPolicy};
pub use sygus::{Benchmark, Sort, Term};
