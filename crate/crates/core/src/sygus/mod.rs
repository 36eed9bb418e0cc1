// SPDX-License-Identifier: Apache-2.0

//! A practical subset of SyGuS-IF 2.1: parsing, sort checking and printing.

mod benchmark;
mod check;
mod emit;
mod parse;
pub mod sexp;
mod sort;
mod term;

pub use benchmark::{Benchmark, FunDef, GTerm, Logic, SygusGrammar, SynthFun};
pub use check::{builtin_sort, sort_of, Env, FunSig, SortError};
pub use emit::{emit_benchmark_with_grammar, EmitError};
pub(crate) use parse::parse_sort;
pub(crate) use parse::TermReader;
pub use parse::{load_benchmark, parse_benchmark, LoadError, ParseError};
pub use sort::{Sort, MAX_BV_WIDTH};
pub use term::{mask, Builtin, BvConst, Literal, Op, Term, Theory};
