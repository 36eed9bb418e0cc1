// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the criterion benchmarks in `benches/`.

use metagrammar_core::harness::load_corpus;
use metagrammar_core::metagrammar::{build_shared_structure, build_structure, full_instance, Binding};
use metagrammar_core::{Benchmark, Grammar, MatrixStructure, WiringPolicy};

/// Glob of the bundled toy corpus.
pub fn corpus_glob() -> String {
    format!("{}/../../corpus/*/*.sl", env!("CARGO_MANIFEST_DIR"))
}

pub fn toy_corpus() -> Vec<Benchmark> {
    load_corpus(&corpus_glob()).expect("bundled corpus loads")
}

/// The toy benchmark whose file stem is `name`.
pub fn toy_benchmark(name: &str) -> Benchmark {
    toy_corpus()
        .into_iter()
        .find(|b| b.source_id.ends_with(&format!("/{name}.sl")))
        .unwrap_or_else(|| panic!("no toy benchmark `{name}`"))
}

/// Pruned grammar of the benchmark's own full matrix.
pub fn full_grammar(b: &Benchmark) -> Grammar {
    let s = build_structure(b, WiringPolicy::SameIndex).expect("structure");
    Binding::new(&s, b).expect("binding").instantiate(&full_instance(&s)).prune().expect("non-empty grammar")
}

pub fn shared_structure() -> MatrixStructure {
    build_shared_structure(&toy_corpus(), WiringPolicy::SameIndex).expect("shared structure")
}
