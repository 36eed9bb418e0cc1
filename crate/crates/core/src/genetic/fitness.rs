// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::time::Duration;

use rayon::prelude::*;

use crate::backend::{SolveContext, SolveStatus, SolverBackend};
use crate::grammar::Grammar;
use crate::metagrammar::{Binding, MatrixInstance, MatrixStructure};
use crate::sygus::{Benchmark, Term};

use super::{GaConfig, GaError};

/// A fitness value in nanosecond-seconds: `n * sum(T - t_i)` with every
/// time taken in whole nanoseconds, so scores compare and re-derive exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Score(pub u128);

impl Score {
    pub fn from_times(timeout: Duration, times: &[(bool, Duration)]) -> Score {
        let t = timeout.as_nanos();
        let n = times.iter().filter(|(solved, _)| *solved).count() as u128;
        let sum: u128 = times.iter().map(|&(solved, ti)| if solved { t - ti.as_nanos().min(t) } else { 0 }).sum();
        Score(n * sum)
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e9
    }
}

/// Seconds with nine decimals, exact.
impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:09}", self.0 / 1_000_000_000, self.0 % 1_000_000_000)
    }
}

/// Result of one benchmark under one grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkOutcome {
    pub benchmark: String,
    pub status: SolveStatus,
    /// The grammar pruned to nothing; the backend was not called.
    pub empty_grammar: bool,
    /// The t_i of the fitness function: charged time clamped to T, or T when unsolved.
    pub time: Duration,
    pub wall_time: Duration,
    pub candidates: u64,
    pub solution: Option<Term>,
    pub diagnostics: String,
}

impl BenchmarkOutcome {
    pub fn solved(&self) -> bool {
        self.status == SolveStatus::Solved
    }

    fn empty(benchmark: &str, timeout: Duration) -> Self {
        BenchmarkOutcome {
            benchmark: benchmark.to_string(),
            status: SolveStatus::Unsolved,
            empty_grammar: true,
            time: timeout,
            wall_time: Duration::ZERO,
            candidates: 0,
            solution: None,
            diagnostics: "empty grammar".into(),
        }
    }
}

/// Fitness of one instance over a benchmark set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitnessReport {
    pub instance: MatrixInstance,
    pub score: Score,
    pub solved_count: usize,
    pub total_benchmarks: usize,
    pub timeout: Duration,
    pub per_benchmark: Vec<BenchmarkOutcome>,
}

impl FitnessReport {
    pub fn new(instance: MatrixInstance, timeout: Duration, per_benchmark: Vec<BenchmarkOutcome>) -> Self {
        let times: Vec<(bool, Duration)> = per_benchmark.iter().map(|o| (o.solved(), o.time)).collect();
        FitnessReport {
            instance,
            score: Score::from_times(timeout, &times),
            solved_count: times.iter().filter(|(s, _)| *s).count(),
            total_benchmarks: per_benchmark.len(),
            timeout,
            per_benchmark,
        }
    }
}

/// Evaluates instances against a fixed benchmark set and backend, caching
/// results per (benchmark, pruned grammar) for the evaluator's lifetime.
pub struct Evaluator<'a> {
    benchmarks: &'a [Benchmark],
    bindings: Vec<Binding>,
    backend: &'a dyn SolverBackend,
    timeout: Duration,
    pool: rayon::ThreadPool,
    cache: HashMap<(usize, Grammar), BenchmarkOutcome>,
    backend_calls: u64,
    cache_hits: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        s: &MatrixStructure,
        benchmarks: &'a [Benchmark],
        backend: &'a dyn SolverBackend,
        timeout: Duration,
        workers: usize,
    ) -> Result<Self, GaError> {
        if benchmarks.is_empty() {
            return Err(GaError::NoBenchmarks);
        }
        let bindings = benchmarks.iter().map(|b| Binding::new(s, b)).collect::<Result<Vec<_>, _>>()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| GaError::Pool(e.to_string()))?;
        Ok(Evaluator {
            benchmarks,
            bindings,
            backend,
            timeout,
            pool,
            cache: HashMap::new(),
            backend_calls: 0,
            cache_hits: 0,
        })
    }

    pub fn benchmarks(&self) -> &[Benchmark] {
        self.benchmarks
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    /// Backend invocations so far.
    pub fn backend_calls(&self) -> u64 {
        self.backend_calls
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits
    }

    /// The pruned grammar of `m` for benchmark `i`; `None` if empty.
    pub fn grammar(&self, i: usize, m: &MatrixInstance) -> Option<Grammar> {
        self.bindings[i].instantiate(m).prune()
    }

    pub fn fitness(&mut self, m: &MatrixInstance) -> Result<FitnessReport, GaError> {
        Ok(self.evaluate(std::slice::from_ref(m))?.remove(0))
    }

    /// Reports for `pop`, in order. Distinct uncached (benchmark, grammar)
    /// pairs are solved in parallel; results are merged in population order.
    pub fn evaluate(&mut self, pop: &[MatrixInstance]) -> Result<Vec<FitnessReport>, GaError> {
        let nb = self.benchmarks.len();
        let mut slots: Vec<Vec<Option<Grammar>>> = Vec::with_capacity(pop.len());
        let mut jobs: Vec<(usize, Grammar)> = Vec::new();
        let mut queued: HashSet<(usize, Grammar)> = HashSet::new();
        for m in pop {
            if !m.same_shape(self.bindings[0].structure()) {
                return Err(GaError::Shape);
            }
            let mut row = Vec::with_capacity(nb);
            for i in 0..nb {
                let g = self.grammar(i, m);
                if let Some(g) = &g {
                    let key = (i, g.clone());
                    if self.cache.contains_key(&key) || queued.contains(&key) {
                        self.cache_hits += 1;
                    } else {
                        queued.insert(key.clone());
                        jobs.push(key);
                    }
                }
                row.push(g);
            }
            slots.push(row);
        }
        let backend = self.backend;
        let benchmarks = self.benchmarks;
        let timeout = self.timeout;
        let results: Vec<Result<BenchmarkOutcome, GaError>> = self.pool.install(|| {
            jobs.par_iter()
                .map(|(i, g)| {
                    let b = &benchmarks[*i];
                    let ctx = SolveContext { timeout, worker: rayon::current_thread_index().unwrap_or(0), tag: tag(g) };
                    let r = backend.solve(b, g, &ctx)?;
                    let solved = r.status == SolveStatus::Solved;
                    Ok(BenchmarkOutcome {
                        benchmark: b.source_id.clone(),
                        status: r.status,
                        empty_grammar: false,
                        time: if solved { r.time.min(timeout) } else { timeout },
                        wall_time: r.wall_time,
                        candidates: r.candidates,
                        solution: r.solution,
                        diagnostics: r.diagnostics,
                    })
                })
                .collect()
        });
        self.backend_calls += jobs.len() as u64;
        for (key, r) in jobs.into_iter().zip(results) {
            self.cache.insert(key, r?);
        }
        Ok(pop
            .iter()
            .zip(slots)
            .map(|(m, row)| {
                let per = row
                    .into_iter()
                    .enumerate()
                    .map(|(i, g)| match g {
                        None => BenchmarkOutcome::empty(&self.benchmarks[i].source_id, self.timeout),
                        Some(g) => self.cache[&(i, g)].clone(),
                    })
                    .collect();
                FitnessReport::new(m.clone(), self.timeout, per)
            })
            .collect())
    }
}

fn tag(g: &Grammar) -> u64 {
    let mut h = DefaultHasher::new();
    g.hash(&mut h);
    h.finish()
}

/// Fitness of a single instance with a fresh evaluator.
pub fn fitness(
    m: &MatrixInstance,
    s: &MatrixStructure,
    benchmarks: &[Benchmark],
    backend: &dyn SolverBackend,
    cfg: &GaConfig,
) -> Result<FitnessReport, GaError> {
    Evaluator::new(s, benchmarks, backend, cfg.timeout, cfg.workers)?.fitness(m)
}
