// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use log::info;

use crate::metagrammar::{random_instance, MatrixInstance, MatrixStructure};

use super::fitness::{Evaluator, FitnessReport, Score};
use super::operators::{best_n_indices, crossover_population, mutate};
use super::{stream, GaConfig, GaError, Role};

pub const HISTORY_HEADER: &str = "generation,best_score,mean_score,best_solved_count,best_ever_score";

/// One line of the search history. Generation 0 is the random population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_score: Score,
    /// Mean over the population, rounded down to whole nanoseconds.
    pub mean_score: Score,
    pub best_solved_count: usize,
    /// Best score seen in any generation so far (bookkeeping only: the
    /// search itself keeps no elite).
    pub best_ever_score: Score,
}

impl GenerationRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.generation, self.best_score, self.mean_score, self.best_solved_count, self.best_ever_score
        )
    }
}

pub fn history_csv(history: &[GenerationRecord]) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for r in history {
        let _ = writeln!(out, "{}", r.csv_line());
    }
    out
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Fittest member of the final population.
    pub best: MatrixInstance,
    pub report: FitnessReport,
    /// Fittest instance of any generation, and where it appeared.
    pub best_ever: FitnessReport,
    pub best_ever_generation: usize,
    pub history: Vec<GenerationRecord>,
    pub backend_calls: u64,
    pub cache_hits: u64,
}

/// Run the search without progress reporting.
pub fn search(cfg: &GaConfig, s: &MatrixStructure, ev: &mut Evaluator<'_>) -> Result<SearchOutcome, GaError> {
    search_with(cfg, s, ev, &mut |_| {})
}

/// The generation loop: a random population, then repeatedly select the
/// best parents, breed a full population by crossover and mutate it.
/// `on_generation` sees each history record as soon as it exists.
pub fn search_with(
    cfg: &GaConfig,
    s: &MatrixStructure,
    ev: &mut Evaluator<'_>,
    on_generation: &mut dyn FnMut(&GenerationRecord),
) -> Result<SearchOutcome, GaError> {
    cfg.validate()?;
    let rate = cfg.effective_mutation_rate(s);
    let mut init = stream(cfg.seed, 0, Role::Init);
    let mut pop: Vec<MatrixInstance> = (0..cfg.population_size).map(|_| random_instance(s, &mut init)).collect();
    let mut reports = ev.evaluate(&pop)?;
    let mut history = Vec::with_capacity(cfg.max_generations + 1);
    let mut best_ever: Option<(FitnessReport, usize)> = None;
    for generation in 0..=cfg.max_generations {
        if generation > 0 {
            let scores: Vec<Score> = reports.iter().map(|r| r.score).collect();
            let parents: Vec<MatrixInstance> =
                best_n_indices(&scores, cfg.parent_count)?.into_iter().map(|i| pop[i].clone()).collect();
            let children = crossover_population(
                s,
                &parents,
                cfg.population_size,
                &mut stream(cfg.seed, generation, Role::Crossover),
            )?;
            let mut mutation = stream(cfg.seed, generation, Role::Mutation);
            pop = children.iter().map(|c| mutate(s, c, rate, &mut mutation)).collect();
            reports = ev.evaluate(&pop)?;
        }
        let scores: Vec<Score> = reports.iter().map(|r| r.score).collect();
        let top = best_n_indices(&scores, 1)?[0];
        if best_ever.as_ref().is_none_or(|(r, _)| reports[top].score > r.score) {
            best_ever = Some((reports[top].clone(), generation));
        }
        let total: u128 = scores.iter().map(|s| s.0).sum();
        let record = GenerationRecord {
            generation,
            best_score: reports[top].score,
            mean_score: Score(total / scores.len() as u128),
            best_solved_count: reports[top].solved_count,
            best_ever_score: best_ever.as_ref().map_or(Score(0), |(r, _)| r.score),
        };
        info!(
            "generation {generation}: best {} ({} solved), mean {}",
            record.best_score, record.best_solved_count, record.mean_score
        );
        on_generation(&record);
        history.push(record);
    }
    let scores: Vec<Score> = reports.iter().map(|r| r.score).collect();
    let top = best_n_indices(&scores, 1)?[0];
    let (best_ever, best_ever_generation) = best_ever.expect("at least one generation");
    Ok(SearchOutcome {
        best: pop[top].clone(),
        report: reports.swap_remove(top),
        best_ever,
        best_ever_generation,
        history,
        backend_calls: ev.backend_calls(),
        cache_hits: ev.cache_hits(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{BackendError, SolveContext, SolveResult, SolveStatus, SolverBackend};
    use crate::grammar::Grammar;
    use crate::metagrammar::{build_structure, WiringPolicy};
    use crate::sygus::{parse_benchmark, Benchmark};
    use std::time::Duration;

    /// Solves a grammar iff it has at most `limit` rules; time grows with size.
    struct SmallWins {
        limit: usize,
    }

    impl SolverBackend for SmallWins {
        fn name(&self) -> String {
            "small-wins".into()
        }
        fn solve(&self, _: &Benchmark, g: &Grammar, ctx: &SolveContext) -> Result<SolveResult, BackendError> {
            let n = g.rule_count();
            let solved = n <= self.limit;
            Ok(SolveResult {
                status: if solved { SolveStatus::Solved } else { SolveStatus::Timeout },
                wall_time: Duration::ZERO,
                time: if solved { Duration::from_millis(10 * n as u64) } else { ctx.timeout },
                solution: None,
                candidates: n as u64,
                work: 0,
                diagnostics: String::new(),
            })
        }
        fn deterministic(&self) -> bool {
            true
        }
    }

    fn setup() -> (Vec<Benchmark>, MatrixStructure) {
        let b = parse_benchmark(
            "(set-logic LIA)(synth-fun f ((x Int) (y Int)) Int)(declare-var a Int)(declare-var b Int)(constraint (= (f a b) a))",
        )
        .unwrap();
        let s = build_structure(&b, WiringPolicy::SameIndex).unwrap();
        (vec![b], s)
    }

    fn cfg(workers: usize) -> GaConfig {
        GaConfig {
            population_size: 10,
            parent_count: 4,
            max_generations: 8,
            timeout: Duration::from_secs(1),
            mutation_rate: None,
            seed: 42,
            workers,
        }
    }

    #[test]
    fn search_is_deterministic_and_best_ever_is_monotone() {
        let (b, s) = setup();
        let backend = SmallWins { limit: 12 };
        let run = |workers| {
            let mut ev = Evaluator::new(&s, &b, &backend, Duration::from_secs(1), workers).unwrap();
            search(&cfg(workers), &s, &mut ev).unwrap()
        };
        let a = run(1);
        let c = run(3);
        assert_eq!(history_csv(&a.history), history_csv(&c.history));
        assert_eq!(a.best, c.best);
        assert_eq!(a.history.len(), 9);
        assert!(a.history.windows(2).all(|w| w[0].best_ever_score <= w[1].best_ever_score));
        assert!(a.history.iter().all(|r| r.best_score <= r.best_ever_score && r.mean_score <= r.best_score));
        assert_eq!(a.report.score, a.history.last().unwrap().best_score);
        assert_eq!(a.best_ever.score, a.history.last().unwrap().best_ever_score);
        assert!(history_csv(&a.history)
            .starts_with("generation,best_score,mean_score,best_solved_count,best_ever_score\n0,"));
    }

    #[test]
    fn zero_generations_return_the_best_random_instance() {
        let (b, s) = setup();
        let backend = SmallWins { limit: 12 };
        let mut ev = Evaluator::new(&s, &b, &backend, Duration::from_secs(1), 1).unwrap();
        let c = GaConfig { max_generations: 0, ..cfg(1) };
        let out = search(&c, &s, &mut ev).unwrap();
        let mut init = stream(42, 0, Role::Init);
        let pop: Vec<MatrixInstance> = (0..10).map(|_| random_instance(&s, &mut init)).collect();
        let reports = ev.evaluate(&pop).unwrap();
        let best = reports.iter().map(|r| r.score).max().unwrap();
        let first = reports.iter().position(|r| r.score == best).unwrap();
        assert_eq!(out.best, pop[first]);
        assert_eq!(out.history.len(), 1);
    }

    #[test]
    fn invalid_configuration_is_rejected() {
        let (b, s) = setup();
        let backend = SmallWins { limit: 12 };
        let mut ev = Evaluator::new(&s, &b, &backend, Duration::from_secs(1), 1).unwrap();
        let c = GaConfig { parent_count: 11, ..cfg(1) };
        assert!(matches!(search(&c, &s, &mut ev), Err(GaError::Config(_))));
    }
}
