// SPDX-License-Identifier: Apache-2.0

//! Corpus loading, train/test split, experiment runs and reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::backend::{BackendConfig, BackendError};
use crate::genetic::{
    history_csv, search_with, BenchmarkOutcome, ConfigError, Evaluator, GaConfig, GaError, SearchOutcome,
};
use crate::metagrammar::{
    build_shared_structure, deserialize_matrix, full_instance, serialize_matrix, BindError, MatrixFormatError,
    MatrixInstance, MatrixStructure, StructureError, WiringPolicy,
};
use crate::sygus::{load_benchmark, Benchmark, LoadError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad corpus pattern `{pattern}`: {message}")]
    Pattern { pattern: String, message: String },
    #[error("corpus pattern `{0}` matches no files")]
    EmptyCorpus(String),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("train count {train} exceeds corpus size {corpus}")]
    TrainCount { train: usize, corpus: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Bind(#[from] BindError),
    #[error("{path}: {source}")]
    Matrix { path: PathBuf, source: MatrixFormatError },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
    #[error("search failed: {0}")]
    Search(GaError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl HarnessError {
    /// Errors in the inputs or settings, as opposed to failures of the
    /// machinery (solver processes, file system).
    pub fn is_config(&self) -> bool {
        !matches!(
            self,
            HarnessError::Backend(_) | HarnessError::Pool(_) | HarnessError::Search(_) | HarnessError::Io { .. }
        )
    }
}

impl From<GaError> for HarnessError {
    fn from(e: GaError) -> Self {
        match e {
            GaError::Config(e) => HarnessError::Config(e),
            GaError::Backend(e) => HarnessError::Backend(e),
            GaError::Bind(e) => HarnessError::Bind(e),
            GaError::Pool(m) => HarnessError::Pool(m),
            other => HarnessError::Search(other),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

/// Benchmarks matching a glob pattern, in path order.
pub fn load_corpus(pattern: &str) -> Result<Vec<Benchmark>, HarnessError> {
    let paths =
        glob::glob(pattern).map_err(|e| HarnessError::Pattern { pattern: pattern.into(), message: e.to_string() })?;
    let mut paths: Vec<PathBuf> = paths
        .collect::<Result<_, _>>()
        .map_err(|e| HarnessError::Pattern { pattern: pattern.into(), message: e.to_string() })?;
    paths.sort();
    if paths.is_empty() {
        return Err(HarnessError::EmptyCorpus(pattern.into()));
    }
    Ok(paths.iter().map(|p| load_benchmark(p)).collect::<Result<_, _>>()?)
}

/// Seeded shuffle, then the first `train_count` items train and the rest test.
pub fn split<T>(mut corpus: Vec<T>, train_count: usize, seed: u64) -> Result<(Vec<T>, Vec<T>), HarnessError> {
    if train_count > corpus.len() {
        return Err(HarnessError::TrainCount { train: train_count, corpus: corpus.len() });
    }
    corpus.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = corpus.split_off(train_count);
    if test.is_empty() {
        warn!("every benchmark is used for training; the test set is empty");
    }
    Ok((corpus, test))
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub total: usize,
    pub solved: usize,
    /// Mean t_i over solved benchmarks.
    pub average_time: Option<Duration>,
}

impl ReportRow {
    pub fn new(label: &str, outcomes: &[BenchmarkOutcome]) -> Self {
        let solved: Vec<&BenchmarkOutcome> = outcomes.iter().filter(|o| o.solved()).collect();
        let average_time = match solved.len() {
            0 => None,
            n => {
                Some(Duration::from_nanos((solved.iter().map(|o| o.time.as_nanos()).sum::<u128>() / n as u128) as u64))
            }
        };
        ReportRow { label: label.into(), total: outcomes.len(), solved: solved.len(), average_time }
    }

    pub fn percent(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.solved as f64 / self.total as f64)
    }

    fn average_text(&self) -> String {
        self.average_time.map_or("n/a".into(), |t| format!("{:.6}", t.as_secs_f64()))
    }

    fn percent_text(&self) -> String {
        self.percent().map_or("n/a".into(), |p| format!("{p:.1}"))
    }
}

pub const RESULTS_HEADER: &str = "grammar,benchmark,status,time_s,wall_s,candidates,rules_empty,solution";
pub const REPORT_HEADER: &str = "grammar,total,solved,avg_time_s,percent_solved";

pub fn results_csv(rows: &[(&str, &[BenchmarkOutcome])]) -> String {
    let mut out = format!("{RESULTS_HEADER}\n");
    for (label, outcomes) in rows {
        for o in *outcomes {
            let solution =
                o.solution.as_ref().map_or(String::new(), |t| format!("\"{}\"", t.to_string().replace('"', "\"\"")));
            let _ = writeln!(
                out,
                "{label},{},{},{:.9},{:.6},{},{},{solution}",
                o.benchmark,
                o.status,
                o.time.as_secs_f64(),
                o.wall_time.as_secs_f64(),
                o.candidates,
                o.empty_grammar
            );
        }
    }
    out
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.label, r.total, r.solved, r.average_text(), r.percent_text());
    }
    out
}

/// A fixed-width table of the rows, with the change of the last row
/// relative to the first.
pub fn report_table(rows: &[ReportRow]) -> String {
    let mut out =
        format!("{:<12} {:>8} {:>8} {:>14} {:>10}\n", "Grammar", "Total", "# Solved", "Avg. Time(s)", "% Solved");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:>8} {:>14} {:>10}",
            r.label,
            r.total,
            r.solved,
            r.average_text(),
            r.percent_text()
        );
    }
    if let [base, .., last] = rows {
        let speedup = match (base.average_time, last.average_time) {
            (Some(a), Some(b)) if !b.is_zero() => format!("{:.2}x", a.as_secs_f64() / b.as_secs_f64()),
            _ => "n/a".into(),
        };
        let solved = match (base.percent(), last.percent()) {
            (Some(a), Some(b)) => format!("{:+.1} points", b - a),
            _ => "n/a".into(),
        };
        let _ = writeln!(out, "\n{} vs {}: average time {speedup} faster, solved {solved}", last.label, base.label);
    }
    out
}

/// Settings of one train/evaluate run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub corpus: String,
    pub train_count: usize,
    /// Seed of the split; the search uses `ga.seed`.
    pub split_seed: u64,
    pub wiring: WiringPolicy,
    pub ga: GaConfig,
    pub backend: BackendConfig,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub structure: MatrixStructure,
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub search: SearchOutcome,
    pub default_outcomes: Vec<BenchmarkOutcome>,
    pub evolved_outcomes: Vec<BenchmarkOutcome>,
    pub rows: Vec<ReportRow>,
}

pub const DEFAULT_LABEL: &str = "default";
pub const EVOLVED_LABEL: &str = "metagrammar";

/// Per-benchmark outcomes of one instance.
pub fn evaluate_instance(
    s: &MatrixStructure,
    m: &MatrixInstance,
    benchmarks: &[Benchmark],
    backend: &BackendConfig,
    workers: usize,
) -> Result<Vec<BenchmarkOutcome>, HarnessError> {
    if benchmarks.is_empty() {
        return Ok(Vec::new());
    }
    let b = backend.build()?;
    let mut ev = Evaluator::new(s, benchmarks, b.as_ref(), backend.timeout, workers)?;
    Ok(ev.fitness(m)?.per_benchmark)
}

fn write(path: PathBuf, text: &str) -> Result<(), HarnessError> {
    fs::write(&path, text).map_err(io_err(&path))
}

/// Train on a split of the corpus, then compare the evolved matrix with the
/// full matrix on the held-out benchmarks. Writes `best.matrix`,
/// `best_ever.matrix`, `history.csv`, `results.csv`, `report.csv` and
/// `report.txt` to the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.ga.validate()?;
    let corpus = load_corpus(&cfg.corpus)?;
    // the structure depends only on signatures, so every benchmark can bind
    let structure = build_shared_structure(&corpus, cfg.wiring)?;
    let (train, test) = split(corpus, cfg.train_count, cfg.split_seed)?;
    if train.is_empty() {
        return Err(HarnessError::TrainCount { train: 0, corpus: test.len() });
    }
    fs::create_dir_all(&cfg.out_dir).map_err(io_err(&cfg.out_dir))?;
    let backend = cfg.backend.build()?;
    info!(
        "structure {}x{} ({} valid cells); {} training, {} test benchmarks; backend {}",
        structure.n_rows(),
        structure.n_cols(),
        structure.valid_count(),
        train.len(),
        test.len(),
        backend.name()
    );
    let history_path = cfg.out_dir.join("history.csv");
    let mut history = String::new();
    let mut flush_error = None;
    let outcome = {
        let mut ev = Evaluator::new(&structure, &train, backend.as_ref(), cfg.backend.timeout, cfg.ga.workers)?;
        search_with(&cfg.ga, &structure, &mut ev, &mut |record| {
            if history.is_empty() {
                history = format!("{}\n", crate::genetic::HISTORY_HEADER);
            }
            history.push_str(&record.csv_line());
            history.push('\n');
            if let Err(e) = fs::write(&history_path, &history) {
                flush_error.get_or_insert(HarnessError::Io { path: history_path.clone(), source: e });
            }
        })?
    };
    if let Some(e) = flush_error {
        return Err(e);
    }
    write(history_path, &history_csv(&outcome.history))?;
    write(cfg.out_dir.join("best.matrix"), &serialize_matrix(&structure, &outcome.best))?;
    write(cfg.out_dir.join("best_ever.matrix"), &serialize_matrix(&structure, &outcome.best_ever.instance))?;

    let default_outcomes =
        evaluate_instance(&structure, &full_instance(&structure), &test, &cfg.backend, cfg.ga.workers)?;
    let evolved_outcomes = evaluate_instance(&structure, &outcome.best, &test, &cfg.backend, cfg.ga.workers)?;
    let rows = vec![ReportRow::new(DEFAULT_LABEL, &default_outcomes), ReportRow::new(EVOLVED_LABEL, &evolved_outcomes)];
    write(
        cfg.out_dir.join("results.csv"),
        &results_csv(&[(DEFAULT_LABEL, &default_outcomes), (EVOLVED_LABEL, &evolved_outcomes)]),
    )?;
    write(cfg.out_dir.join("report.csv"), &report_csv(&rows))?;
    write(cfg.out_dir.join("report.txt"), &report_table(&rows))?;
    Ok(ExperimentReport {
        structure,
        train: train.iter().map(|b| b.source_id.clone()).collect(),
        test: test.iter().map(|b| b.source_id.clone()).collect(),
        search: outcome,
        default_outcomes,
        evolved_outcomes,
        rows,
    })
}

pub fn read_matrix(path: &Path) -> Result<(MatrixStructure, MatrixInstance), HarnessError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    deserialize_matrix(&text).map_err(|source| HarnessError::Matrix { path: path.to_path_buf(), source })
}

/// Re-evaluate a saved matrix on a corpus.
pub fn eval_matrix(
    matrix: &Path,
    corpus: &[Benchmark],
    backend: &BackendConfig,
    workers: usize,
    label: &str,
) -> Result<(Vec<BenchmarkOutcome>, ReportRow), HarnessError> {
    let (s, m) = read_matrix(matrix)?;
    let outcomes = evaluate_instance(&s, &m, corpus, backend, workers)?;
    let row = ReportRow::new(label, &outcomes);
    Ok((outcomes, row))
}
