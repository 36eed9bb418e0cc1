// SPDX-License-Identifier: Apache-2.0

//! `metagrammar`: evolve, evaluate and apply grammar matrices.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use log::info;

use metagrammar_core::backend::{BackendConfig, BackendError};
use metagrammar_core::genetic::GaConfig;
use metagrammar_core::harness::{
    evaluate_instance, load_corpus, read_matrix, report_csv, report_table, results_csv, run_experiment,
    ExperimentConfig, HarnessError, ReportRow, DEFAULT_LABEL, EVOLVED_LABEL,
};
use metagrammar_core::metagrammar::{
    build_shared_structure, build_structure, full_instance, serialize_matrix, Binding,
};
use metagrammar_core::sygus::{emit_benchmark_with_grammar, load_benchmark, Benchmark};
use metagrammar_core::{Grammar, WiringPolicy};

const EXIT_CONFIG: u8 = 2;
const EXIT_INFRA: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "metagrammar", version, about = "Genetic search over SyGuS grammar matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for a matrix on a training split and compare it with the full grammar on the rest.
    Evolve(EvolveArgs),
    /// Compare a saved matrix with the full grammar on a corpus.
    Eval(EvalArgs),
    /// Solve one benchmark with a matrix's grammar, or the full grammar.
    Solve(SolveArgs),
    /// Print a benchmark with a matrix's grammar attached to its synth-fun.
    Emit(EmitArgs),
    /// Print the full matrix built from a corpus.
    Init(InitArgs),
}

#[derive(Args, Debug)]
struct SolverOpts {
    /// `builtin` or `external:PATH`.
    #[arg(long, default_value = "builtin")]
    backend: String,
    /// Extra argument for an external solver; repeatable.
    #[arg(long = "solver-arg", value_name = "ARG", allow_hyphen_values = true)]
    solver_args: Vec<String>,
    /// Per-call time limit in seconds.
    #[arg(long, default_value_t = 10.0, value_name = "SECS")]
    timeout: f64,
    #[arg(long, default_value_t = 1, value_name = "N")]
    workers: usize,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[arg(long, value_name = "GLOB")]
    corpus: String,
    /// Training benchmarks; defaults to three fifths of the corpus.
    #[arg(long, value_name = "N")]
    train_count: Option<usize>,
    #[arg(long, default_value_t = 1, value_name = "N")]
    seed: u64,
    #[arg(long, default_value_t = 60, value_name = "N")]
    population: usize,
    #[arg(long, default_value_t = 15, value_name = "N")]
    parents: usize,
    #[arg(long, default_value_t = 100, value_name = "N")]
    generations: usize,
    /// Per-cell flip probability; defaults to one over the number of valid cells.
    #[arg(long, value_name = "P")]
    mutation_rate: Option<f64>,
    #[arg(long, default_value = "same-index", value_name = "same-index|cascade")]
    wiring: WiringPolicy,
    #[command(flatten)]
    solver: SolverOpts,
    #[arg(long, default_value = "out", value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    matrix: PathBuf,
    #[arg(long, value_name = "GLOB")]
    corpus: String,
    #[command(flatten)]
    solver: SolverOpts,
    /// Write results.csv, report.csv and report.txt here.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    benchmark: PathBuf,
    /// Matrix file; without it the benchmark's full grammar is used.
    #[arg(long, value_name = "FILE")]
    matrix: Option<PathBuf>,
    #[arg(long, default_value = "same-index", value_name = "same-index|cascade")]
    wiring: WiringPolicy,
    #[command(flatten)]
    solver: SolverOpts,
}

#[derive(Args, Debug)]
struct EmitArgs {
    benchmark: PathBuf,
    #[arg(long, value_name = "FILE")]
    matrix: Option<PathBuf>,
    #[arg(long, default_value = "same-index", value_name = "same-index|cascade")]
    wiring: WiringPolicy,
    /// Write `<benchmark name>.sl` here instead of printing.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InitArgs {
    #[arg(long, value_name = "GLOB")]
    corpus: String,
    #[arg(long, default_value = "same-index", value_name = "same-index|cascade")]
    wiring: WiringPolicy,
    /// Write `full.matrix` here instead of printing.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure { code: if e.is_config() { EXIT_CONFIG } else { EXIT_INFRA }, message: e.to_string() }
    }
}

impl From<BackendError> for Failure {
    fn from(e: BackendError) -> Self {
        HarnessError::from(e).into()
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    HarnessError::Io { path: path.to_path_buf(), source: e }.into()
}

fn backend_config(o: &SolverOpts) -> Result<BackendConfig, Failure> {
    if !(o.timeout.is_finite() && o.timeout > 0.0) {
        return Err(Failure::config(format!("--timeout must be a positive number of seconds, got {}", o.timeout)));
    }
    let timeout = Duration::from_secs_f64(o.timeout);
    match o.backend.split_once(':') {
        None if o.backend == "builtin" => Ok(BackendConfig::builtin(timeout)),
        Some(("external", path)) if !path.is_empty() => {
            Ok(BackendConfig::external(path, o.solver_args.clone(), timeout))
        }
        _ => Err(Failure::config(format!("--backend must be `builtin` or `external:PATH`, got `{}`", o.backend))),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

fn evolve(a: EvolveArgs) -> Result<(), Failure> {
    let backend = backend_config(&a.solver)?;
    let train_count = match a.train_count {
        Some(n) => n,
        None => load_corpus(&a.corpus)?.len() * 3 / 5,
    };
    let cfg = ExperimentConfig {
        corpus: a.corpus,
        train_count,
        split_seed: a.seed,
        wiring: a.wiring,
        ga: GaConfig {
            population_size: a.population,
            parent_count: a.parents,
            max_generations: a.generations,
            timeout: backend.timeout,
            mutation_rate: a.mutation_rate,
            seed: a.seed,
            workers: a.solver.workers,
        },
        backend,
        out_dir: a.out,
    };
    let report = run_experiment(&cfg)?;
    let s = &report.search;
    info!(
        "best-ever score {} in generation {}; {} solver calls, {} cache hits",
        s.best_ever.score, s.best_ever_generation, s.backend_calls, s.cache_hits
    );
    print!("{}", report_table(&report.rows));
    println!("outputs in {}", cfg.out_dir.display());
    Ok(())
}

fn eval(a: EvalArgs) -> Result<(), Failure> {
    let backend = backend_config(&a.solver)?;
    let corpus = load_corpus(&a.corpus)?;
    matrix_file(&a.matrix)?;
    let (s, m) = read_matrix(&a.matrix)?;
    let default = evaluate_instance(&s, &full_instance(&s), &corpus, &backend, a.solver.workers)?;
    let evolved = evaluate_instance(&s, &m, &corpus, &backend, a.solver.workers)?;
    let rows = vec![ReportRow::new(DEFAULT_LABEL, &default), ReportRow::new(EVOLVED_LABEL, &evolved)];
    let table = report_table(&rows);
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        write_file(&dir.join("results.csv"), &results_csv(&[(DEFAULT_LABEL, &default), (EVOLVED_LABEL, &evolved)]))?;
        write_file(&dir.join("report.csv"), &report_csv(&rows))?;
        write_file(&dir.join("report.txt"), &table)?;
    }
    print!("{table}");
    Ok(())
}

/// The grammar for one benchmark: from a matrix file, or the full matrix of
/// the benchmark's own structure. `None` when pruning leaves nothing.
fn grammar_for(b: &Benchmark, matrix: Option<&Path>, wiring: WiringPolicy) -> Result<Option<Grammar>, Failure> {
    let (s, m) = match matrix {
        Some(p) => {
            matrix_file(p)?;
            read_matrix(p)?
        }
        None => {
            let s = build_structure(b, wiring).map_err(HarnessError::from)?;
            let m = full_instance(&s);
            (s, m)
        }
    };
    let bind = Binding::new(&s, b).map_err(HarnessError::from)?;
    Ok(bind.instantiate(&m).prune())
}

/// A missing input file is a usage error, not a machinery failure.
fn matrix_file(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::config(format!("matrix file {} does not exist", path.display())))
    }
}

fn load(path: &Path) -> Result<Benchmark, Failure> {
    load_benchmark(path).map_err(|e| HarnessError::from(e).into())
}

fn solve(a: SolveArgs) -> Result<(), Failure> {
    let backend = backend_config(&a.solver)?;
    let b = load(&a.benchmark)?;
    let Some(g) = grammar_for(&b, a.matrix.as_deref(), a.wiring)? else {
        println!("status: unsolved (the grammar is empty)");
        return Ok(());
    };
    let r = metagrammar_core::backend::solve(&b, &g, &backend)?;
    println!("status: {}", r.status);
    println!("time_s: {:.6}", r.time.as_secs_f64());
    println!("wall_s: {:.6}", r.wall_time.as_secs_f64());
    println!("candidates: {}", r.candidates);
    if let Some(t) = &r.solution {
        let params: Vec<String> = b.synth_fun.params.iter().map(|(n, s)| format!("({n} {s})")).collect();
        println!("(define-fun {} ({}) {} {t})", b.synth_fun.name, params.join(" "), b.synth_fun.ret);
    }
    if !r.diagnostics.is_empty() {
        println!("diagnostics: {}", r.diagnostics);
    }
    Ok(())
}

fn emit(a: EmitArgs) -> Result<(), Failure> {
    let b = load(&a.benchmark)?;
    let g = grammar_for(&b, a.matrix.as_deref(), a.wiring)?
        .ok_or_else(|| Failure::config(format!("{}: the grammar is empty", a.benchmark.display())))?;
    let text = emit_benchmark_with_grammar(&b, &g).map_err(|e| Failure::config(e.to_string()))?;
    match &a.out {
        Some(dir) => {
            create_dir(dir)?;
            let name = a.benchmark.file_name().map_or_else(|| "benchmark.sl".into(), |n| n.to_owned());
            write_file(&dir.join(name), &text)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn init(a: InitArgs) -> Result<(), Failure> {
    let corpus = load_corpus(&a.corpus)?;
    let s = build_shared_structure(&corpus, a.wiring).map_err(HarnessError::from)?;
    let text = serialize_matrix(&s, &full_instance(&s));
    match &a.out {
        Some(dir) => {
            create_dir(dir)?;
            write_file(&dir.join("full.matrix"), &text)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Evolve(a) => evolve(a),
        Command::Eval(a) => eval(a),
        Command::Solve(a) => solve(a),
        Command::Emit(a) => emit(a),
        Command::Init(a) => init(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
