// SPDX-License-Identifier: Apache-2.0

//! Solver backends: run one benchmark with one grammar under a timeout.

mod builtin;
mod external;

use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use crate::grammar::Grammar;
use crate::sygus::{Benchmark, Term};

pub use crate::cegis::{BuiltinLimits, Clock};
pub use builtin::BuiltinBackend;
pub use external::{classify_output, Classification, ExternalBackend};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Solved,
    Unsolved,
    Timeout,
    Infeasible,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Solved => "solved",
            SolveStatus::Unsolved => "unsolved",
            SolveStatus::Timeout => "timeout",
            SolveStatus::Infeasible => "infeasible",
        })
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Measured wall-clock time.
    pub wall_time: Duration,
    /// Time charged for fitness: wall time, or the builtin solver's virtual
    /// clock. Never exceeds the timeout.
    pub time: Duration,
    /// Body of the synth-fun; present iff solved.
    pub solution: Option<Term>,
    /// Terms enumerated over all non-terminals and rounds (builtin solver only).
    pub candidates: u64,
    /// Work units spent (builtin solver only).
    pub work: u64,
    pub diagnostics: String,
}

impl SolveResult {
    pub fn solved(&self) -> bool {
        self.status == SolveStatus::Solved
    }

    /// Result for a run that never happened, charged the full timeout.
    pub fn not_run(status: SolveStatus, timeout: Duration, diagnostics: impl Into<String>) -> SolveResult {
        SolveResult {
            status,
            wall_time: Duration::ZERO,
            time: timeout,
            solution: None,
            candidates: 0,
            work: 0,
            diagnostics: diagnostics.into(),
        }
    }
}

/// Failures of the solving infrastructure, as opposed to unsolved problems.
#[derive(Debug, Error)]
pub enum BackendError {
    #[error("solver binary {0} does not exist")]
    MissingBinary(PathBuf),
    #[error("cannot start solver {binary}: {source}")]
    Spawn { binary: PathBuf, source: std::io::Error },
    #[error("scratch file {path}: {source}")]
    Scratch { path: PathBuf, source: std::io::Error },
    #[error("waiting for solver: {0}")]
    Wait(std::io::Error),
}

/// Per-call context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveContext {
    pub timeout: Duration,
    /// Index of the calling worker, used to keep scratch files apart.
    pub worker: usize,
    /// Fingerprint of the grammar's matrix, used in scratch file names.
    pub tag: u64,
}

impl SolveContext {
    pub fn new(timeout: Duration) -> Self {
        SolveContext { timeout, worker: 0, tag: 0 }
    }
}

/// Solves one benchmark restricted to one grammar. Implementations are
/// safe to call from several threads at once.
pub trait SolverBackend: Send + Sync {
    fn name(&self) -> String;

    /// `g` should be pruned and non-empty.
    fn solve(&self, b: &Benchmark, g: &Grammar, ctx: &SolveContext) -> Result<SolveResult, BackendError>;

    /// True if solve times are reproducible (no wall-clock dependence).
    fn deterministic(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendKind {
    Builtin(BuiltinLimits),
    External { binary: PathBuf, args: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub timeout: Duration,
    pub scratch_dir: PathBuf,
}

impl BackendConfig {
    pub fn builtin(timeout: Duration) -> Self {
        BackendConfig {
            kind: BackendKind::Builtin(BuiltinLimits::default()),
            timeout,
            scratch_dir: std::env::temp_dir(),
        }
    }

    pub fn external(binary: impl Into<PathBuf>, args: Vec<String>, timeout: Duration) -> Self {
        BackendConfig {
            kind: BackendKind::External { binary: binary.into(), args },
            timeout,
            scratch_dir: std::env::temp_dir(),
        }
    }

    /// Instantiate the backend, checking that an external binary exists.
    pub fn build(&self) -> Result<Box<dyn SolverBackend>, BackendError> {
        Ok(match &self.kind {
            BackendKind::Builtin(limits) => Box::new(BuiltinBackend::new(*limits)),
            BackendKind::External { binary, args } => {
                Box::new(ExternalBackend::new(binary.clone(), args.clone(), self.scratch_dir.clone())?)
            }
        })
    }
}

/// Solve with a freshly built backend.
pub fn solve(b: &Benchmark, g: &Grammar, cfg: &BackendConfig) -> Result<SolveResult, BackendError> {
    cfg.build()?.solve(b, g, &SolveContext::new(cfg.timeout))
}
