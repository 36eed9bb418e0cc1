// SPDX-License-Identifier: Apache-2.0

//! Running an external SyGuS solver as a child process.

use std::io::Read;
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use log::warn;

use crate::grammar::Grammar;
use crate::sygus::sexp::{read_all, Sexp};
use crate::sygus::{emit_benchmark_with_grammar, parse_sort, sort_of, Benchmark, Logic, Term, TermReader};

use super::{BackendError, SolveContext, SolveResult, SolveStatus, SolverBackend};

const POLL: Duration = Duration::from_millis(5);

/// Invokes `binary [args...] FILE` on a scratch file holding the benchmark
/// with the grammar injected.
#[derive(Debug, Clone)]
pub struct ExternalBackend {
    binary: PathBuf,
    args: Vec<String>,
    scratch_dir: PathBuf,
}

impl ExternalBackend {
    pub fn new(binary: PathBuf, args: Vec<String>, scratch_dir: PathBuf) -> Result<Self, BackendError> {
        if !binary.is_file() {
            return Err(BackendError::MissingBinary(binary));
        }
        Ok(ExternalBackend { binary, args, scratch_dir })
    }

    fn scratch_path(&self, b: &Benchmark, ctx: &SolveContext) -> PathBuf {
        let stem = Path::new(&b.source_id).file_stem().and_then(|s| s.to_str()).unwrap_or("benchmark");
        let stem: String =
            stem.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
        self.scratch_dir.join(format!("{stem}-{:016x}-w{}.sl", ctx.tag, ctx.worker))
    }
}

/// What a solver's standard output says.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    Solved(Term),
    Infeasible,
    Unsolved(String),
}

fn define_fun(items: &[Sexp]) -> bool {
    items.first().and_then(Sexp::atom) == Some("define-fun")
}

/// Read a `(define-fun f ((x S) ...) R body)` answer for the synth-fun of `b`.
fn read_solution(b: &Benchmark, items: &[Sexp]) -> Result<Term, String> {
    let sf = &b.synth_fun;
    if items.len() != 5 {
        return Err("define-fun needs a name, parameters, a sort and a body".into());
    }
    if items[1].atom() != Some(sf.name.as_str()) {
        return Err(format!("answer defines `{}`, expected `{}`", items[1], sf.name));
    }
    let params = items[2].list().ok_or("parameter list expected")?;
    if params.len() != sf.params.len() {
        return Err(format!("answer has {} parameters, expected {}", params.len(), sf.params.len()));
    }
    let mut names = Vec::new();
    for (p, (_, want)) in params.iter().zip(&sf.params) {
        let pair = p.list().filter(|l| l.len() == 2).ok_or("malformed parameter")?;
        let name = pair[0].atom().ok_or("malformed parameter name")?;
        let sort = parse_sort(&pair[1]).map_err(|e| e.to_string())?;
        if sort != *want {
            return Err(format!("parameter `{name}` has sort {sort}, expected {want}"));
        }
        names.push(name.to_string());
    }
    let ret = parse_sort(&items[3]).map_err(|e| e.to_string())?;
    if ret != sf.ret {
        return Err(format!("answer returns {ret}, expected {}", sf.ret));
    }
    let mut env = b.body_env();
    for (n, (_, s)) in names.iter().zip(&sf.params) {
        env.bind_var(n.clone(), *s);
    }
    let logic = b.logic_kind().unwrap_or(Logic::Lia);
    let reader = TermReader { env: &env, logic };
    let body = reader.term(&items[4]).map_err(|e| e.to_string())?;
    // rename the answer's parameters to the synth-fun's
    let body = body
        .substitute(&|v| names.iter().position(|n| n == v).map(|i| Term::var(sf.params[i].0.clone(), sf.params[i].1)));
    let s = sort_of(&body, &b.body_env()).map_err(|e| e.to_string())?;
    if s != sf.ret {
        return Err(format!("body has sort {s}, expected {}", sf.ret));
    }
    Ok(body)
}

/// Classify a finished solver run. A leading `define-fun` (possibly after
/// `unsat`, possibly inside one enclosing list) is a solution; a leading
/// `infeasible` or `fail` means no solution exists in the grammar;
/// anything else, including a nonzero exit status, is unsolved.
pub fn classify_output(b: &Benchmark, success: bool, stdout: &str) -> Classification {
    if !success {
        return Classification::Unsolved("nonzero exit status".into());
    }
    let sexps = match read_all(stdout) {
        Ok(s) => s,
        Err(e) => return Classification::Unsolved(format!("unreadable output: {}", e.message)),
    };
    let mut it = sexps.iter().peekable();
    if it.peek().and_then(|s| s.atom()) == Some("unsat") {
        it.next();
    }
    let Some(first) = it.next() else {
        return Classification::Unsolved("empty output".into());
    };
    match (first.atom(), first.list()) {
        (Some("infeasible" | "fail"), _) => Classification::Infeasible,
        (_, Some(items)) if define_fun(items) => match read_solution(b, items) {
            Ok(t) => Classification::Solved(t),
            Err(e) => Classification::Unsolved(format!("unparseable answer: {e}")),
        },
        (_, Some([inner, ..])) if inner.list().is_some_and(define_fun) => {
            match read_solution(b, inner.list().expect("checked")) {
                Ok(t) => Classification::Solved(t),
                Err(e) => Classification::Unsolved(format!("unparseable answer: {e}")),
            }
        }
        _ => Classification::Unsolved(format!("unrecognised output `{}`", first)),
    }
}

fn drain<R: Read + Send + 'static>(r: Option<R>) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut r) = r {
            let _ = r.read_to_end(&mut buf);
        }
        buf
    })
}

fn kill_group(child: &mut Child) {
    let pid = child.id() as libc::pid_t;
    // SAFETY: plain syscall; the child leads its own process group.
    unsafe {
        libc::kill(-pid, libc::SIGKILL);
    }
    let _ = child.kill();
}

impl SolverBackend for ExternalBackend {
    fn name(&self) -> String {
        format!("external:{}", self.binary.display())
    }

    fn solve(&self, b: &Benchmark, g: &Grammar, ctx: &SolveContext) -> Result<SolveResult, BackendError> {
        if ctx.timeout.is_zero() {
            return Ok(SolveResult::not_run(SolveStatus::Timeout, ctx.timeout, "zero timeout"));
        }
        let text = match emit_benchmark_with_grammar(b, g) {
            Ok(t) => t,
            Err(e) => return Ok(SolveResult::not_run(SolveStatus::Unsolved, ctx.timeout, format!("cannot emit: {e}"))),
        };
        let path = self.scratch_path(b, ctx);
        std::fs::write(&path, text).map_err(|source| BackendError::Scratch { path: path.clone(), source })?;
        let started = Instant::now();
        let spawned = Command::new(&self.binary)
            .args(&self.args)
            .arg(&path)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .process_group(0)
            .spawn();
        let mut child = match spawned {
            Ok(c) => c,
            Err(source) => {
                let _ = std::fs::remove_file(&path);
                return Err(BackendError::Spawn { binary: self.binary.clone(), source });
            }
        };
        let out = drain(child.stdout.take());
        let err = drain(child.stderr.take());
        let mut timed_out = false;
        let status = loop {
            match child.try_wait() {
                Ok(Some(s)) => break Some(s),
                Ok(None) if started.elapsed() >= ctx.timeout => {
                    kill_group(&mut child);
                    let _ = child.wait();
                    timed_out = true;
                    break None;
                }
                Ok(None) => thread::sleep(POLL),
                Err(e) => {
                    kill_group(&mut child);
                    let _ = std::fs::remove_file(&path);
                    return Err(BackendError::Wait(e));
                }
            }
        };
        let wall_time = started.elapsed();
        let stdout = String::from_utf8_lossy(&out.join().unwrap_or_default()).into_owned();
        let stderr = String::from_utf8_lossy(&err.join().unwrap_or_default()).into_owned();
        let _ = std::fs::remove_file(&path);
        let mut result = SolveResult {
            status: SolveStatus::Timeout,
            wall_time,
            time: wall_time.min(ctx.timeout),
            solution: None,
            candidates: 0,
            work: 0,
            diagnostics: stderr.trim().to_string(),
        };
        if timed_out {
            result.time = ctx.timeout;
            return Ok(result);
        }
        let success = status.is_some_and(|s| s.success());
        let note = |r: &mut SolveResult, msg: String| {
            r.diagnostics = if r.diagnostics.is_empty() { msg } else { format!("{msg}; {}", r.diagnostics) };
        };
        match classify_output(b, success, &stdout) {
            Classification::Solved(t) => {
                if !g.derives(&t) {
                    warn!("{}: solver answer {t} is not derivable from the grammar", b.source_id);
                    note(&mut result, "answer not derivable from the grammar".into());
                }
                result.status = SolveStatus::Solved;
                result.solution = Some(t);
            }
            Classification::Infeasible => result.status = SolveStatus::Infeasible,
            Classification::Unsolved(msg) => {
                result.status = SolveStatus::Unsolved;
                let code = status.and_then(|s| s.code()).map_or("signal".to_string(), |c| c.to_string());
                note(&mut result, format!("{msg} (exit {code})"));
            }
        }
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sygus::{parse_benchmark, Sort};

    fn id() -> Benchmark {
        parse_benchmark("(set-logic LIA)(synth-fun id ((x Int)) Int)(declare-var a Int)(constraint (= (id a) a))")
            .unwrap()
    }

    #[test]
    fn classification() {
        let b = id();
        let x = Term::var("x", Sort::Int);
        assert_eq!(classify_output(&b, true, "(define-fun id ((x Int)) Int x)"), Classification::Solved(x.clone()));
        assert_eq!(classify_output(&b, true, "unsat\n((define-fun id ((x Int)) Int x))"), Classification::Solved(x));
        assert_eq!(
            classify_output(&b, true, "(define-fun id ((y Int)) Int (+ y 1))"),
            Classification::Solved(Term::app(
                crate::sygus::Builtin::Add,
                vec![Term::var("x", Sort::Int), Term::int(1)]
            ))
        );
        assert_eq!(classify_output(&b, true, "infeasible\n"), Classification::Infeasible);
        assert_eq!(classify_output(&b, true, "fail"), Classification::Infeasible);
        assert!(matches!(classify_output(&b, false, "(define-fun id ((x Int)) Int x)"), Classification::Unsolved(_)));
        assert!(matches!(classify_output(&b, true, ""), Classification::Unsolved(_)));
        assert!(matches!(classify_output(&b, true, "((("), Classification::Unsolved(_)));
        assert!(matches!(
            classify_output(&b, true, "(define-fun id ((x Int)) Bool true)"),
            Classification::Unsolved(_)
        ));
        assert!(matches!(classify_output(&b, true, "(define-fun g ((x Int)) Int x)"), Classification::Unsolved(_)));
        assert!(matches!(classify_output(&b, true, "(define-fun id ((x Int)) Int z)"), Classification::Unsolved(_)));
        assert!(matches!(classify_output(&b, true, "sat"), Classification::Unsolved(_)));
    }

    #[test]
    fn missing_binary_is_an_infrastructure_error() {
        let err = ExternalBackend::new("/nonexistent/solver".into(), vec![], std::env::temp_dir()).unwrap_err();
        assert!(matches!(err, BackendError::MissingBinary(_)));
    }

    fn stub(dir: &Path, body: &str) -> PathBuf {
        use std::os::unix::fs::PermissionsExt;
        let path = dir.join("solver.sh");
        std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        path
    }

    fn run(body: &str, timeout: Duration) -> SolveResult {
        let dir = tempfile::tempdir().unwrap();
        let backend = ExternalBackend::new(stub(dir.path(), body), vec![], dir.path().to_path_buf()).unwrap();
        let b = id();
        let g = Grammar {
            non_terminals: vec![crate::grammar::tests::nt("Start", Sort::Int)],
            rules: vec![vec![crate::grammar::Rhs::Leaf(Term::var("x", Sort::Int))]],
            start: 0,
        };
        let r = backend.solve(&b, &g, &SolveContext::new(timeout)).unwrap();
        let left: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.path().extension().is_some_and(|x| x == "sl"))
            .collect();
        assert!(left.is_empty(), "scratch file left behind");
        r
    }

    #[test]
    fn stub_solver_answers() {
        let r = run("grep -q synth-fun \"$1\" && echo '(define-fun id ((x Int)) Int x)'", Duration::from_secs(5));
        assert_eq!(r.status, SolveStatus::Solved);
        assert_eq!(r.solution, Some(Term::var("x", Sort::Int)));
        assert!(r.time <= Duration::from_secs(5));
        assert_eq!(run("echo infeasible", Duration::from_secs(5)).status, SolveStatus::Infeasible);
        let r = run("echo oops >&2; exit 1", Duration::from_secs(5));
        assert_eq!(r.status, SolveStatus::Unsolved);
        assert!(r.diagnostics.contains("oops"), "{}", r.diagnostics);
    }

    #[test]
    fn slow_solver_is_killed_at_the_timeout() {
        let start = Instant::now();
        let r = run("sleep 30 & sleep 30; echo late", Duration::from_millis(200));
        assert_eq!(r.status, SolveStatus::Timeout);
        assert_eq!(r.time, Duration::from_millis(200));
        assert!(start.elapsed() < Duration::from_secs(10));
    }
}
