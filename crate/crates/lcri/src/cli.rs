//! Command implementations. Each returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lcri_core::kernel::{recursor_free, sample_soundness, SampleConfig, Status};
use lcri_core::order::Ordering;
use lcri_core::program::Coverage;
use lcri_core::templates::{auto_prove, AutoConfig};
use lcri_core::trace::Trace;
use lcri_core::{parse, Program, Solver};

use crate::smt::ProcessSolver;

pub const OK: i32 = 0;
pub const ERROR: i32 = 1;
pub const CONDITIONAL: i32 = 2;
pub const OPEN: i32 = 3;

#[derive(Clone, Debug, Default)]
pub struct ProveOptions {
    pub goal: Option<usize>,
    pub budget: Option<usize>,
    pub smt: Option<String>,
    pub allow_conditional: bool,
    pub trace_dir: Option<PathBuf>,
}

pub fn solver(smt: Option<&str>) -> Result<Solver, String> {
    let s = Solver::new();
    match smt {
        None => Ok(s),
        Some(cmd) => {
            let p = ProcessSolver::new(cmd).ok_or_else(|| String::from("empty --smt command"))?;
            Ok(s.with_external(Arc::new(p)))
        }
    }
}

fn load(file: &Path, err: &mut dyn Write) -> Option<Program> {
    let src = match std::fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", file.display());
            return None;
        }
    };
    match parse::parse_program(&src) {
        Ok(p) => Some(p),
        Err(e) => {
            let _ = writeln!(err, "{}:{}:{}: {}", file.display(), e.line, e.col, e.message);
            None
        }
    }
}

/// Proves the file's lemmas, then its goals (or only goal `goal`), each
/// with the earlier results available.
pub fn prove(file: &Path, opts: &ProveOptions, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some(program) = load(file, err) else { return ERROR };
    let solver = match solver(opts.smt.as_deref()) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return ERROR;
        }
    };
    if let Some(k) = opts.goal {
        if k >= program.goals.len() {
            let _ = writeln!(err, "{}: no goal {k} ({} goals)", file.display(), program.goals.len());
            return ERROR;
        }
    }
    if let Some(d) = &opts.trace_dir {
        if let Err(e) = std::fs::create_dir_all(d) {
            let _ = writeln!(err, "{}: {e}", d.display());
            return ERROR;
        }
    }
    let mut cfg = AutoConfig::default();
    if let Some(b) = opts.budget {
        cfg.budget = b;
    }
    let stem = file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "proof".into());
    let lemmas = program
        .lemmas
        .iter()
        .enumerate()
        .map(|(k, e)| (format!("lemma {k}"), format!("{stem}-lemma{k}"), e));
    let goals = program
        .goals
        .iter()
        .enumerate()
        .filter(|(k, _)| opts.goal.is_none_or(|g| g == *k))
        .map(|(k, e)| (format!("goal {k}"), format!("{stem}-goal{k}"), e));
    let mut worst = OK;
    for (label, name, eq) in lemmas.chain(goals).collect::<Vec<_>>() {
        let r = auto_prove(&program, &solver, eq, &cfg);
        let _ = writeln!(
            out,
            "{label}: {eq}: {} ({}, {} steps)",
            r.status,
            strategy_name(&r),
            r.script().len()
        );
        if let Some(d) = &opts.trace_dir {
            let path = d.join(format!("{name}.json"));
            match std::fs::write(&path, Trace::of(&program, &r.state).to_json()) {
                Ok(()) => {
                    let _ = writeln!(out, "  trace: {}", path.display());
                }
                Err(e) => {
                    let _ = writeln!(err, "{}: {e}", path.display());
                    worst = worst.max(ERROR);
                }
            }
        }
        match r.status {
            Status::Proved | Status::Conditional => {
                if r.status == Status::Conditional {
                    let pending: Vec<String> = r.state.obligations().iter().map(|&a| r.state.axioms()[a].to_string()).collect();
                    let _ = writeln!(out, "  assumed: {}", pending.join("; "));
                    if !opts.allow_conditional {
                        worst = worst.max(CONDITIONAL);
                    }
                }
                if recursor_free(eq) {
                    match sample_soundness(&program, &solver, eq, &SampleConfig::default()) {
                        Ok(n) => {
                            let _ = writeln!(out, "  sample: {n} instances agree");
                        }
                        Err(v) => {
                            let _ = writeln!(out, "  sample: VIOLATION {v}");
                            worst = ERROR.max(worst);
                        }
                    }
                }
                cfg.theorems.push((eq.clone(), r.script().to_vec()));
            }
            Status::Open => {
                for g in r.state.goals() {
                    let _ = writeln!(out, "  open: {}", g.equation);
                }
                for n in &r.notes {
                    let _ = writeln!(out, "  note: {n}");
                }
                worst = OPEN;
            }
        }
    }
    worst
}

fn strategy_name(r: &lcri_core::templates::AutoResult) -> String {
    serde_json::to_value(r.strategy)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

/// Parses the file and checks quasi-reductivity and rule orientation.
pub fn check(file: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some(program) = load(file, err) else { return ERROR };
    let solver = Solver::new();
    let mut code = OK;
    for r in program.check_quasi_reductivity(&solver) {
        match r.coverage {
            Coverage::Pass => {
                let _ = writeln!(out, "{}: covered", r.symbol);
            }
            Coverage::Fail { region, witness } => {
                let w = witness.map(|w| format!(" (e.g. {w})")).unwrap_or_default();
                let _ = writeln!(out, "{}: not covered: {region}{w}", r.symbol);
                code = OPEN;
            }
            Coverage::Unverified(why) => {
                let _ = writeln!(out, "{}: unverified: {why}", r.symbol);
                code = OPEN;
            }
        }
    }
    let (rules, calcs) = Ordering::new(&program, &solver).orient_rules(&program);
    for i in &rules {
        let _ = writeln!(out, "rule {i} not oriented: {}", program.rules()[*i]);
        code = OPEN;
    }
    for c in &calcs {
        let _ = writeln!(out, "calculation `{c}` not oriented");
        code = OPEN;
    }
    if rules.is_empty() && calcs.is_empty() {
        let _ = writeln!(out, "all {} rules oriented", program.rules().len());
    }
    code
}

/// Prints the normal form of a ground term.
pub fn eval(file: &Path, term: &str, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some(program) = load(file, err) else { return ERROR };
    let t = match parse::parse_term(&program, term, &Default::default(), &[]) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "term:{}: {}", e.col, e.message);
            return ERROR;
        }
    };
    match lcri_core::rewrite::normalize(&program, &Solver::new(), &t, 1_000_000) {
        Ok(n) => {
            let _ = writeln!(out, "{n}");
            OK
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            ERROR
        }
    }
}
