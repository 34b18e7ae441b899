//! External SMT-LIB 2 solver run as a child process.

use std::io::Write;
use std::process::{Command, Stdio};

use lcri_core::theory::{ExternalAnswer, ExternalSolver};

/// Runs `program args…` once per query, feeding the script on stdin.
#[derive(Clone, Debug)]
pub struct ProcessSolver {
    program: String,
    args: Vec<String>,
}

impl ProcessSolver {
    /// `command` is split on whitespace, e.g. `"z3 -in"`.
    pub fn new(command: &str) -> Option<Self> {
        let mut parts = command.split_whitespace().map(String::from);
        let program = parts.next()?;
        Some(ProcessSolver {
            program,
            args: parts.collect(),
        })
    }

    fn query(&self, script: &str) -> std::io::Result<String> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        child.stdin.take().expect("piped").write_all(script.as_bytes())?;
        let out = child.wait_with_output()?;
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    }
}

/// Reads the first status line of a solver response.
pub fn parse_answer(out: &str) -> ExternalAnswer {
    let mut lines = out.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("unsat") => ExternalAnswer::Unsat,
        Some("sat") => ExternalAnswer::Sat(lines.collect::<Vec<_>>().join("\n")),
        _ => ExternalAnswer::Unknown,
    }
}

impl ExternalSolver for ProcessSolver {
    fn run(&self, script: &str) -> ExternalAnswer {
        match self.query(script) {
            Ok(out) => parse_answer(&out),
            Err(_) => ExternalAnswer::Unknown,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn answers() {
        assert_eq!(parse_answer("unsat\n"), ExternalAnswer::Unsat);
        assert_eq!(parse_answer("\nunknown\n"), ExternalAnswer::Unknown);
        match parse_answer("sat\n(\n (define-fun x () Int 3)\n)\n") {
            ExternalAnswer::Sat(m) => assert!(m.contains("define-fun x")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_binary_is_unknown() {
        let s = ProcessSolver::new("/nonexistent/solver -in").unwrap();
        assert_eq!(s.run("(check-sat)"), ExternalAnswer::Unknown);
        assert!(ProcessSolver::new("  ").is_none());
    }
}
