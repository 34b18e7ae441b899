//! Proof trace documents.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::kernel::{ProofState, ProofStep, Rejection, RequirementMode, Status};
use crate::parse;
use crate::program::{Equation, Program};
use crate::theory::Solver;

pub const FORMAT: &str = "lcri-trace/1";

/// SHA-256 of the program's printed form, in hex.
pub fn program_hash(program: &Program) -> String {
    let digest = Sha256::digest(program.to_string().as_bytes());
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub format: String,
    pub program_hash: String,
    pub goal: String,
    #[serde(default)]
    pub mode: RequirementMode,
    pub steps: Vec<ProofStep>,
    pub verdict: Status,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("malformed trace: {0}")]
    Malformed(String),
    #[error("unsupported trace format `{0}`")]
    Format(String),
    #[error("trace was recorded for program {expected}, not {found}")]
    ProgramMismatch { expected: String, found: String },
    #[error("goal does not parse: {0}")]
    Goal(String),
    #[error("replay diverges at step {index} ({step}): {reason}")]
    Divergence { index: usize, step: String, reason: Rejection },
    #[error("replay ends {found}, trace claims {claimed}")]
    Verdict { claimed: Status, found: Status },
}

impl Trace {
    /// The trace of `state`, whose initial program is `program`.
    pub fn of(program: &Program, state: &ProofState) -> Trace {
        let mut st = state.clone();
        st.discharge_requirements();
        Trace {
            format: FORMAT.into(),
            program_hash: program_hash(program),
            goal: state.goal().to_string(),
            mode: state.mode(),
            steps: state.trace().to_vec(),
            verdict: st.status(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("traces serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Trace, TraceError> {
        let t: Trace = serde_json::from_str(text).map_err(|e| TraceError::Malformed(e.to_string()))?;
        if t.format != FORMAT {
            return Err(TraceError::Format(t.format));
        }
        Ok(t)
    }

    pub fn goal_equation(&self, program: &Program) -> Result<Equation, TraceError> {
        parse::parse_equation(program, &self.goal, &Default::default(), &[]).map_err(|e| TraceError::Goal(e.to_string()))
    }

    /// Replays the steps from the initial state and checks the verdict.
    pub fn replay(&self, program: &Program, solver: &Solver) -> Result<ProofState, TraceError> {
        let found = program_hash(program);
        if found != self.program_hash {
            return Err(TraceError::ProgramMismatch {
                expected: self.program_hash.clone(),
                found,
            });
        }
        let goal = self.goal_equation(program)?;
        let mut st = ProofState::replay(program.clone(), solver.clone(), goal, self.mode, &self.steps).map_err(|(index, reason)| {
            TraceError::Divergence {
                index,
                step: self.steps[index].to_string(),
                reason,
            }
        })?;
        st.discharge_requirements();
        if st.status() != self.verdict {
            return Err(TraceError::Verdict {
                claimed: self.verdict,
                found: st.status(),
            });
        }
        Ok(st)
    }
}
