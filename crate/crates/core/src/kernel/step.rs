//! Serializable deduction steps and their rejections.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Orientation in which a hypothesis is used as a rewrite rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

/// An induction hypothesis `H(i)` or an assumed axiom `A(i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HypRef {
    H(usize),
    A(usize),
}

impl fmt::Display for HypRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HypRef::H(i) => write!(f, "H{i}"),
            HypRef::A(i) => write!(f, "A{i}"),
        }
    }
}

/// Rule used by a Simplify step.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Using {
    /// Index into the program's rules.
    Rule(usize),
    /// A calculation; `fresh` names the variable introduced for a
    /// non-ground theory subterm.
    Calc { fresh: Option<String> },
}

/// One deduction step. Terms and constraints are carried as source text and
/// parsed against the state at application time.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum ProofStep {
    Simplify {
        target: usize,
        side: Side,
        position: Vec<usize>,
        using: Using,
    },
    Case {
        target: usize,
        constraint: String,
    },
    Delete {
        target: usize,
    },
    Induct {
        target: usize,
    },
    HDelete {
        target: usize,
        hypothesis: HypRef,
    },
    Hypothesis {
        target: usize,
        side: Side,
        position: Vec<usize>,
        hypothesis: HypRef,
        direction: Direction,
        /// Values for hypothesis variables the match leaves open.
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        bind: BTreeMap<String, String>,
    },
    AddLemma {
        equation: String,
    },
    AssumeAxiom {
        equation: String,
    },
    /// Verify an assumed axiom and clear its obligation.
    DischargeAxiom {
        axiom: usize,
    },
    /// Extend the program with fresh symbols and their rules.
    Define {
        source: String,
        #[serde(default)]
        synthesized: bool,
    },
    /// Prove `equation` by `proof` in a nested state over the current
    /// program, then make it available as an axiom with no obligation.
    Theorem {
        equation: String,
        proof: Vec<ProofStep>,
    },
}

impl ProofStep {
    pub fn name(&self) -> &'static str {
        match self {
            ProofStep::Simplify { .. } => "Simplify",
            ProofStep::Case { .. } => "Case",
            ProofStep::Delete { .. } => "Delete",
            ProofStep::Induct { .. } => "Induct",
            ProofStep::HDelete { .. } => "HDelete",
            ProofStep::Hypothesis { .. } => "Hypothesis",
            ProofStep::AddLemma { .. } => "AddLemma",
            ProofStep::AssumeAxiom { .. } => "AssumeAxiom",
            ProofStep::DischargeAxiom { .. } => "DischargeAxiom",
            ProofStep::Define { .. } => "Define",
            ProofStep::Theorem { .. } => "Theorem",
        }
    }

    pub fn target(&self) -> Option<usize> {
        match self {
            ProofStep::Simplify { target, .. }
            | ProofStep::Case { target, .. }
            | ProofStep::Delete { target }
            | ProofStep::Induct { target }
            | ProofStep::HDelete { target, .. }
            | ProofStep::Hypothesis { target, .. } => Some(*target),
            _ => None,
        }
    }

    /// The same step aimed at another goal index.
    pub fn retarget(&self, to: usize) -> ProofStep {
        let mut s = self.clone();
        match &mut s {
            ProofStep::Simplify { target, .. }
            | ProofStep::Case { target, .. }
            | ProofStep::Delete { target }
            | ProofStep::Induct { target }
            | ProofStep::HDelete { target, .. }
            | ProofStep::Hypothesis { target, .. } => *target = to,
            _ => {}
        }
        s
    }

    /// Shift goal indices by `goals` and hypothesis/axiom indices by `h`/`a`,
    /// so that a script written for a fresh state runs inside a larger one.
    pub fn relocate(&self, goals: usize, h: usize, a: usize) -> ProofStep {
        let shift = |r: &HypRef| match r {
            HypRef::H(i) => HypRef::H(i + h),
            HypRef::A(i) => HypRef::A(i + a),
        };
        let mut s = self.clone();
        match &mut s {
            ProofStep::Simplify { target, .. }
            | ProofStep::Case { target, .. }
            | ProofStep::Delete { target }
            | ProofStep::Induct { target } => *target += goals,
            ProofStep::HDelete { target, hypothesis } | ProofStep::Hypothesis { target, hypothesis, .. } => {
                *target += goals;
                *hypothesis = shift(hypothesis);
            }
            ProofStep::DischargeAxiom { axiom } => *axiom += a,
            _ => {}
        }
        s
    }
}

impl fmt::Display for ProofStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProofStep::Simplify {
                target,
                side,
                position,
                using,
            } => {
                write!(f, "Simplify goal {target} {side} at {position:?} by ")?;
                match using {
                    Using::Rule(r) => write!(f, "rule {r}"),
                    Using::Calc { .. } => write!(f, "calculation"),
                }
            }
            ProofStep::Case { target, constraint } => write!(f, "Case goal {target} on {constraint}"),
            ProofStep::Delete { target } => write!(f, "Delete goal {target}"),
            ProofStep::Induct { target } => write!(f, "Induct goal {target}"),
            ProofStep::HDelete { target, hypothesis } => write!(f, "HDelete goal {target} by {hypothesis}"),
            ProofStep::Hypothesis {
                target,
                side,
                position,
                hypothesis,
                direction,
                ..
            } => {
                let arrow = match direction {
                    Direction::LeftToRight => "->",
                    Direction::RightToLeft => "<-",
                };
                write!(f, "Hypothesis goal {target} {side} at {position:?} by {hypothesis} {arrow}")
            }
            ProofStep::AddLemma { equation } => write!(f, "AddLemma {equation}"),
            ProofStep::AssumeAxiom { equation } => write!(f, "AssumeAxiom {equation}"),
            ProofStep::DischargeAxiom { axiom } => write!(f, "DischargeAxiom A{axiom}"),
            ProofStep::Define { source, .. } => write!(f, "Define {}", source.trim()),
            ProofStep::Theorem { equation, proof } => write!(f, "Theorem {equation} ({} steps)", proof.len()),
        }
    }
}

/// Why a step was refused. The state is left unchanged.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum Rejection {
    #[error("no goal with index {0}")]
    NoSuchGoal(usize),
    #[error("no hypothesis or axiom {0}")]
    NoSuchHypothesis(String),
    #[error("step not applicable: {0}")]
    Inapplicable(String),
    #[error("entailment failed: {0}")]
    Entailment(String),
    #[error("ordering requirement Unknown: {0}")]
    Ordering(String),
    #[error("neither s = t nor φ unsatisfiable")]
    DeleteCondition,
    #[error("bound unchanged in HDelete")]
    BoundUnchanged,
    #[error("the rewritten subterm is the bounding term itself")]
    NoDecrease,
    #[error("axiom fails: {0}")]
    Axiom(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid definition: {0}")]
    Definition(String),
    #[error("theorem not established: {0}")]
    Theorem(String),
}
