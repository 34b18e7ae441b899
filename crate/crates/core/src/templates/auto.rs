//! Automatic proof search over the template tactics.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::kernel::{Direction, HypRef, ProofState, ProofStep, Side, Status};
use crate::program::{Equation, Program};
use crate::theory::Solver;

use super::bank::{lemma, LemmaId};
use super::emit::Planner;
use super::tactics::{entries_for, forward, term_matches, TwoSidedFailure};

#[derive(Clone, Debug)]
pub struct AutoConfig {
    /// Steps tried by the generic search after the template strategies.
    pub budget: usize,
    /// Rewrite fuel per side in forward simplification.
    pub fuel: usize,
    /// Prove bridging lemmas when function arguments differ.
    pub bridges: bool,
    /// Equations proved earlier, with their scripts; usable via Theorem steps.
    pub theorems: Vec<(Equation, Vec<ProofStep>)>,
}

impl Default for AutoConfig {
    fn default() -> Self {
        AutoConfig {
            budget: 2000,
            fuel: 64,
            bridges: true,
            theorems: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Simplification,
    TwoSided,
    Bridged,
    Chain,
    OneSided,
    Search,
    None,
}

#[derive(Clone, Debug)]
pub struct AutoResult {
    pub status: Status,
    pub state: ProofState,
    pub strategy: Strategy,
    /// Notes from strategies that did not apply, e.g. bridge suggestions.
    pub notes: Vec<String>,
}

impl AutoResult {
    pub fn script(&self) -> &[ProofStep] {
        self.state.trace()
    }

    /// The first open goal, if any.
    pub fn residual(&self) -> Option<String> {
        self.state.goals().first().map(|g| g.equation.to_string())
    }
}

fn finish(mut state: ProofState, strategy: Strategy, notes: Vec<String>) -> AutoResult {
    state.discharge_requirements();
    AutoResult {
        status: state.status(),
        state,
        strategy,
        notes,
    }
}

/// Runs the template strategies on `goal`, then a bounded generic search.
pub fn auto_prove(program: &Program, solver: &Solver, goal: &Equation, cfg: &AutoConfig) -> AutoResult {
    auto_prove_from(&ProofState::new(program.clone(), solver.clone(), goal.clone()), 0, cfg)
}

/// As [`auto_prove`], on goal `target` of an existing state. On failure the
/// returned state is `start` after forward simplification.
pub fn auto_prove_from(start: &ProofState, target: usize, cfg: &AutoConfig) -> AutoResult {
    let mut notes = Vec::new();
    if target >= start.goals().len() {
        notes.push(alloc::format!("no goal with index {target}"));
        return finish(start.clone(), Strategy::None, notes);
    }

    let mut base = Planner::new(start.clone());
    forward(&mut base, target, cfg.fuel);
    if base.try_run(ProofStep::Delete { target }) {
        return finish(base.state, Strategy::Simplification, notes);
    }

    if let Some((state, strategy)) = two_sided_core(&base.state, target, cfg, &mut notes) {
        return finish(state, strategy, notes);
    }
    let eq = base.state.goals()[target].equation.clone();
    let (lm, rm) = (
        term_matches(base.state.program(), &eq.lhs),
        term_matches(base.state.program(), &eq.rhs),
    );

    if let Some(state) = chain(start, target, cfg) {
        return finish(state, Strategy::Chain, notes);
    }

    // One-sided, then search on the residual.
    for (side, ms) in [(Side::Left, &lm), (Side::Right, &rm)] {
        for m in ms.iter() {
            for e in entries_for(m) {
                let mut p = Planner::new(base.state.clone());
                if p.one_sided(target, side, m, e).is_err() {
                    continue;
                }
                forward(&mut p, target, cfg.fuel);
                if p.try_run(ProofStep::Delete { target }) {
                    return finish(p.state, Strategy::OneSided, notes);
                }
                if let Some(s) = search(&p.state, target, cfg.budget / 4) {
                    return finish(s, Strategy::OneSided, notes);
                }
            }
        }
    }

    if let Some(s) = search(&base.state, target, cfg.budget) {
        return finish(s, Strategy::Search, notes);
    }
    finish(base.state, Strategy::None, notes)
}

/// Two-sided matching after forward simplification. Errors carry the
/// reasons each combination failed, including bridge suggestions.
pub fn two_sided_from(start: &ProofState, target: usize, cfg: &AutoConfig) -> Result<AutoResult, Vec<String>> {
    if target >= start.goals().len() {
        return Err(alloc::vec![alloc::format!("no goal with index {target}")]);
    }
    let mut base = Planner::new(start.clone());
    forward(&mut base, target, cfg.fuel);
    let mut notes = Vec::new();
    match two_sided_core(&base.state, target, cfg, &mut notes) {
        Some((state, strategy)) => Ok(finish(state, strategy, notes)),
        None if notes.is_empty() => Err(alloc::vec![String::from("no template matches on both sides")]),
        None => Err(notes),
    }
}

/// One-sided matching with bank entry `entry` on `side`, after forward
/// simplification. The residual goal is left open.
pub fn one_sided_from(start: &ProofState, target: usize, side: Side, entry: LemmaId, cfg: &AutoConfig) -> Result<AutoResult, String> {
    if target >= start.goals().len() {
        return Err(alloc::format!("no goal with index {target}"));
    }
    let mut base = Planner::new(start.clone());
    forward(&mut base, target, cfg.fuel);
    let t = base.state.goals()[target].side(side).clone();
    let mut why = String::from("no template matches this side");
    for m in term_matches(base.state.program(), &t) {
        let mut p = Planner::new(base.state.clone());
        match p.one_sided(target, side, &m, lemma(entry)) {
            Ok(()) => {
                forward(&mut p, target, cfg.fuel);
                p.try_run(ProofStep::Delete { target });
                return Ok(finish(p.state, Strategy::OneSided, Vec::new()));
            }
            Err(e) => why = e,
        }
    }
    Err(why)
}

fn two_sided_core(base: &ProofState, target: usize, cfg: &AutoConfig, notes: &mut Vec<String>) -> Option<(ProofState, Strategy)> {
    let eq = base.goals()[target].equation.clone();
    let (lm, rm) = (term_matches(base.program(), &eq.lhs), term_matches(base.program(), &eq.rhs));
    for bridge in [false, true] {
        if bridge && !cfg.bridges {
            break;
        }
        for l in &lm {
            for r in &rm {
                let mut p = Planner::new(base.clone());
                if p.to_recursor(target, Side::Left, l).is_err() || p.to_recursor(target, Side::Right, r).is_err() {
                    continue;
                }
                match p.close_with_bank(target, bridge) {
                    Ok(()) => return Some((p.state, if bridge { Strategy::Bridged } else { Strategy::TwoSided })),
                    Err(TwoSidedFailure::BridgeNeeded(ls)) if !bridge => {
                        notes.push(alloc::format!("bridge lemmas suggested: {}", ls.join("; ")));
                    }
                    Err(e) => notes.push(e.to_string()),
                }
            }
        }
    }
    None
}

/// Closes the goal by rewriting at the root with earlier theorems, up to
/// three rewrites, each followed by an attempt at HDelete.
fn chain(start: &ProofState, target: usize, cfg: &AutoConfig) -> Option<ProofState> {
    if cfg.theorems.is_empty() {
        return None;
    }
    let mut st = start.clone();
    let first = st.axioms().len();
    for (eq, proof) in &cfg.theorems {
        st.apply(ProofStep::Theorem {
            equation: eq.to_string(),
            proof: proof.clone(),
        })
        .ok()?;
    }
    let refs: Vec<HypRef> = (first..st.axioms().len()).map(HypRef::A).collect();
    let mut frontier = alloc::vec![st];
    for _ in 0..=3 {
        let mut next = Vec::new();
        for s in &frontier {
            for &h in &refs {
                if let Ok(done) = s.check(&ProofStep::HDelete { target, hypothesis: h }) {
                    return Some(done);
                }
            }
            for &h in &refs {
                for side in [Side::Left, Side::Right] {
                    for direction in [Direction::LeftToRight, Direction::RightToLeft] {
                        let step = ProofStep::Hypothesis {
                            target,
                            side,
                            position: Vec::new(),
                            hypothesis: h,
                            direction,
                            bind: Default::default(),
                        };
                        if let Ok(n) = s.check(&step) {
                            if !frontier.iter().chain(next.iter()).any(|o: &ProofState| o.goals() == n.goals()) {
                                next.push(n);
                            }
                        }
                    }
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        frontier = next;
    }
    None
}

/// Depth-first search over `enumerate_steps` on goal `target` and the goals
/// it splits into, visiting at most `budget` states. Succeeds once they are
/// all closed.
pub fn search(start: &ProofState, target: usize, budget: usize) -> Option<ProofState> {
    const DEPTH: usize = 24;
    let done = start.goals().len().checked_sub(1)?;
    let mut visited = 0;
    let mut stack = alloc::vec![(start.clone(), 0usize)];
    while let Some((s, depth)) = stack.pop() {
        if s.goals().len() == done {
            return Some(s);
        }
        visited += 1;
        if visited > budget {
            return None;
        }
        if depth >= DEPTH {
            continue;
        }
        let inducts = s.trace().iter().filter(|t| matches!(t, ProofStep::Induct { .. })).count();
        for step in s.enumerate_steps(target).into_iter().rev() {
            if matches!(step, ProofStep::Induct { .. }) && inducts >= 2 {
                continue;
            }
            if let Ok(n) = s.check(&step) {
                stack.push((n, depth + 1));
            }
        }
    }
    None
}

/// Proves the program's lemmas, then its goals, each with the earlier
/// results available as theorems.
pub fn auto_prove_all(program: &Program, solver: &Solver, cfg: &AutoConfig) -> Vec<(Equation, AutoResult)> {
    let mut cfg = cfg.clone();
    let mut out = Vec::new();
    for eq in program.lemmas.iter().chain(program.goals.iter()) {
        let r = auto_prove(program, solver, eq, &cfg);
        if r.status == Status::Proved {
            cfg.theorems.push((eq.clone(), r.script().to_vec()));
        }
        out.push((eq.clone(), r));
    }
    out
}
