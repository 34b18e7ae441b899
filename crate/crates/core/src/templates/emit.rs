//! Template-recursor equivalences and their proof scripts.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::kernel::{HypRef, ProofState, ProofStep, Side, Using};
use crate::program::{Equation, Program};
use crate::term::{Head, Symbol, Term};
use crate::theory::{self, Solver};

use super::matching::{synthesized_definition, TemplateKind, TemplateMatch};
use super::recursors::{has_recursors, install_step, recursor_rule};

/// Records the steps it applies, so a script can be planned by running it.
pub(crate) struct Planner {
    pub state: ProofState,
    pub script: Vec<ProofStep>,
}

impl Planner {
    pub fn new(state: ProofState) -> Self {
        Planner { state, script: Vec::new() }
    }

    pub fn run(&mut self, step: ProofStep) -> Result<(), String> {
        let shown = step.to_string();
        self.state.apply(step.clone()).map_err(|e| alloc::format!("{shown}: {e}"))?;
        self.script.push(step);
        Ok(())
    }

    pub fn try_run(&mut self, step: ProofStep) -> bool {
        self.run(step).is_ok()
    }

    /// Applies the first of `steps` that is accepted.
    pub fn first_of(&mut self, steps: impl IntoIterator<Item = ProofStep>) -> bool {
        steps.into_iter().any(|s| self.try_run(s))
    }

    /// Rewrites every application of a synthesized symbol on `side` by its rule.
    pub fn unfold(&mut self, target: usize, side: Side) {
        loop {
            let program = self.state.program();
            let term = self.state.goals()[target].side(side).clone();
            let found = term.positions().into_iter().find_map(|p| {
                let sub = term.at(&p)?;
                let Head::Sym(Symbol::Fun(f)) = sub.head() else {
                    return None;
                };
                if !program.synthesized.contains(&f.name) {
                    return None;
                }
                let r = program
                    .rules()
                    .iter()
                    .position(|r| r.root() == f && sub.args().len() >= r.arity())?;
                Some((p, r))
            });
            let Some((position, r)) = found else { return };
            if !self.try_run(ProofStep::Simplify {
                target,
                side,
                position,
                using: Using::Rule(r),
            }) {
                return;
            }
        }
    }
}

/// Definitions a proof needs before it can state the lemma for `m`:
/// the recursors, then the synthesized context function.
pub fn setup_steps(program: &Program, m: &TemplateMatch) -> Vec<ProofStep> {
    let mut out = Vec::new();
    if !has_recursors(program) {
        out.push(install_step());
    }
    if let Some(source) = synthesized_definition(program, m) {
        out.push(ProofStep::Define { source, synthesized: true });
    }
    out
}

/// The equation `T[i, a] ~ rec F i u a` (or its kind's variant) for `m`.
/// The program must already contain the recursors and the context symbol.
pub fn template_equation(program: &Program, m: &TemplateMatch) -> Result<Equation, String> {
    let f = m
        .function_term(program)
        .ok_or_else(|| String::from("context function symbol is not defined"))?;
    let rec = program
        .lookup(m.kind.recursor())
        .ok_or_else(|| String::from("recursors are not installed"))?;
    let i = Term::var(m.index.clone());
    let mut fill = alloc::vec![i.clone()];
    fill.extend(m.accumulator.iter().cloned().map(Term::var));
    let lhs = m.context.fill(&fill).map_err(|e| e.to_string())?;
    let last = match (&m.accumulator, &m.base) {
        (Some(a), _) => Term::var(a.clone()),
        (None, Some(b)) => b.clone(),
        _ => return Err(String::from("inconsistent template match")),
    };
    let args = if m.kind.is_up() {
        [f, i, m.bound.clone(), last]
    } else {
        [f, m.bound.clone(), i, last]
    };
    let rhs = Term::sym(rec).apply(&args).map_err(|e| e.to_string())?;
    Equation::new(lhs, rhs, theory::truth()).map_err(|e| e.to_string())
}

/// The template-recursor lemma for `m` with a script that proves it from a
/// fresh state. The program must contain the recursors and context symbol.
pub fn emit_template_recursor_lemma(program: &Program, solver: &Solver, m: &TemplateMatch) -> Result<(Equation, Vec<ProofStep>), String> {
    let eq = template_equation(program, m)?;
    let rec = m.kind.recursor();
    let (rb, rs) = (
        recursor_rule(program, rec, false).ok_or("missing recursor rule")?,
        recursor_rule(program, rec, true).ok_or("missing recursor rule")?,
    );
    let i = Term::var(m.index.clone());
    let stop = match m.kind {
        TemplateKind::TailUp | TemplateKind::RecUp => theory::gt(i, m.bound.clone()),
        _ => theory::lt(i, m.bound.clone()),
    };
    let mut p = Planner::new(ProofState::new(program.clone(), solver.clone(), eq.clone()));
    p.run(ProofStep::Induct { target: 0 })?;
    p.run(ProofStep::Case {
        target: 0,
        constraint: stop.to_string(),
    })?;
    for (left, right) in [(m.base_rule, rb), (m.step_rule, rs)] {
        for (side, r) in [(Side::Left, left), (Side::Right, right)] {
            p.run(ProofStep::Simplify {
                target: 0,
                side,
                position: Vec::new(),
                using: Using::Rule(r),
            })?;
        }
        p.unfold(0, Side::Right);
        if !p.first_of([
            ProofStep::Delete { target: 0 },
            ProofStep::HDelete {
                target: 0,
                hypothesis: HypRef::H(0),
            },
        ]) {
            let g = &p.state.goals()[0];
            return Err(alloc::format!("cannot close {g}"));
        }
    }
    Ok((eq, p.script))
}
