//! Bounded rewriting induction: proof states and deduction steps.

mod sample;
mod search;
mod step;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::order::{Ordering, Requirement};
use crate::parse;
use crate::program::{Equation, Program, Rule};
use crate::rewrite::{calc_step, constrained_rewrite};
use crate::term::{equal_modulo, fresh_name, match_modulo, match_modulo_all, match_term, Head, Substitution, Symbol, Term, TheoryOp, Var};
use crate::theory::{self, poly::Poly, SatResult, Solver};

pub use sample::{recursor_free, sample_soundness, SampleConfig, Violation};
pub use step::{Direction, HypRef, ProofStep, Rejection, Side, Using};

/// An equation with its bounding terms. `None` is the unbounded `•` of a
/// goal that is not (yet) inside an induction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EquationContext {
    pub bound_left: Option<Term>,
    pub equation: Equation,
    pub bound_right: Option<Term>,
}

impl EquationContext {
    pub fn unbounded(equation: Equation) -> Self {
        EquationContext {
            bound_left: None,
            equation,
            bound_right: None,
        }
    }

    pub fn side(&self, side: Side) -> &Term {
        match side {
            Side::Left => &self.equation.lhs,
            Side::Right => &self.equation.rhs,
        }
    }

    pub fn bound(&self, side: Side) -> Option<&Term> {
        match side {
            Side::Left => self.bound_left.as_ref(),
            Side::Right => self.bound_right.as_ref(),
        }
    }

    /// Variable names occurring anywhere in the context.
    pub fn used_names(&self) -> BTreeSet<Arc<str>> {
        let mut out = self.equation.var_names();
        for b in [&self.bound_left, &self.bound_right].into_iter().flatten() {
            out.extend(b.vars().into_iter().map(|v| v.name));
        }
        out
    }

    fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.equation.vars();
        for b in [&self.bound_left, &self.bound_right].into_iter().flatten() {
            b.collect_vars(&mut out);
        }
        out
    }

    fn with_side(&self, side: Side, t: Term, constraint: Term) -> EquationContext {
        let mut c = self.clone();
        match side {
            Side::Left => c.equation.lhs = t,
            Side::Right => c.equation.rhs = t,
        }
        c.equation.constraint = constraint;
        c
    }
}

impl fmt::Display for EquationContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = |t: &Option<Term>| t.as_ref().map_or_else(|| String::from("•"), |t| t.to_string());
        write!(f, "({}, {}, {})", b(&self.bound_left), self.equation, b(&self.bound_right))
    }
}

/// How Hypothesis bound conditions are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequirementMode {
    /// Each condition must be shown by the ordering before the step is accepted.
    #[default]
    Check,
    /// Conditions are recorded as assumptions of the proof.
    Record,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordedRequirement {
    pub requirement: Requirement,
    pub discharged: bool,
    /// Index of the trace step that imposed it.
    pub step: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Proved,
    /// No goals left, but axioms or ordering requirements remain assumed.
    Conditional,
    Open,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Proved => "proved",
            Status::Conditional => "conditional",
            Status::Open => "open",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ProofState {
    program: Program,
    solver: Solver,
    ordering: Ordering,
    goal: Equation,
    mode: RequirementMode,
    goals: Vec<EquationContext>,
    hypotheses: Vec<Equation>,
    axioms: Vec<Equation>,
    obligations: BTreeSet<usize>,
    requirements: Vec<RecordedRequirement>,
    trace: Vec<ProofStep>,
}

impl PartialEq for ProofState {
    fn eq(&self, o: &Self) -> bool {
        self.program == o.program
            && self.goal == o.goal
            && self.mode == o.mode
            && self.goals == o.goals
            && self.hypotheses == o.hypotheses
            && self.axioms == o.axioms
            && self.obligations == o.obligations
            && self.requirements == o.requirements
            && self.trace == o.trace
    }
}

impl ProofState {
    pub fn new(program: Program, solver: Solver, goal: Equation) -> Self {
        let ordering = Ordering::new(&program, &solver);
        ProofState {
            program,
            solver,
            ordering,
            goals: alloc::vec![EquationContext::unbounded(goal.clone())],
            goal,
            mode: RequirementMode::Check,
            hypotheses: Vec::new(),
            axioms: Vec::new(),
            obligations: BTreeSet::new(),
            requirements: Vec::new(),
            trace: Vec::new(),
        }
    }

    pub fn with_mode(mut self, mode: RequirementMode) -> Self {
        self.mode = mode;
        self
    }

    /// Applies `steps` in order from a fresh state; reports the first refused step.
    pub fn replay(
        program: Program,
        solver: Solver,
        goal: Equation,
        mode: RequirementMode,
        steps: &[ProofStep],
    ) -> Result<ProofState, (usize, Rejection)> {
        let mut st = ProofState::new(program, solver, goal).with_mode(mode);
        for (i, s) in steps.iter().enumerate() {
            st.apply(s.clone()).map_err(|e| (i, e))?;
        }
        Ok(st)
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    pub fn goal(&self) -> &Equation {
        &self.goal
    }

    pub fn mode(&self) -> RequirementMode {
        self.mode
    }

    pub fn goals(&self) -> &[EquationContext] {
        &self.goals
    }

    pub fn hypotheses(&self) -> &[Equation] {
        &self.hypotheses
    }

    pub fn axioms(&self) -> &[Equation] {
        &self.axioms
    }

    /// Indices of assumed axioms not yet discharged.
    pub fn obligations(&self) -> &BTreeSet<usize> {
        &self.obligations
    }

    pub fn requirements(&self) -> &[RecordedRequirement] {
        &self.requirements
    }

    pub fn trace(&self) -> &[ProofStep] {
        &self.trace
    }

    pub fn is_complete(&self) -> bool {
        self.goals.is_empty()
    }

    pub fn status(&self) -> Status {
        if !self.goals.is_empty() {
            Status::Open
        } else if self.obligations.is_empty() && self.requirements.iter().all(|r| r.discharged) {
            Status::Proved
        } else {
            Status::Conditional
        }
    }

    /// Try to discharge recorded requirements with the ordering.
    pub fn discharge_requirements(&mut self) -> usize {
        let mut n = 0;
        for r in &mut self.requirements {
            if !r.discharged && self.ordering.discharge(&r.requirement) {
                r.discharged = true;
                n += 1;
            }
        }
        n
    }

    pub fn lookup(&self, h: HypRef) -> Option<&Equation> {
        match h {
            HypRef::H(i) => self.hypotheses.get(i),
            HypRef::A(i) => self.axioms.get(i),
        }
    }

    /// Applies one step. On rejection the state is unchanged.
    pub fn apply(&mut self, step: ProofStep) -> Result<(), Rejection> {
        let mut next = self.clone();
        next.apply_inner(&step)?;
        next.trace.push(step);
        *self = next;
        Ok(())
    }

    /// Would `step` be accepted?
    pub fn check(&self, step: &ProofStep) -> Result<ProofState, Rejection> {
        let mut next = self.clone();
        next.apply(step.clone())?;
        Ok(next)
    }

    fn context(&self, target: usize) -> Result<&EquationContext, Rejection> {
        self.goals.get(target).ok_or(Rejection::NoSuchGoal(target))
    }

    fn apply_inner(&mut self, step: &ProofStep) -> Result<(), Rejection> {
        match step {
            ProofStep::Simplify {
                target,
                side,
                position,
                using,
            } => self.simplify(*target, *side, position, using),
            ProofStep::Case { target, constraint } => {
                let c = self.context(*target)?.clone();
                let vars = c.vars();
                let psi = parse::parse_constraint(&self.program, constraint, &parse::env_of(vars.iter().cloned()))
                    .map_err(|e| Rejection::Parse(e.to_string()))?;
                if let Some(v) = psi.vars().into_iter().find(|v| !vars.contains(v)) {
                    return Err(Rejection::Inapplicable(alloc::format!("`{}` does not occur in the goal", v.name)));
                }
                let phi = c.equation.constraint.clone();
                let mut yes = c.clone();
                yes.equation.constraint = theory::and(phi.clone(), psi.clone());
                let mut no = c;
                no.equation.constraint = theory::and(phi.clone(), theory::not(psi));
                self.goals.splice(*target..=*target, [yes, no]);
                Ok(())
            }
            ProofStep::Delete { target } => {
                let c = self.context(*target)?;
                let eq = &c.equation;
                let same = self.equal_under(&eq.lhs, &eq.rhs, &eq.constraint);
                if same || self.solver.satisfiable(&eq.constraint) == SatResult::Unsat {
                    self.goals.remove(*target);
                    Ok(())
                } else {
                    Err(Rejection::DeleteCondition)
                }
            }
            ProofStep::Induct { target } => {
                let c = self.context(*target)?.clone();
                let eq = c.equation;
                self.hypotheses.push(eq.clone());
                self.goals[*target] = EquationContext {
                    bound_left: Some(eq.lhs.clone()),
                    bound_right: Some(eq.rhs.clone()),
                    equation: eq,
                };
                Ok(())
            }
            ProofStep::HDelete { target, hypothesis } => self.hdelete(*target, *hypothesis),
            ProofStep::Hypothesis {
                target,
                side,
                position,
                hypothesis,
                direction,
                bind,
            } => self.hypothesis(*target, *side, position, *hypothesis, *direction, bind),
            ProofStep::AddLemma { equation } => {
                let eq = self.parse_equation(equation)?;
                self.goals.insert(
                    0,
                    EquationContext {
                        bound_left: Some(eq.lhs.clone()),
                        bound_right: Some(eq.rhs.clone()),
                        equation: eq,
                    },
                );
                Ok(())
            }
            ProofStep::AssumeAxiom { equation } => {
                let eq = self.parse_equation(equation)?;
                self.obligations.insert(self.axioms.len());
                self.axioms.push(eq);
                Ok(())
            }
            ProofStep::DischargeAxiom { axiom } => {
                let eq = self
                    .axioms
                    .get(*axiom)
                    .ok_or_else(|| Rejection::NoSuchHypothesis(HypRef::A(*axiom).to_string()))?;
                check_axiom(&self.program, &self.solver, eq).map_err(Rejection::Axiom)?;
                self.obligations.remove(axiom);
                Ok(())
            }
            ProofStep::Define { source, synthesized } => self.define(source, *synthesized),
            ProofStep::Theorem { equation, proof } => {
                let eq = self.parse_equation(equation)?;
                let mut inner = ProofState::new(self.program.clone(), self.solver.clone(), eq.clone()).with_mode(self.mode);
                for (k, s) in proof.iter().enumerate() {
                    inner
                        .apply(s.clone())
                        .map_err(|e| Rejection::Theorem(alloc::format!("step {k} ({s}): {e}")))?;
                }
                inner.discharge_requirements();
                if inner.status() != Status::Proved {
                    return Err(Rejection::Theorem(alloc::format!("{eq} is {}", inner.status())));
                }
                self.ordering = inner.ordering;
                self.program = inner.program;
                self.axioms.push(eq);
                Ok(())
            }
        }
    }

    fn parse_equation(&self, text: &str) -> Result<Equation, Rejection> {
        parse::parse_equation(&self.program, text, &BTreeMap::new(), &[]).map_err(|e| Rejection::Parse(e.to_string()))
    }

    /// `a` and `b` are equal up to theory subterms that `phi` forces equal.
    fn equal_under(&self, a: &Term, b: &Term, phi: &Term) -> bool {
        let mut deferred = Vec::new();
        equal_modulo(a, b, &mut deferred) && deferred.iter().all(|(x, y)| self.solver.equal_under(phi, x, y))
    }

    fn simplify(&mut self, target: usize, side: Side, pos: &[usize], using: &Using) -> Result<(), Rejection> {
        let c = self.context(target)?.clone();
        let used = c.used_names();
        let s = c.side(side);
        let phi = &c.equation.constraint;
        let res = match using {
            Using::Rule(r) => constrained_rewrite(&self.program, &self.solver, s, phi, *r, pos, &used),
            Using::Calc { .. } => calc_step(s, phi, pos, &used),
        }
        .map_err(|e| Rejection::Inapplicable(e.to_string()))?;
        let (mut term, mut constraint) = (res.term, res.constraint);
        if let Using::Calc { fresh: Some(name) } = using {
            let introduced: Vec<Var> = constraint.vars().into_iter().filter(|v| !used.contains(&v.name)).collect();
            if let [v] = introduced.as_slice() {
                if used.contains(name.as_str()) || !is_var_name(name) {
                    return Err(Rejection::Inapplicable(alloc::format!("`{name}` is not a fresh variable name")));
                }
                let w = Var {
                    name: name.as_str().into(),
                    ty: v.ty.clone(),
                };
                let ren = |x: &Var| (x == v).then(|| w.clone());
                term = term.rename(&ren);
                constraint = constraint.rename(&ren);
            }
        }
        self.goals[target] = c.with_side(side, term, constraint);
        Ok(())
    }

    fn hdelete(&mut self, target: usize, h: HypRef) -> Result<(), Rejection> {
        let c = self.context(target)?.clone();
        let hyp = self.lookup(h).ok_or_else(|| Rejection::NoSuchHypothesis(h.to_string()))?.clone();
        let eq = &c.equation;
        // A calculation that only names a theory subterm does not decrease a
        // side, so the comparison is modulo the constraint.
        let unchanged = |b: &Option<Term>, s: &Term| b.as_ref().is_some_and(|b| self.equal_under(b, s, &eq.constraint));
        if matches!(h, HypRef::H(_)) && unchanged(&c.bound_left, &eq.lhs) && unchanged(&c.bound_right, &eq.rhs) {
            return Err(Rejection::BoundUnchanged);
        }
        let (hyp, _) = rename_apart(&hyp, &c.used_names());
        let phi = &eq.constraint;
        let mut last_failure = None;
        for (pl, pr) in [(&hyp.lhs, &hyp.rhs), (&hyp.rhs, &hyp.lhs)] {
            for q in eq.lhs.positions() {
                let (Some(a), Some(b)) = (eq.lhs.at(&q), eq.rhs.at(&q)) else {
                    continue;
                };
                if a.ty() != b.ty() || a.ty() != pl.ty() {
                    continue;
                }
                let Ok(rhs_ctx) = eq.rhs.replace_at(&q, a.clone()) else {
                    continue;
                };
                if !self.equal_under(&eq.lhs, &rhs_ctx, phi) {
                    continue;
                }
                let mut deferred = Vec::new();
                let Some(mut delta) = match_modulo_all(&[(pl, a), (pr, b)], &mut deferred) else {
                    continue;
                };
                match self.finish_match(&hyp, &mut delta, &deferred, phi) {
                    Ok(()) => {
                        self.goals.remove(target);
                        return Ok(());
                    }
                    Err(e) => last_failure = Some(e),
                }
            }
        }
        Err(last_failure.unwrap_or_else(|| {
            Rejection::Inapplicable(alloc::format!(
                "the goal is not an instance of {h}: {}",
                self.lookup(h).expect("checked")
            ))
        }))
    }

    /// Completes `delta` on the hypothesis's constraint-only variables and
    /// checks the deferred theory pairs and the instantiated constraint.
    fn finish_match(&self, hyp: &Equation, delta: &mut Substitution, deferred: &[(Term, Term)], phi: &Term) -> Result<(), Rejection> {
        complete_by_definitions(hyp, delta).map_err(Rejection::Inapplicable)?;
        for (p, s) in deferred {
            let p = p.subst(delta);
            if !self.solver.equal_under(phi, &p, s) {
                return Err(Rejection::Entailment(alloc::format!("{phi} does not entail {p} = {s}")));
            }
        }
        let psi = hyp.constraint.subst(delta);
        if !self.solver.entails(phi, &psi).is_yes() {
            return Err(Rejection::Entailment(alloc::format!("{phi} does not entail {psi}")));
        }
        Ok(())
    }

    fn hypothesis(
        &mut self,
        target: usize,
        side: Side,
        pos: &[usize],
        h: HypRef,
        direction: Direction,
        bind: &BTreeMap<String, String>,
    ) -> Result<(), Rejection> {
        let c = self.context(target)?.clone();
        let hyp = self.lookup(h).ok_or_else(|| Rejection::NoSuchHypothesis(h.to_string()))?.clone();
        let (hyp, renaming) = rename_apart(&hyp, &c.used_names());
        let (from, to) = match direction {
            Direction::LeftToRight => (&hyp.lhs, &hyp.rhs),
            Direction::RightToLeft => (&hyp.rhs, &hyp.lhs),
        };
        let s = c.side(side);
        let sub = s.at(pos).ok_or_else(|| Rejection::Inapplicable(String::from("invalid position")))?;
        let phi = &c.equation.constraint;
        let mut deferred = Vec::new();
        let mut delta = match_modulo(from, sub, &mut deferred)
            .ok_or_else(|| Rejection::Inapplicable(alloc::format!("{sub} is not an instance of {from}")))?;
        if !bind.is_empty() {
            let env = parse::env_of(c.vars());
            for (name, text) in bind {
                let v = renaming
                    .get(name.as_str())
                    .ok_or_else(|| Rejection::Inapplicable(alloc::format!("`{name}` is not a variable of {h}")))?;
                if delta.get(v).is_some() {
                    return Err(Rejection::Inapplicable(alloc::format!("`{name}` is already bound by matching")));
                }
                let t = parse::parse_term(&self.program, text, &env, &[]).map_err(|e| Rejection::Parse(e.to_string()))?;
                delta.insert(v.clone(), t).map_err(|e| Rejection::Inapplicable(e.to_string()))?;
            }
        }
        self.finish_match(&hyp, &mut delta, &deferred, phi)?;
        let replacement = to.subst(&delta);
        if let Some(v) = replacement.vars().into_iter().find(|v| renaming.values().any(|w| w == v)) {
            return Err(Rejection::Inapplicable(alloc::format!(
                "variable `{}` of {h} is left unbound",
                v.name
            )));
        }
        let result = s.replace_at(pos, replacement).map_err(|e| Rejection::Inapplicable(e.to_string()))?;
        if let Some(bound) = c.bound(side) {
            if matches!(h, HypRef::H(_)) && pos.is_empty() && s == bound {
                return Err(Rejection::NoDecrease);
            }
            let requirement = Requirement {
                lhs: bound.clone(),
                rhs: result.clone(),
                constraint: phi.clone(),
            };
            let discharged = match self.mode {
                RequirementMode::Check => {
                    if !self.ordering.discharge(&requirement) {
                        return Err(Rejection::Ordering(requirement.to_string()));
                    }
                    true
                }
                RequirementMode::Record => false,
            };
            self.requirements.push(RecordedRequirement {
                requirement,
                discharged,
                step: self.trace.len(),
            });
        }
        self.goals[target] = c.with_side(side, result, phi.clone());
        Ok(())
    }

    fn define(&mut self, source: &str, synthesized: bool) -> Result<(), Rejection> {
        if self.already_defined(source) {
            return Ok(());
        }
        let mut p = self.program.clone();
        let before: BTreeSet<Arc<str>> = p.symbols().iter().map(|f| f.name.clone()).collect();
        let nrules = p.rules().len();
        let (ngoals, nlemmas, nprec) = (p.goals.len(), p.lemmas.len(), p.precedence.len());
        parse::parse_into(&mut p, source).map_err(|e| Rejection::Parse(e.to_string()))?;
        if p.goals.len() != ngoals || p.lemmas.len() != nlemmas || p.precedence.len() != nprec {
            return Err(Rejection::Definition(String::from(
                "only `fun` and `rule` declarations are allowed",
            )));
        }
        for r in &p.rules()[nrules..] {
            if before.contains(&r.root().name) {
                return Err(Rejection::Definition(alloc::format!(
                    "rule for existing symbol `{}` would change the program",
                    r.root().name
                )));
            }
        }
        if synthesized {
            let new: Vec<Arc<str>> = p.symbols().iter().map(|f| f.name.clone()).filter(|n| !before.contains(n)).collect();
            p.synthesized.extend(new);
        }
        self.ordering = Ordering::new(&p, &self.solver);
        self.program = p;
        Ok(())
    }
}

impl ProofState {
    /// The definitions in `source` are all present already, rule for rule.
    fn already_defined(&self, source: &str) -> bool {
        let Ok(q) = parse::parse_program(source) else {
            return false;
        };
        !q.symbols().is_empty()
            && q.symbols().iter().all(|f| self.program.lookup(&f.name) == q.lookup(&f.name))
            && q.symbols().iter().all(|f| {
                let mine: Vec<&Rule> = self.program.rules_for(&f.name).collect();
                let theirs: Vec<&Rule> = q.rules_for(&f.name).collect();
                mine.len() == theirs.len()
                    && theirs
                        .iter()
                        .all(|r| mine.iter().any(|m| crate::templates::matching::same_rule(m, r)))
            })
    }
}

fn is_var_name(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_ascii_lowercase()) && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Renames `eq` apart from `used`; the map sends original names to the new variables.
fn rename_apart(eq: &Equation, used: &BTreeSet<Arc<str>>) -> (Equation, BTreeMap<Arc<str>, Var>) {
    let mut taken = used.clone();
    taken.extend(eq.var_names());
    let mut map = BTreeMap::new();
    let mut sigma = Substitution::new();
    for v in eq.vars() {
        let w = if used.contains(&v.name) {
            let name = fresh_name(&v.name, &taken);
            taken.insert(name.clone());
            let w = Var { name, ty: v.ty.clone() };
            let _ = sigma.insert(v.clone(), Term::var(w.clone()));
            w
        } else {
            v.clone()
        };
        map.insert(v.name.clone(), w);
    }
    (eq.subst(&sigma), map)
}

/// Binds variables of `eq` left open by `delta` through defining conjuncts
/// `v = e` of its constraint.
fn complete_by_definitions(eq: &Equation, delta: &mut Substitution) -> Result<(), String> {
    let vars = eq.vars();
    let defs: Vec<(Var, Term)> = theory::conjuncts(&eq.constraint)
        .into_iter()
        .filter(|c| matches!(c.theory_op(), Some(TheoryOp::Eq(_))) && c.args().len() == 2)
        .flat_map(|c| {
            let (a, b) = (c.args()[0].clone(), c.args()[1].clone());
            let mut out = Vec::new();
            if let Some(v) = a.as_var() {
                if !b.contains_var(v) {
                    out.push((v.clone(), b.clone()));
                }
            }
            if let Some(v) = b.as_var() {
                if !a.contains_var(v) {
                    out.push((v.clone(), a));
                }
            }
            out
        })
        .collect();
    loop {
        let open: Vec<&Var> = vars.iter().filter(|v| delta.get(v).is_none()).collect();
        if open.is_empty() {
            return Ok(());
        }
        let mut progress = false;
        for v in &open {
            if let Some((_, e)) = defs
                .iter()
                .find(|(w, e)| w == *v && e.vars().iter().all(|x| delta.get(x).is_some()))
            {
                let val = e.subst(delta);
                delta.insert((*v).clone(), val).map_err(|e| e.to_string())?;
                progress = true;
            }
        }
        if !progress {
            let names: Vec<String> = open.iter().map(|v| v.name.to_string()).collect();
            return Err(alloc::format!("no value for {}", names.join(", ")));
        }
    }
}

/// Replaces applications of synthesized symbols by their definitions.
pub fn unfold_synthesized(program: &Program, t: &Term) -> Term {
    let args: Vec<Term> = t.args().iter().map(|a| unfold_synthesized(program, a)).collect();
    let t = t.with_args(args);
    if let Head::Sym(Symbol::Fun(f)) = t.head() {
        if program.synthesized.contains(&f.name) {
            for r in program.rules_for(&f.name) {
                let k = r.arity();
                if t.args().len() < k || !theory::is_true(&r.constraint) {
                    continue;
                }
                if let Some(g) = match_term(&r.lhs, &t.prefix(k)) {
                    let out = r.rhs.subst(&g).apply(&t.args()[k..]).expect("rule preserves type");
                    return unfold_synthesized(program, &out);
                }
            }
        }
    }
    t
}

/// Replaces maximal integer subterms outside `+ - *` by fresh variables, one per distinct subterm.
fn abstract_atoms(t: &Term, table: &mut BTreeMap<Term, Var>, used: &BTreeSet<Arc<str>>) -> Term {
    let arith = matches!(
        t.theory_op(),
        Some(TheoryOp::Add | TheoryOp::Sub | TheoryOp::Mul | TheoryOp::Int(_))
    ) && t.args().len() == t.theory_op().map_or(0, |o| o.arity());
    if arith {
        let args = t.args().iter().map(|a| abstract_atoms(a, table, used)).collect();
        return t.with_args(args);
    }
    if t.as_var().is_some() && t.is_base_theory_term() {
        return t.clone();
    }
    if let Some(v) = table.get(t) {
        return Term::var(v.clone());
    }
    let mut taken = used.clone();
    taken.extend(table.values().map(|v| v.name.clone()));
    let v = Var {
        name: fresh_name("atom", &taken),
        ty: t.ty().clone(),
    };
    table.insert(t.clone(), v.clone());
    Term::var(v)
}

/// Verifies an axiom instance: unfold synthesized symbols, then compare
/// polynomial normal forms (treating other subterms as atoms), falling back
/// to the solver for constrained axioms over theory terms.
pub fn check_axiom(program: &Program, solver: &Solver, eq: &Equation) -> Result<(), String> {
    let l = unfold_synthesized(program, &eq.lhs);
    let r = unfold_synthesized(program, &eq.rhs);
    if l == r {
        return Ok(());
    }
    let used = eq.var_names();
    let mut table = BTreeMap::new();
    let la = abstract_atoms(&l, &mut table, &used);
    let ra = abstract_atoms(&r, &mut table, &used);
    if let (Ok(pl), Ok(pr)) = (Poly::from_term(&la), Poly::from_term(&ra)) {
        if pl == pr {
            return Ok(());
        }
    }
    if la.is_base_theory_term() && ra.is_base_theory_term() {
        let claim = theory::eq(la.clone(), ra.clone());
        return match solver.entails(&eq.constraint, &claim) {
            theory::Verdict::Yes => Ok(()),
            theory::Verdict::No(model) => {
                let mut w: Vec<String> = model.iter().map(|(v, t)| alloc::format!("{}={}", v.name, t)).collect();
                if w.is_empty() {
                    w.push(String::from("any values"));
                }
                Err(alloc::format!("{l} ~ {r} is refuted at {}", w.join(", ")))
            }
            theory::Verdict::Unknown => Err(alloc::format!("{l} ~ {r} could not be decided")),
        };
    }
    Err(alloc::format!("{l} ~ {r} is outside the checked fragment"))
}
