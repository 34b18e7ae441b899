//! Ground reduction and constrained (symbolic) rewriting.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use thiserror::Error;

use crate::program::{Program, Rule};
use crate::term::{fresh_name, match_term, Head, Position, Substitution, Symbol, Term, TheoryOp, Var};
use crate::theory::{self, eval_ground, SatResult, Solver, Value};

/// Which rule fired.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleRef {
    /// Index into [`Program::rules`].
    User(usize),
    /// A calculation rule for this theory operator.
    Calc(TheoryOp),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundStep {
    pub result: Term,
    pub position: Position,
    pub rule: RuleRef,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("no normal form within {0} steps")]
    FuelExhausted(usize),
    #[error("no rule applies at this position: {0}")]
    Inapplicable(String),
}

/// One leftmost-innermost step of `t` (which should be ground).
pub fn reduce_ground_once(program: &Program, solver: &Solver, t: &Term) -> Option<GroundStep> {
    for (i, a) in t.args().iter().enumerate() {
        if let Some(mut step) = reduce_ground_once(program, solver, a) {
            step.result = t.replace_at(&[i], step.result).expect("same type");
            step.position.insert(0, i);
            return Some(step);
        }
    }
    let (result, rule) = root_step(program, solver, t)?;
    Some(GroundStep {
        result,
        position: Vec::new(),
        rule,
    })
}

fn root_step(program: &Program, solver: &Solver, t: &Term) -> Option<(Term, RuleRef)> {
    if let Some(op) = t.theory_op() {
        if !op.is_value() && t.args().len() == op.arity() && t.args().iter().all(Term::is_value) {
            let v = eval_ground(t).ok()?;
            return Some((v.to_term(), RuleRef::Calc(op)));
        }
        return None;
    }
    let Head::Sym(Symbol::Fun(f)) = t.head() else {
        return None;
    };
    let k = program.arity(&Symbol::Fun(f.clone()))?;
    if t.args().len() < k {
        return None;
    }
    let redex = t.prefix(k);
    let extra = &t.args()[k..];
    for (idx, rule) in program.rules().iter().enumerate() {
        if rule.root() != f {
            continue;
        }
        let Some(mut gamma) = match_term(&rule.lhs, &redex) else {
            continue;
        };
        if !respects(solver, rule, &mut gamma) {
            continue;
        }
        let rhs = rule.rhs.subst(&gamma);
        return Some((rhs.apply(extra).expect("rule preserves type"), RuleRef::User(idx)));
    }
    None
}

/// Does `gamma` (extended with values for constraint-only variables) respect
/// the rule's constraint? Constraint variables must be bound to values.
fn respects(solver: &Solver, rule: &Rule, gamma: &mut Substitution) -> bool {
    let cvars = rule.constraint.vars();
    for v in &cvars {
        if let Some(t) = gamma.get(v) {
            if !t.is_value() {
                return false;
            }
        }
    }
    let partial = rule.constraint.subst(gamma);
    if partial.vars().is_empty() {
        return matches!(eval_ground(&partial), Ok(Value::Bool(true)));
    }
    match solver.satisfiable(&partial) {
        SatResult::Sat(model) => {
            for (v, t) in model.iter() {
                let _ = gamma.insert(v.clone(), t.clone());
            }
            true
        }
        _ => false,
    }
}

/// Reduce to normal form, at most `fuel` steps.
pub fn normalize(program: &Program, solver: &Solver, t: &Term, fuel: usize) -> Result<Term, RewriteError> {
    let mut cur = t.clone();
    for _ in 0..fuel {
        match reduce_ground_once(program, solver, &cur) {
            Some(step) => cur = step.result,
            None => return Ok(cur),
        }
    }
    if reduce_ground_once(program, solver, &cur).is_none() {
        return Ok(cur);
    }
    Err(RewriteError::FuelExhausted(fuel))
}

/// Do `s` and `t` reach the same normal form?
pub fn joinable(program: &Program, solver: &Solver, s: &Term, t: &Term, fuel: usize) -> Result<bool, RewriteError> {
    Ok(normalize(program, solver, s, fuel)? == normalize(program, solver, t, fuel)?)
}

/// Outcome of a symbolic rewrite step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteResult {
    pub term: Term,
    pub constraint: Term,
    pub rule: RuleRef,
    pub position: Position,
}

/// Rewrites `s` at `pos` with `program.rules()[rule_index]` under `phi`.
///
/// Rule variables occurring in the rule constraint may be bound to theory
/// terms; the instantiated constraint must be entailed by `phi`. Constraint
/// variables absent from the left-hand side must be defined by an equation
/// conjunct `y = e` of the rule constraint.
pub fn constrained_rewrite(
    program: &Program,
    solver: &Solver,
    s: &Term,
    phi: &Term,
    rule_index: usize,
    pos: &[usize],
    used: &BTreeSet<Arc<str>>,
) -> Result<RewriteResult, RewriteError> {
    let inapplicable = |why: &str| RewriteError::Inapplicable(why.to_string());
    let rule = program.rules().get(rule_index).ok_or_else(|| inapplicable("unknown rule"))?;
    let sub = s.at(pos).ok_or_else(|| inapplicable("invalid position"))?;
    let k = rule.arity();
    if !matches!(sub.head(), Head::Sym(Symbol::Fun(f)) if f == rule.root()) || sub.args().len() < k {
        return Err(inapplicable("the rule's root symbol does not head this subterm"));
    }
    let rule = rule.rename_apart(used);
    let redex = sub.prefix(k);
    let mut gamma = match_term(&rule.lhs, &redex).ok_or_else(|| inapplicable("the left-hand side does not match"))?;
    for v in rule.constraint.vars() {
        match gamma.get(&v) {
            Some(t) if !t.is_base_theory_term() => {
                return Err(inapplicable("a constraint variable would be bound to a non-theory term"));
            }
            Some(_) => {}
            None => {
                let def = theory::conjuncts(&rule.constraint).into_iter().find_map(|c| {
                    let is_eq = matches!(c.theory_op(), Some(TheoryOp::Eq(_))) && c.args().len() == 2;
                    if !is_eq {
                        return None;
                    }
                    let (a, b) = (&c.args()[0], &c.args()[1]);
                    if a.as_var() == Some(&v) && !b.contains_var(&v) {
                        Some(b.clone())
                    } else if b.as_var() == Some(&v) && !a.contains_var(&v) {
                        Some(a.clone())
                    } else {
                        None
                    }
                });
                let def = def.ok_or_else(|| inapplicable("a constraint variable has no definition"))?;
                let value = def.subst(&gamma);
                if value
                    .vars()
                    .iter()
                    .any(|w| rule.constraint.vars().contains(w) && gamma.get(w).is_none())
                {
                    return Err(inapplicable("constraint variables are defined in terms of each other"));
                }
                gamma
                    .insert(v.clone(), value)
                    .map_err(|e| RewriteError::Inapplicable(e.to_string()))?;
            }
        }
    }
    let psi = rule.constraint.subst(&gamma);
    match solver.entails(phi, &psi) {
        theory::Verdict::Yes => {}
        _ => return Err(RewriteError::Inapplicable(alloc::format!("the constraint does not entail {psi}"))),
    }
    let rhs = rule.rhs.subst(&gamma).apply(&sub.args()[k..]).expect("rule preserves type");
    Ok(RewriteResult {
        term: s.replace_at(pos, rhs).expect("same type"),
        constraint: phi.clone(),
        rule: RuleRef::User(rule_index),
        position: pos.to_vec(),
    })
}

/// Calculation step at `pos`: a ground theory subterm becomes its value; a
/// non-ground one becomes a fresh variable `v` with `v = subterm` added to `phi`.
pub fn calc_step(s: &Term, phi: &Term, pos: &[usize], used: &BTreeSet<Arc<str>>) -> Result<RewriteResult, RewriteError> {
    let inapplicable = |why: &str| RewriteError::Inapplicable(why.to_string());
    let sub = s.at(pos).ok_or_else(|| inapplicable("invalid position"))?;
    let op = sub.theory_op().ok_or_else(|| inapplicable("not a theory operation"))?;
    if op.is_value() || sub.args().len() != op.arity() || !sub.is_base_theory_term() {
        return Err(inapplicable("not a fully applied theory term"));
    }
    if sub.is_ground() {
        let v = eval_ground(sub).map_err(|e| RewriteError::Inapplicable(e.to_string()))?;
        return Ok(RewriteResult {
            term: s.replace_at(pos, v.to_term()).expect("same type"),
            constraint: phi.clone(),
            rule: RuleRef::Calc(op),
            position: pos.to_vec(),
        });
    }
    let base = match sub.args().iter().find_map(|a| a.as_var().map(|v| v.name.clone())) {
        Some(n) => n,
        None => "v".into(),
    };
    let name = fresh_name(&base, used);
    let fresh = Term::var(Var {
        name,
        ty: sub.ty().clone(),
    });
    Ok(RewriteResult {
        term: s.replace_at(pos, fresh.clone()).expect("same type"),
        constraint: theory::and(phi.clone(), theory::eq(fresh, sub.clone())),
        rule: RuleRef::Calc(op),
        position: pos.to_vec(),
    })
}

/// Positions in `s` where some rule or calculation could fire, in pre-order.
pub fn candidate_positions(program: &Program, s: &Term) -> Vec<(Position, Option<usize>)> {
    let mut out = Vec::new();
    for p in s.positions() {
        let sub = s.at(&p).expect("own position");
        match sub.head() {
            Head::Sym(Symbol::Theory(op)) => {
                if !op.is_value() && sub.args().len() == op.arity() && sub.is_base_theory_term() {
                    out.push((p, None));
                }
            }
            Head::Sym(Symbol::Fun(f)) => {
                for (i, r) in program.rules().iter().enumerate() {
                    if r.root() == f && sub.args().len() >= r.arity() {
                        out.push((p.clone(), Some(i)));
                    }
                }
            }
            _ => {}
        }
    }
    out
}
