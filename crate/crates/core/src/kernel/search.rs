//! Enumeration of applicable steps, best first.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Direction, HypRef, ProofState, ProofStep, Side, Using};
use crate::rewrite::candidate_positions;
use crate::term::{match_term, Head};
use crate::theory;

impl ProofState {
    /// Steps accepted on goal `target`, ranked Delete, HDelete, Simplify,
    /// Hypothesis, Case, Induct.
    pub fn enumerate_steps(&self, target: usize) -> Vec<ProofStep> {
        let Some(c) = self.goals.get(target) else {
            return Vec::new();
        };
        let ok = |s: &ProofStep| self.check(s).is_ok();
        let mut out = Vec::new();

        let del = ProofStep::Delete { target };
        if ok(&del) {
            out.push(del);
        }

        let refs: Vec<HypRef> = (0..self.hypotheses.len())
            .map(HypRef::H)
            .chain((0..self.axioms.len()).map(HypRef::A))
            .collect();
        for &h in &refs {
            let s = ProofStep::HDelete { target, hypothesis: h };
            if ok(&s) {
                out.push(s);
            }
        }

        let mut calcs = Vec::new();
        let mut guards: Vec<String> = Vec::new();
        for side in [Side::Left, Side::Right] {
            for (pos, rule) in candidate_positions(&self.program, c.side(side)) {
                let using = match rule {
                    Some(r) => Using::Rule(r),
                    None => Using::Calc { fresh: None },
                };
                let s = ProofStep::Simplify {
                    target,
                    side,
                    position: pos.clone(),
                    using: using.clone(),
                };
                if ok(&s) {
                    match using {
                        Using::Rule(_) => out.push(s),
                        Using::Calc { .. } => calcs.push(s),
                    }
                } else if let Some(r) = rule {
                    if let Some(g) = self.guard_for(target, side, &pos, r) {
                        if !guards.contains(&g) {
                            guards.push(g);
                        }
                    }
                }
            }
        }
        out.extend(calcs);

        for &h in &refs {
            let hyp = self.lookup(h).expect("listed");
            for side in [Side::Left, Side::Right] {
                let term = c.side(side);
                for pos in term.positions() {
                    let sub = term.at(&pos).expect("own position");
                    for (direction, from) in [(Direction::LeftToRight, &hyp.lhs), (Direction::RightToLeft, &hyp.rhs)] {
                        let plausible = match (from.head(), sub.head()) {
                            (Head::Sym(a), Head::Sym(b)) => a == b,
                            (Head::Var(_), _) => !from.args().is_empty(),
                            _ => false,
                        };
                        if !plausible || from.ty() != sub.ty() {
                            continue;
                        }
                        let s = ProofStep::Hypothesis {
                            target,
                            side,
                            position: pos.clone(),
                            hypothesis: h,
                            direction,
                            bind: Default::default(),
                        };
                        if ok(&s) {
                            out.push(s);
                        }
                    }
                }
            }
        }

        for g in guards {
            out.push(ProofStep::Case { target, constraint: g });
        }

        if c.bound_left.as_ref() != Some(&c.equation.lhs) || c.bound_right.as_ref() != Some(&c.equation.rhs) {
            out.push(ProofStep::Induct { target });
        }
        out
    }

    /// The instantiated constraint of rule `r` at `pos`, when it is a
    /// constraint over the goal's variables that the goal leaves undecided.
    fn guard_for(&self, target: usize, side: Side, pos: &[usize], r: usize) -> Option<String> {
        let c = &self.goals[target];
        let rule = self.program.rules().get(r)?.rename_apart(&c.used_names());
        let sub = c.side(side).at(pos)?;
        let gamma = match_term(&rule.lhs, &sub.prefix(rule.arity()))?;
        let psi = rule.constraint.subst(&gamma);
        if theory::is_true(&psi) {
            return None;
        }
        let vars: BTreeSet<_> = c.equation.vars();
        if !psi.vars().iter().all(|v| vars.contains(v)) || !psi.is_base_theory_term() {
            return None;
        }
        let phi = &c.equation.constraint;
        if self.solver.entails(phi, &psi).is_yes() || self.solver.entails(phi, &theory::not(psi.clone())).is_yes() {
            return None;
        }
        Some(psi.to_string())
    }
}
