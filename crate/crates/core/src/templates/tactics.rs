//! One- and two-sided matching.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::kernel::{check_axiom, Direction, HypRef, ProofState, ProofStep, Side, Using};
use crate::program::Program;
use crate::term::{Head, Symbol, Term};

use super::bank::{lemma_bank, Instantiation, RecursorLemma};
use super::emit::{emit_template_recursor_lemma, setup_steps, Planner};
use super::matching::{match_template, TemplateMatch};
use super::recursors::{recursor_rule, RECURSOR_NAMES};

/// Template matches whose context `t` instantiates.
pub fn term_matches(program: &Program, t: &Term) -> Vec<TemplateMatch> {
    let Head::Sym(Symbol::Fun(f)) = t.head() else {
        return Vec::new();
    };
    match_template(program, &f.name, None)
        .into_iter()
        .filter(|m| m.context.args().len() == t.args().len())
        .collect()
}

/// A side in recursor form: the recursor's name and its function argument.
fn recursor_form(t: &Term) -> Option<(&str, &Term)> {
    let Head::Sym(Symbol::Fun(f)) = t.head() else {
        return None;
    };
    let name = RECURSOR_NAMES.iter().find(|n| **n == &*f.name)?;
    (t.args().len() == 4).then(|| (*name, &t.args()[0]))
}

fn head_word(s: &str) -> &str {
    s.split_whitespace().next().unwrap_or("")
}

fn entry_heads(e: &RecursorLemma) -> (&'static str, &'static str) {
    let (l, r) = e.equation.split_once('~').expect("bank equations have two sides");
    (head_word(l), head_word(r))
}

/// The hole (`#1` or `#2`) used by the entry side headed by `rec`.
fn hole_of(e: &RecursorLemma, left: bool) -> Option<u8> {
    let (l, r) = e.equation.split_once('~')?;
    let side = if left { l } else { r };
    if side.contains("#1") {
        Some(1)
    } else if side.contains("#2") {
        Some(2)
    } else {
        None
    }
}

fn atomic(t: &Term) -> String {
    crate::print::atomic(t)
}

/// Result of two-sided matching when no entry applies directly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TwoSidedFailure {
    /// Entry heads fit but the function arguments differ; these lemmas would
    /// make the goal an instance.
    BridgeNeeded(Vec<String>),
    NoEntry(String),
}

impl core::fmt::Display for TwoSidedFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TwoSidedFailure::BridgeNeeded(ls) => write!(f, "bridge lemmas needed: {}", ls.join("; ")),
            TwoSidedFailure::NoEntry(why) => f.write_str(why),
        }
    }
}

impl Planner {
    fn hyp_count(&self) -> usize {
        self.state.hypotheses().len()
    }

    /// States and proves the template-recursor lemma for `m`, then rewrites
    /// `side` of goal `target` with it.
    pub fn to_recursor(&mut self, target: usize, side: Side, m: &TemplateMatch) -> Result<(), String> {
        for s in setup_steps(self.state.program(), m) {
            self.run(s)?;
        }
        let (eq, script) = emit_template_recursor_lemma(self.state.program(), self.state.solver(), m)?;
        let (h, a) = (self.hyp_count(), self.state.axioms().len());
        self.run(ProofStep::AddLemma { equation: eq.to_string() })?;
        for s in script {
            self.run(s.relocate(0, h, a))?;
        }
        self.run(ProofStep::Hypothesis {
            target,
            side,
            position: Vec::new(),
            hypothesis: HypRef::H(h),
            direction: Direction::LeftToRight,
            bind: Default::default(),
        })
    }

    /// Proves the bank entry under `inst` and returns its hypothesis index.
    pub fn prove_entry(&mut self, e: &RecursorLemma, inst: &Instantiation) -> Result<usize, String> {
        let (h, a) = (self.hyp_count(), self.state.axioms().len());
        for s in e.embedded(self.state.program(), inst, h, a)? {
            self.run(s)?;
        }
        Ok(h)
    }

    /// Proves `rec c i y a ~ rec g i y a` for a recursor `rec`, by induction
    /// with the synthesized symbols unfolded. Returns its hypothesis index.
    pub fn prove_bridge(&mut self, equation: &str) -> Result<usize, String> {
        let rec = head_word(equation);
        let (rb, rs) = match (
            recursor_rule(self.state.program(), rec, false),
            recursor_rule(self.state.program(), rec, true),
        ) {
            (Some(b), Some(s)) => (b, s),
            _ => return Err(alloc::format!("`{rec}` is not an installed recursor")),
        };
        let stop = if rec.ends_with("up") { "i > y" } else { "y < i" };
        let h = self.hyp_count();
        self.run(ProofStep::AddLemma { equation: equation.into() })?;
        self.run(ProofStep::Induct { target: 0 })?;
        self.run(ProofStep::Case {
            target: 0,
            constraint: stop.into(),
        })?;
        for r in [rb, rs] {
            for side in [Side::Left, Side::Right] {
                self.run(ProofStep::Simplify {
                    target: 0,
                    side,
                    position: Vec::new(),
                    using: Using::Rule(r),
                })?;
            }
            self.unfold(0, Side::Left);
            self.unfold(0, Side::Right);
            if self.first_of([
                ProofStep::Delete { target: 0 },
                ProofStep::HDelete {
                    target: 0,
                    hypothesis: HypRef::H(h),
                },
            ]) {
                continue;
            }
            self.rewrite_recursive_call(h)?;
            self.close_by_arithmetic(0)?;
        }
        Ok(h)
    }

    /// Rewrites the first recursor call on the left of goal 0 with `H(h)`.
    fn rewrite_recursive_call(&mut self, h: usize) -> Result<(), String> {
        let lhs = self.state.goals()[0].equation.lhs.clone();
        for p in lhs.positions().into_iter().filter(|p| !p.is_empty()) {
            if lhs.at(&p).and_then(recursor_form).is_none() {
                continue;
            }
            if self.try_run(ProofStep::Hypothesis {
                target: 0,
                side: Side::Left,
                position: p,
                hypothesis: HypRef::H(h),
                direction: Direction::LeftToRight,
                bind: Default::default(),
            }) {
                return Ok(());
            }
        }
        Err(alloc::format!("no recursive call to rewrite in {}", self.state.goals()[0]))
    }

    /// Closes a goal whose sides agree as polynomials over their
    /// non-arithmetic subterms, through a checked axiom.
    pub fn close_by_arithmetic(&mut self, target: usize) -> Result<(), String> {
        if self.try_run(ProofStep::Delete { target }) {
            return Ok(());
        }
        let eq = self.state.goals()[target].equation.clone();
        check_axiom(self.state.program(), self.state.solver(), &eq)?;
        let a = self.state.axioms().len();
        self.run(ProofStep::AssumeAxiom { equation: eq.to_string() })?;
        self.run(ProofStep::DischargeAxiom { axiom: a })?;
        self.run(ProofStep::HDelete {
            target,
            hypothesis: HypRef::A(a),
        })
    }

    /// Closes goal `target`, whose sides are both recursor applications,
    /// with a bank entry. Bridging lemmas are proved when `bridge` is set.
    pub fn close_with_bank(&mut self, target: usize, bridge: bool) -> Result<(), TwoSidedFailure> {
        let eq = self.state.goals()[target].equation.clone();
        let (Some((rl, fl)), Some((rr, fr))) = (recursor_form(&eq.lhs), recursor_form(&eq.rhs)) else {
            return Err(TwoSidedFailure::NoEntry(alloc::format!("{eq} is not between recursors")));
        };
        let (fl, fr) = (fl.clone(), fr.clone());
        let mut suggestions = Vec::new();
        let mut tried = false;
        for e in lemma_bank() {
            let (el, er) = entry_heads(e);
            let flipped = if (el, er) == (rl, rr) {
                false
            } else if (el, er) == (rr, rl) {
                true
            } else {
                continue;
            };
            tried = true;
            let (f_el, f_er) = if flipped { (&fr, &fl) } else { (&fl, &fr) };
            let inst = if e.holes == 0 {
                if fl != fr {
                    suggestions.push((e, bridge_lemmas(rl, &fl, rr, &fr)));
                    continue;
                }
                Instantiation::shared("")
            } else if fl == fr {
                Instantiation::shared(&atomic(&fl))
            } else {
                let mut inst = Instantiation::shared("");
                for (left, f) in [(true, f_el), (false, f_er)] {
                    match hole_of(e, left) {
                        Some(1) => inst.first = atomic(f),
                        _ => inst.second = atomic(f),
                    }
                }
                if inst.first.is_empty() || inst.second.is_empty() {
                    continue;
                }
                inst
            };
            if !self.axioms_hold(e, &inst) {
                continue;
            }
            let mut attempt = Planner::new(self.state.clone());
            if attempt.close_by_entry(target, e, &inst).is_ok() {
                self.state = attempt.state;
                self.script.extend(attempt.script);
                return Ok(());
            }
        }
        if bridge {
            for (e, lemmas) in &suggestions {
                let mut attempt = Planner::new(self.state.clone());
                if attempt.bridge_then_close(target, e, lemmas).is_ok() {
                    self.state = attempt.state;
                    self.script.extend(attempt.script);
                    return Ok(());
                }
            }
        }
        match suggestions.into_iter().next() {
            Some((_, lemmas)) => Err(TwoSidedFailure::BridgeNeeded(lemmas.into_iter().map(|(s, _)| s).collect())),
            None if tried => Err(TwoSidedFailure::NoEntry(alloc::format!("no bank entry closes {eq}"))),
            None => Err(TwoSidedFailure::NoEntry(alloc::format!("no bank entry relates {rl} and {rr}"))),
        }
    }

    fn axioms_hold(&self, e: &RecursorLemma, inst: &Instantiation) -> bool {
        let program = self.state.program();
        match e.axiom_equations(program, inst) {
            Ok(axs) => axs.iter().all(|a| check_axiom(program, self.state.solver(), a).is_ok()),
            Err(_) => false,
        }
    }

    fn close_by_entry(&mut self, target: usize, e: &RecursorLemma, inst: &Instantiation) -> Result<(), String> {
        let h = self.prove_entry(e, inst)?;
        self.run(ProofStep::HDelete {
            target,
            hypothesis: HypRef::H(h),
        })
    }

    /// Proves the bridging lemmas, rewrites the side that needs it, and
    /// closes with the entry.
    fn bridge_then_close(&mut self, target: usize, e: &RecursorLemma, lemmas: &[(String, Side)]) -> Result<(), String> {
        let mut proved = Vec::new();
        for (text, side) in lemmas {
            proved.push((self.prove_bridge(text)?, *side));
        }
        let eq = self.state.goals()[target].equation.clone();
        for (h, side) in proved {
            let t = if side == Side::Left { &eq.lhs } else { &eq.rhs };
            // The bridge is `rec c … ~ rec g …`; rewrite the side holding `g`.
            let lemma = self.state.hypotheses()[h].clone();
            if recursor_form(t).map(|(_, f)| f) == recursor_form(&lemma.rhs).map(|(_, f)| f) {
                self.run(ProofStep::Hypothesis {
                    target,
                    side,
                    position: Vec::new(),
                    hypothesis: HypRef::H(h),
                    direction: Direction::RightToLeft,
                    bind: Default::default(),
                })?;
            }
        }
        self.close_by_entry(target, e, &Instantiation::shared(""))
    }

    /// One-sided matching: rewrite `side` to recursor form with `m`, then
    /// across the bank entry `e` to the other recursor.
    pub fn one_sided(&mut self, target: usize, side: Side, m: &TemplateMatch, e: &RecursorLemma) -> Result<(), String> {
        self.to_recursor(target, side, m)?;
        let t = self.state.goals()[target].side(side).clone();
        let (rec, f) = recursor_form(&t).ok_or("side is not in recursor form")?;
        let (el, er) = entry_heads(e);
        let direction = if el == rec {
            Direction::LeftToRight
        } else if er == rec {
            Direction::RightToLeft
        } else {
            return Err(alloc::format!("entry {} does not mention {rec}", e.id));
        };
        let inst = Instantiation::shared(&atomic(f));
        if e.holes > 0 && !self.axioms_hold(e, &inst) {
            return Err(alloc::format!("axioms of {} fail for {}", e.id, inst.first));
        }
        let h = self.prove_entry(e, &inst)?;
        self.run(ProofStep::Hypothesis {
            target,
            side,
            position: Vec::new(),
            hypothesis: HypRef::H(h),
            direction,
            bind: Default::default(),
        })
    }
}

/// Bridging lemmas `rec c i y a ~ rec g i y a` moving the side with the
/// synthesized (or otherwise differing) function `g` to the common `c`.
fn bridge_lemmas(rl: &str, fl: &Term, rr: &str, fr: &Term) -> Vec<(String, Side)> {
    let synthesized = |f: &Term| matches!(f.head(), Head::Sym(Symbol::Fun(g)) if g.name.starts_with("F_"));
    let (c, g) = if synthesized(fl) && !synthesized(fr) { (fr, fl) } else { (fl, fr) };
    let (c, g) = (atomic(c), atomic(g));
    let mk = |rec: &str| alloc::format!("{rec} {c} i y a ~ {rec} {g} i y a");
    let side_with_g = if atomic(fl) == g { Side::Left } else { Side::Right };
    let mut out = alloc::vec![(mk(rl), Side::Left), (mk(rr), Side::Right)];
    // Only the side holding `g` is rewritten; the other lemma is the symmetric suggestion.
    for (_, s) in out.iter_mut() {
        if *s != side_with_g {
            *s = side_with_g.other();
        }
    }
    out
}

/// Plans two-sided matching on goal `target`: both sides to recursor form,
/// then a bank entry (with bridges if `bridge`). Returns the steps.
pub fn tactic_two_sided(
    state: &ProofState,
    target: usize,
    left: &TemplateMatch,
    right: &TemplateMatch,
    bridge: bool,
) -> Result<Vec<ProofStep>, TwoSidedFailure> {
    let mut p = Planner::new(state.clone());
    p.to_recursor(target, Side::Left, left).map_err(TwoSidedFailure::NoEntry)?;
    p.to_recursor(target, Side::Right, right).map_err(TwoSidedFailure::NoEntry)?;
    p.close_with_bank(target, bridge)?;
    Ok(p.script)
}

/// Plans one-sided matching on `side` of goal `target`. The residual goal stays open.
pub fn tactic_one_sided(
    state: &ProofState,
    target: usize,
    side: Side,
    m: &TemplateMatch,
    e: &RecursorLemma,
) -> Result<Vec<ProofStep>, String> {
    let mut p = Planner::new(state.clone());
    p.one_sided(target, side, m, e)?;
    Ok(p.script)
}

/// Entries whose statement mentions the recursor of `m`.
pub fn entries_for(m: &TemplateMatch) -> Vec<&'static RecursorLemma> {
    let rec = m.kind.recursor();
    lemma_bank()
        .iter()
        .filter(|e| {
            let (l, r) = entry_heads(e);
            l == rec || r == rec
        })
        .collect()
}

/// Rewrites goal `target` forward on both sides: rules of user symbols
/// whose constraints φ decides, and calculations on ground subterms.
pub(crate) fn forward(p: &mut Planner, target: usize, fuel: usize) {
    let recursor = |t: &Term| t.contains_symbol(&|s| s.fun_name().is_some_and(|n| RECURSOR_NAMES.contains(&n)));
    for side in [Side::Left, Side::Right] {
        let mut left = fuel;
        'outer: while left > 0 {
            left -= 1;
            let t = p.state.goals()[target].side(side).clone();
            for pos in t.positions() {
                let sub = t.at(&pos).expect("own position");
                if sub.is_ground() && sub.is_base_theory_term() && !sub.is_value() && sub.theory_op().is_some() {
                    if p.try_run(ProofStep::Simplify {
                        target,
                        side,
                        position: pos.clone(),
                        using: Using::Calc { fresh: None },
                    }) {
                        continue 'outer;
                    }
                }
            }
            if recursor(&t) {
                break;
            }
            for (pos, rule) in crate::rewrite::candidate_positions(p.state.program(), &t) {
                let Some(r) = rule else { continue };
                if p.try_run(ProofStep::Simplify {
                    target,
                    side,
                    position: pos,
                    using: Using::Rule(r),
                }) {
                    continue 'outer;
                }
            }
            break;
        }
    }
}
