//! Validity, satisfiability and entailment of constraints.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lia::{self, LiaResult, Lin};
use super::poly::{Monomial, Poly};
use super::{eval_with, smtlib, Value};
use crate::term::{EqSort, Head, Substitution, Term, TheoryOp, Type, Var};

/// Answer to a validity or entailment query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    /// Falsifying assignment, checked by evaluation.
    No(Substitution),
    Unknown,
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    /// Satisfying assignment, checked by evaluation.
    Sat(Substitution),
    Unsat,
    Unknown,
}

/// What an external SMT process reported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExternalAnswer {
    /// `sat`, with the raw text of the `(get-model)` response.
    Sat(String),
    Unsat,
    Unknown,
}

/// A fallback decision procedure speaking SMT-LIB 2.
pub trait ExternalSolver: Send + Sync {
    fn run(&self, script: &str) -> ExternalAnswer;
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Atom {
    /// p ≥ 0
    Ge,
    /// p = 0
    Eq,
}

#[derive(Clone, Debug)]
enum Formula {
    Const(bool),
    Lit(Atom, Poly),
    Bool(Arc<str>, bool),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

struct Unsupported;

fn poly(t: &Term) -> Result<Poly, Unsupported> {
    Poly::from_term(t).map_err(|_| Unsupported)
}

fn diff(a: &Term, b: &Term) -> Result<Poly, Unsupported> {
    poly(a)?.sub(&poly(b)?).map_err(|_| Unsupported)
}

fn shift(p: Poly, c: i128) -> Result<Poly, Unsupported> {
    p.add(&Poly::constant(c)).map_err(|_| Unsupported)
}

fn neg(p: Poly) -> Result<Poly, Unsupported> {
    p.scale(-1).map_err(|_| Unsupported)
}

/// NNF of `t` (negated when `positive` is false).
fn to_formula(t: &Term, positive: bool) -> Result<Formula, Unsupported> {
    let args = t.args();
    let op = match t.head() {
        Head::Var(v) if args.is_empty() && v.ty == Type::BOOL => {
            return Ok(Formula::Bool(v.name.clone(), positive));
        }
        Head::Sym(crate::term::Symbol::Theory(op)) => *op,
        _ => return Err(Unsupported),
    };
    use TheoryOp::*;
    Ok(match (op, args.len()) {
        (True, 0) => Formula::Const(positive),
        (False, 0) => Formula::Const(!positive),
        (Not, 1) => to_formula(&args[0], !positive)?,
        (And, 2) | (Or, 2) => {
            let parts = alloc::vec![to_formula(&args[0], positive)?, to_formula(&args[1], positive)?];
            if (op == And) == positive {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            }
        }
        (Eq(EqSort::Int), 2) | (Ne(EqSort::Int), 2) => {
            let p = diff(&args[0], &args[1])?;
            if matches!(op, Eq(_)) == positive {
                Formula::Lit(Atom::Eq, p)
            } else {
                // p ≠ 0  ⇔  p - 1 ≥ 0 ∨ -p - 1 ≥ 0
                Formula::Or(alloc::vec![
                    Formula::Lit(Atom::Ge, shift(p.clone(), -1)?),
                    Formula::Lit(Atom::Ge, shift(neg(p)?, -1)?),
                ])
            }
        }
        (Eq(EqSort::Bool), 2) | (Ne(EqSort::Bool), 2) => {
            let same = matches!(op, Eq(_)) == positive;
            let (a, b) = (&args[0], &args[1]);
            Formula::Or(alloc::vec![
                Formula::And(alloc::vec![to_formula(a, true)?, to_formula(b, same)?]),
                Formula::And(alloc::vec![to_formula(a, false)?, to_formula(b, !same)?]),
            ])
        }
        (Lt | Le | Gt | Ge, 2) => {
            // Normalize to `p ≥ 0` under the requested polarity.
            let (a, b) = (&args[0], &args[1]);
            let (p, strict) = match (op, positive) {
                (Ge, true) | (Lt, false) => (diff(a, b)?, false),
                (Gt, true) | (Le, false) => (diff(a, b)?, true),
                (Le, true) | (Gt, false) => (diff(b, a)?, false),
                _ => (diff(b, a)?, true),
            };
            Formula::Lit(Atom::Ge, if strict { shift(p, -1)? } else { p })
        }
        _ => return Err(Unsupported),
    })
}

#[derive(Clone, Default)]
struct Branch {
    ints: Vec<(Atom, Poly)>,
    bools: BTreeMap<Arc<str>, bool>,
}

enum BranchOutcome {
    Sat(BTreeMap<Arc<str>, Value>),
    Unsat,
    Unknown,
}

/// Decision procedure for quantifier-free integer/boolean constraints.
#[derive(Clone)]
pub struct Solver {
    box_bound: i128,
    branch_limit: usize,
    external: Option<Arc<dyn ExternalSolver>>,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new()
    }
}

impl core::fmt::Debug for Solver {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Solver")
            .field("box_bound", &self.box_bound)
            .field("external", &self.external.is_some())
            .finish()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            box_bound: 64,
            branch_limit: 4096,
            external: None,
        }
    }

    pub fn with_external(mut self, ext: Arc<dyn ExternalSolver>) -> Self {
        self.external = Some(ext);
        self
    }

    /// Half-width of the enumeration box used to search for counterexamples.
    pub fn with_box(mut self, bound: i128) -> Self {
        self.box_bound = bound;
        self
    }

    pub fn has_external(&self) -> bool {
        self.external.is_some()
    }

    /// Is every assignment a model of `phi`?
    pub fn is_valid(&self, phi: &Term) -> Verdict {
        match self.satisfiable(&super::not(phi.clone())) {
            SatResult::Sat(m) => Verdict::No(m),
            SatResult::Unsat => Verdict::Yes,
            SatResult::Unknown => Verdict::Unknown,
        }
    }

    /// `phi ⊨ psi`.
    pub fn entails(&self, phi: &Term, psi: &Term) -> Verdict {
        if super::is_true(psi) || phi == psi {
            return Verdict::Yes;
        }
        if super::conjuncts(phi).contains(psi) {
            return Verdict::Yes;
        }
        self.is_valid(&super::implies(phi.clone(), psi.clone()))
    }

    /// `phi ⊨ a = b` for theory terms of equal sort; syntactic and polynomial
    /// equality short-circuit.
    pub fn equal_under(&self, phi: &Term, a: &Term, b: &Term) -> bool {
        if a == b {
            return true;
        }
        if a.ty() != b.ty() {
            return false;
        }
        if let (Ok(p), Ok(q)) = (super::poly::Poly::from_term(a), super::poly::Poly::from_term(b)) {
            if p == q {
                return true;
            }
        }
        self.entails(phi, &super::eq(a.clone(), b.clone())).is_yes()
    }

    pub fn satisfiable(&self, psi: &Term) -> SatResult {
        if !super::is_constraint(psi) {
            return SatResult::Unknown;
        }
        let vars = psi.vars();
        let check = |model: &BTreeMap<Arc<str>, Value>| -> Option<Substitution> {
            let lookup = |v: &Var| -> Option<Value> {
                Some(
                    model
                        .get(&v.name)
                        .copied()
                        .unwrap_or(if v.ty == Type::BOOL { Value::Bool(false) } else { Value::Int(0) }),
                )
            };
            match eval_with(psi, &lookup) {
                Ok(Value::Bool(true)) => Some(
                    vars.iter()
                        .map(|v| (v.clone(), lookup(v).expect("total lookup").to_term()))
                        .collect(),
                ),
                _ => None,
            }
        };

        let internal = match to_formula(psi, true) {
            Ok(f) => self.search(f),
            Err(Unsupported) => BranchOutcome::Unknown,
        };
        match internal {
            BranchOutcome::Unsat => return SatResult::Unsat,
            BranchOutcome::Sat(model) => {
                if let Some(s) = check(&model) {
                    return SatResult::Sat(s);
                }
            }
            BranchOutcome::Unknown => {}
        }
        if let Some(m) = self.enumerate(psi, &vars) {
            if let Some(s) = check(&m) {
                return SatResult::Sat(s);
            }
        }
        if let Some(ext) = &self.external {
            let script = smtlib::validity_script(&super::not(psi.clone()));
            match ext.run(&script) {
                ExternalAnswer::Unsat => return SatResult::Unsat,
                ExternalAnswer::Sat(text) => {
                    if let Some(model) = smtlib::parse_model(&text) {
                        if let Some(s) = check(&model) {
                            return SatResult::Sat(s);
                        }
                    }
                }
                ExternalAnswer::Unknown => {}
            }
        }
        SatResult::Unknown
    }

    /// Depth-first disjunct expansion.
    fn search(&self, f: Formula) -> BranchOutcome {
        let mut budget = self.branch_limit;
        let mut saw_unknown = false;
        let mut stack: Vec<(Vec<Formula>, Branch)> = alloc::vec![(alloc::vec![f], Branch::default())];
        while let Some((mut todo, mut branch)) = stack.pop() {
            let mut dead = false;
            while let Some(item) = todo.pop() {
                match item {
                    Formula::Const(true) => {}
                    Formula::Const(false) => {
                        dead = true;
                        break;
                    }
                    Formula::Lit(a, p) => branch.ints.push((a, p)),
                    Formula::Bool(name, pol) => {
                        if branch.bools.insert(name.clone(), pol) == Some(!pol) {
                            dead = true;
                            break;
                        }
                    }
                    Formula::And(parts) => todo.extend(parts),
                    Formula::Or(parts) => {
                        if budget < parts.len() {
                            return BranchOutcome::Unknown;
                        }
                        budget -= parts.len();
                        for p in parts.into_iter().rev() {
                            let mut t = todo.clone();
                            t.push(p);
                            stack.push((t, branch.clone()));
                        }
                        dead = true;
                        break;
                    }
                }
            }
            if dead {
                continue;
            }
            match solve_branch(&branch) {
                BranchOutcome::Sat(m) => return BranchOutcome::Sat(m),
                BranchOutcome::Unsat => {}
                BranchOutcome::Unknown => saw_unknown = true,
            }
        }
        if saw_unknown {
            BranchOutcome::Unknown
        } else {
            BranchOutcome::Unsat
        }
    }

    /// Look for a model inside the box: exhaustively when small, else by seeded sampling.
    fn enumerate(&self, psi: &Term, vars: &BTreeSet<Var>) -> Option<BTreeMap<Arc<str>, Value>> {
        let vars: Vec<&Var> = vars.iter().collect();
        let b = self.box_bound;
        let width = (2 * b + 1) as u128;
        let mut total: u128 = 1;
        for v in &vars {
            total = total.saturating_mul(if v.ty == Type::BOOL { 2 } else { width });
        }
        let holds = |m: &BTreeMap<Arc<str>, Value>| matches!(eval_with(psi, &|v: &Var| m.get(&v.name).copied()), Ok(Value::Bool(true)));
        if total <= 300_000 {
            let mut idx = alloc::vec![0u128; vars.len()];
            loop {
                let m: BTreeMap<Arc<str>, Value> = vars
                    .iter()
                    .zip(&idx)
                    .map(|(v, &i)| {
                        let val = if v.ty == Type::BOOL {
                            Value::Bool(i == 1)
                        } else {
                            // 0, 1, -1, 2, -2, … so small models come first
                            let k = i.div_ceil(2) as i128;
                            Value::Int(if i % 2 == 1 { k } else { -k })
                        };
                        (v.name.clone(), val)
                    })
                    .collect();
                if holds(&m) {
                    return Some(m);
                }
                let mut pos = 0;
                loop {
                    if pos == vars.len() {
                        return None;
                    }
                    idx[pos] += 1;
                    let lim = if vars[pos].ty == Type::BOOL { 2 } else { width };
                    if idx[pos] < lim {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..50_000 {
            let m: BTreeMap<Arc<str>, Value> = vars
                .iter()
                .map(|v| {
                    let val = if v.ty == Type::BOOL {
                        Value::Bool(rng.random())
                    } else {
                        Value::Int(rng.random_range(-b..=b))
                    };
                    (v.name.clone(), val)
                })
                .collect();
            if holds(&m) {
                return Some(m);
            }
        }
        None
    }
}

/// Values forced by single-variable atoms, substituted until nothing changes.
/// `None` when some atom becomes a false ground fact.
fn propagate(branch: &Branch) -> Option<(Branch, BTreeMap<Arc<str>, i128>)> {
    let mut fixed: BTreeMap<Arc<str>, i128> = BTreeMap::new();
    let mut b = branch.clone();
    loop {
        let mut lo: BTreeMap<Arc<str>, i128> = BTreeMap::new();
        let mut hi: BTreeMap<Arc<str>, i128> = BTreeMap::new();
        let mut found = BTreeMap::new();
        for (a, p) in &b.ints {
            if let Some(c) = p.as_constant() {
                let ok = match a {
                    Atom::Ge => c >= 0,
                    Atom::Eq => c == 0,
                };
                if !ok {
                    return None;
                }
                continue;
            }
            // c·x + k with a single linear monomial
            let mut terms = p.terms().filter(|(m, _)| m.degree() > 0);
            let (Some((m, c)), None) = (terms.next(), terms.next()) else {
                continue;
            };
            let Some(x) = m.as_var() else { continue };
            let k = p.constant_part();
            if k == i128::MIN || c == i128::MIN {
                continue;
            }
            match a {
                Atom::Eq => {
                    if k % c != 0 {
                        return None;
                    }
                    found.insert(x.clone(), -k / c);
                }
                // c·x ≥ -k
                Atom::Ge if c > 0 => {
                    let v = (-k).div_euclid(c) + i128::from((-k).rem_euclid(c) != 0);
                    let e = lo.entry(x.clone()).or_insert(v);
                    *e = (*e).max(v);
                }
                Atom::Ge => {
                    let v = k.div_euclid(-c);
                    let e = hi.entry(x.clone()).or_insert(v);
                    *e = (*e).min(v);
                }
            }
        }
        for (x, l) in &lo {
            if let Some(h) = hi.get(x) {
                if l > h {
                    return None;
                }
                if l == h {
                    found.insert(x.clone(), *l);
                }
            }
        }
        if found.is_empty() {
            return Some((b, fixed));
        }
        let mut ints = Vec::with_capacity(b.ints.len());
        for (a, p) in &b.ints {
            match p.substitute(&found) {
                Ok(q) => ints.push((*a, q)),
                Err(_) => return Some((b, fixed)),
            }
        }
        b.ints = ints;
        fixed.extend(found);
    }
}

/// Linearize a branch (non-linear monomials become fresh unknowns) and solve.
fn solve_branch(branch: &Branch) -> BranchOutcome {
    let Some((reduced, fixed)) = propagate(branch) else {
        return BranchOutcome::Unsat;
    };
    match solve_linearized(&reduced) {
        BranchOutcome::Sat(mut m) => {
            for (x, v) in fixed {
                m.insert(x, Value::Int(v));
            }
            BranchOutcome::Sat(m)
        }
        other => other,
    }
}

fn solve_linearized(branch: &Branch) -> BranchOutcome {
    let mut ids: BTreeMap<Monomial, usize> = BTreeMap::new();
    let mut extra: Vec<Lin> = Vec::new();
    let to_lin = |p: &Poly, ids: &mut BTreeMap<Monomial, usize>, extra: &mut Vec<Lin>| -> Lin {
        let mut l = Lin::default();
        for (m, c) in p.terms() {
            if m.degree() == 0 {
                l.constant = c;
                continue;
            }
            let next = ids.len();
            let id = *ids.entry(m.clone()).or_insert_with(|| {
                if m.degree() > 1 && m.is_square() {
                    let mut nonneg = Lin::default();
                    nonneg.coeffs.insert(next, 1);
                    extra.push(nonneg);
                }
                next
            });
            l.coeffs.insert(id, c);
        }
        l
    };
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    for (a, p) in &branch.ints {
        let l = to_lin(p, &mut ids, &mut extra);
        match a {
            Atom::Ge => ineqs.push(l),
            Atom::Eq => eqs.push(l),
        }
    }
    ineqs.extend(extra);
    let nonlinear = ids.keys().any(|m| m.degree() > 1);
    match lia::solve(ineqs, eqs) {
        LiaResult::Unsat => BranchOutcome::Unsat,
        LiaResult::Unknown => BranchOutcome::Unknown,
        LiaResult::Sat(model) => {
            let mut out: BTreeMap<Arc<str>, Value> = BTreeMap::new();
            for (m, id) in &ids {
                if let Some(v) = m.as_var() {
                    out.insert(v.clone(), Value::Int(model.get(id).copied().unwrap_or(0)));
                }
            }
            for (b, v) in &branch.bools {
                out.insert(b.clone(), Value::Bool(*v));
            }
            if nonlinear {
                // The abstraction's model may disagree with the real products;
                // the caller's evaluation check decides.
                let env = |name: &str| out.get(name).and_then(|v| v.as_int()).or(Some(0));
                let ok = branch.ints.iter().all(|(a, p)| match (a, p.eval(&env)) {
                    (Atom::Ge, Some(v)) => v >= 0,
                    (Atom::Eq, Some(v)) => v == 0,
                    _ => false,
                });
                if !ok {
                    return BranchOutcome::Unknown;
                }
            }
            BranchOutcome::Sat(out)
        }
    }
}
