//! Constrained higher-order recursive path ordering.
//!
//! Symbols are ranked by a precedence derived from the call graph; each
//! defined symbol may carry a linear measure over its integer arguments which
//! is compared before falling back to lexicographic comparison of arguments.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::program::{Program, Rule};
use crate::term::{Head, Symbol, Term, Type};
use crate::theory::{self, Solver};

/// Fixed ranks of the recursors. User-defined symbols rank above all of them.
pub const RECURSOR_RANKS: [(&str, u32); 4] = [("tailup", 5), ("taildn", 4), ("recup", 3), ("recdn", 2)];
const SYNTH_RANK: u32 = 1;
const USER_RANK: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    Gt,
    Geq,
    Unknown,
}

/// `max(sum coeff * arg + constant, 0)` over argument positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measure {
    pub coeffs: Vec<(usize, i128)>,
    pub constant: i128,
}

impl Measure {
    fn apply(&self, args: &[Term]) -> Option<Term> {
        let mut acc = Term::int(self.constant);
        for &(i, c) in &self.coeffs {
            let a = args.get(i)?;
            if *a.ty() != Type::INT || !a.is_base_theory_term() {
                return None;
            }
            acc = match c {
                1 => theory::add(acc, a.clone()),
                -1 => theory::sub(acc, a.clone()),
                _ => theory::add(acc, theory::mul(Term::int(c), a.clone())),
            };
        }
        Some(acc)
    }

    /// Candidates for a symbol with the given integer argument positions,
    /// simplest first.
    pub fn candidates(int_args: &[usize]) -> Vec<Measure> {
        let mut out = Vec::new();
        for c in [0, 1] {
            for &j in int_args {
                for s in [1, -1] {
                    out.push(Measure {
                        coeffs: alloc::vec![(j, s)],
                        constant: c,
                    });
                }
            }
        }
        for c in [0, 1] {
            for (n, &j) in int_args.iter().enumerate() {
                for &k in &int_args[n + 1..] {
                    for (sj, sk) in [(1, -1), (-1, 1), (1, 1), (-1, -1)] {
                        out.push(Measure {
                            coeffs: alloc::vec![(j, sj), (k, sk)],
                            constant: c,
                        });
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "max(")?;
        for (n, &(i, c)) in self.coeffs.iter().enumerate() {
            let sign = if c < 0 {
                "-"
            } else if n > 0 {
                "+"
            } else {
                ""
            };
            if n > 0 {
                write!(f, " {sign} ")?;
            } else {
                write!(f, "{sign}")?;
            }
            let mag = c.unsigned_abs();
            if mag != 1 {
                write!(f, "{mag}*")?;
            }
            write!(f, "arg{}", i + 1)?;
        }
        match self.constant {
            0 => {}
            c if c > 0 => write!(f, " + {c}")?,
            c => write!(f, " - {}", c.unsigned_abs())?,
        }
        write!(f, ", 0)")
    }
}

/// An obligation `lhs ≻ rhs [constraint]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Requirement {
    pub lhs: Term,
    pub rhs: Term,
    pub constraint: Term,
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} > {} [{}]", self.lhs, self.rhs, self.constraint)
    }
}

#[derive(Clone)]
pub struct Ordering {
    ranks: BTreeMap<Arc<str>, u32>,
    measures: BTreeMap<Arc<str>, Measure>,
    solver: Solver,
}

impl fmt::Debug for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ordering")
            .field("ranks", &self.ranks)
            .field("measures", &self.measures)
            .finish()
    }
}

fn callees(rule: &Rule) -> BTreeSet<Arc<str>> {
    let mut out = BTreeSet::new();
    for s in rule.rhs.symbols() {
        if let Symbol::Fun(g) = s {
            out.insert(g.name);
        }
    }
    out
}

impl Ordering {
    /// Precedence and measures for `program`.
    pub fn new(program: &Program, solver: &Solver) -> Ordering {
        let mut ord = Ordering {
            ranks: ranks(program),
            measures: BTreeMap::new(),
            solver: solver.clone(),
        };
        let mut defined: Vec<Arc<str>> = program
            .symbols()
            .iter()
            .filter(|f| program.is_defined(&f.name))
            .map(|f| f.name.clone())
            .collect();
        defined.sort_by_key(|f| ord.rank(f));
        for f in defined {
            let rules: Vec<&Rule> = program.rules_for(&f).collect();
            if rules.iter().all(|r| ord.gt(&r.lhs, &r.rhs, &r.constraint)) {
                continue;
            }
            let k = rules[0].arity();
            let Some(sym) = program.lookup(&f) else { continue };
            let int_args: Vec<usize> = sym
                .ty()
                .uncurry()
                .0
                .iter()
                .take(k)
                .enumerate()
                .filter(|(_, t)| ***t == Type::INT)
                .map(|(i, _)| i)
                .collect();
            for m in Measure::candidates(&int_args) {
                ord.measures.insert(f.clone(), m);
                if rules.iter().all(|r| ord.gt(&r.lhs, &r.rhs, &r.constraint)) {
                    break;
                }
                ord.measures.remove(&f);
            }
        }
        ord
    }

    pub fn rank(&self, name: &str) -> u32 {
        self.ranks.get(name).copied().unwrap_or(0)
    }

    pub fn measure(&self, name: &str) -> Option<&Measure> {
        self.measures.get(name)
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    /// Compares `s` and `t` for all instances respecting `phi`.
    pub fn compare(&self, s: &Term, t: &Term, phi: &Term) -> Cmp {
        let cx = Cx::new(self, phi);
        if cx.gt(s, t) {
            Cmp::Gt
        } else if cx.eq(s, t) {
            Cmp::Geq
        } else {
            Cmp::Unknown
        }
    }

    pub fn gt(&self, s: &Term, t: &Term, phi: &Term) -> bool {
        Cx::new(self, phi).gt(s, t)
    }

    pub fn geq(&self, s: &Term, t: &Term, phi: &Term) -> bool {
        self.compare(s, t, phi) != Cmp::Unknown
    }

    /// Indices of user rules not strictly oriented, followed by any failing
    /// calculation rules reported by operator spelling.
    pub fn orient_rules(&self, program: &Program) -> (Vec<usize>, Vec<String>) {
        let rules = program
            .rules()
            .iter()
            .enumerate()
            .filter(|(_, r)| !self.gt(&r.lhs, &r.rhs, &r.constraint))
            .map(|(i, _)| i)
            .collect();
        let calc = Program::calc_rules()
            .into_iter()
            .filter(|c| !self.gt(&c.lhs, &c.rhs, &c.constraint))
            .map(|c| c.op.spelling())
            .collect();
        (rules, calc)
    }

    pub fn discharge(&self, req: &Requirement) -> bool {
        self.gt(&req.lhs, &req.rhs, &req.constraint)
    }
}

/// Minimum ranks raised along call-graph and `prec` edges.
fn ranks(program: &Program) -> BTreeMap<Arc<str>, u32> {
    let fixed: BTreeMap<&str, u32> = RECURSOR_RANKS.iter().copied().collect();
    let mut ranks: BTreeMap<Arc<str>, u32> = BTreeMap::new();
    let mut edges: BTreeSet<(Arc<str>, Arc<str>)> = BTreeSet::new();
    for f in program.symbols() {
        let base = if let Some(&r) = fixed.get(&*f.name) {
            r
        } else if program.synthesized.contains(&f.name) {
            SYNTH_RANK
        } else if program.is_defined(&f.name) {
            USER_RANK
        } else {
            0
        };
        ranks.insert(f.name.clone(), base);
    }
    for r in program.rules() {
        for g in callees(r) {
            if g != r.root().name {
                edges.insert((r.root().name.clone(), g));
            }
        }
    }
    edges.extend(program.precedence.iter().cloned());
    let names: Vec<Arc<str>> = ranks.keys().cloned().collect();
    let idx: BTreeMap<&Arc<str>, usize> = names.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let n = names.len();
    let mut reach = alloc::vec![alloc::vec![false; n]; n];
    for (f, g) in &edges {
        if let (Some(&i), Some(&j)) = (idx.get(f), idx.get(g)) {
            reach[i][j] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    // Edges inside a strongly connected component impose nothing.
    let acyclic: Vec<(usize, usize)> = edges
        .iter()
        .filter_map(|(f, g)| Some((*idx.get(f)?, *idx.get(g)?)))
        .filter(|&(i, j)| !reach[j][i])
        .collect();
    for _ in 0..=n {
        let mut changed = false;
        for &(i, j) in &acyclic {
            if fixed.contains_key(&*names[i]) {
                continue;
            }
            let need = ranks[&names[j]] + 1;
            let cur = ranks.get_mut(&names[i]).expect("known symbol");
            if *cur < need {
                *cur = need;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    ranks
}

struct Cx<'a> {
    ord: &'a Ordering,
    phi: &'a Term,
    gt_memo: RefCell<BTreeMap<(Term, Term), bool>>,
    sat_memo: RefCell<BTreeMap<Term, bool>>,
}

fn sym_rank(ord: &Ordering, s: &Symbol) -> u32 {
    match s {
        Symbol::Fun(f) => ord.rank(&f.name),
        _ => 0,
    }
}

fn has_non_theory_symbol(t: &Term) -> bool {
    t.contains_symbol(&|s| !s.is_theory())
}

impl<'a> Cx<'a> {
    fn new(ord: &'a Ordering, phi: &'a Term) -> Self {
        Cx {
            ord,
            phi,
            gt_memo: RefCell::new(BTreeMap::new()),
            sat_memo: RefCell::new(BTreeMap::new()),
        }
    }

    fn entails(&self, psi: Term) -> bool {
        if let Some(&b) = self.sat_memo.borrow().get(&psi) {
            return b;
        }
        let b = self.ord.solver.entails(self.phi, &psi).is_yes();
        self.sat_memo.borrow_mut().insert(psi, b);
        b
    }

    /// Equal for every instance respecting the constraint.
    fn eq(&self, s: &Term, t: &Term) -> bool {
        if s == t {
            return true;
        }
        if s.ty() != t.ty() {
            return false;
        }
        if s.is_base_theory_term() && t.is_base_theory_term() {
            return self.entails(theory::eq(s.clone(), t.clone()));
        }
        s.head() == t.head() && s.args().len() == t.args().len() && s.args().iter().zip(t.args()).all(|(a, b)| self.eq(a, b))
    }

    fn geq(&self, s: &Term, t: &Term) -> bool {
        self.eq(s, t) || self.gt(s, t)
    }

    fn gt(&self, s: &Term, t: &Term) -> bool {
        let key = (s.clone(), t.clone());
        if let Some(&b) = self.gt_memo.borrow().get(&key) {
            return b;
        }
        let b = self.gt_uncached(s, t);
        self.gt_memo.borrow_mut().insert(key, b);
        b
    }

    fn gt_uncached(&self, s: &Term, t: &Term) -> bool {
        if t.is_base_theory_term() && self.theory_clause(s, t) {
            return true;
        }
        // Subterm clause: an argument or a proper head prefix of `s`.
        let n = s.args().len();
        if s.args().iter().any(|a| self.geq(a, t)) {
            return true;
        }
        if (0..n).any(|k| self.geq(&s.prefix(k), t)) {
            return true;
        }
        if n == 0 {
            return false;
        }
        match (s.head(), t.head()) {
            (Head::Sym(f), Head::Sym(g)) if f != g => {
                if sym_rank(self.ord, f) > sym_rank(self.ord, g) && !matches!(f, Symbol::Theory(_)) {
                    return t.args().iter().all(|tj| self.gt(s, tj));
                }
            }
            (hs, ht) if hs == ht && s.args().len() == t.args().len() => {
                return self.same_head(s, t);
            }
            _ => {}
        }
        if let Head::Var(_) = t.head() {
            let m = t.args().len();
            if m > 0 {
                return self.gt(s, &t.prefix(m - 1)) && self.gt(s, &t.args()[m - 1]);
            }
        }
        false
    }

    fn theory_clause(&self, s: &Term, t: &Term) -> bool {
        if has_non_theory_symbol(s) {
            return true;
        }
        if !s.is_base_theory_term() || s.ty() != t.ty() {
            return false;
        }
        let s_is_atom = s.is_value() || s.as_var().is_some();
        let t_is_atom = t.is_value() || t.as_var().is_some();
        if !s_is_atom && t_is_atom && self.entails(theory::eq(s.clone(), t.clone())) {
            return true;
        }
        *s.ty() == Type::INT && self.entails(theory::and(theory::gt(s.clone(), t.clone()), theory::ge(s.clone(), Term::int(0))))
    }

    fn same_head(&self, s: &Term, t: &Term) -> bool {
        let measure = match s.head() {
            Head::Sym(Symbol::Fun(f)) => self.ord.measures.get(&f.name),
            _ => None,
        };
        let all_args = |from: usize| t.args()[from..].iter().all(|tj| self.gt(s, tj));
        if let Some(m) = measure {
            let (Some(ms), Some(mt)) = (m.apply(s.args()), m.apply(t.args())) else {
                return false;
            };
            let dec = theory::and(theory::ge(ms.clone(), Term::int(1)), theory::gt(ms.clone(), mt.clone()));
            if self.entails(dec) && all_args(0) {
                return true;
            }
            let non_inc = theory::or(theory::ge(ms, mt.clone()), theory::le(mt, Term::int(0)));
            if !self.entails(non_inc) {
                return false;
            }
        }
        for (i, (a, b)) in s.args().iter().zip(t.args()).enumerate() {
            if self.eq(a, b) {
                continue;
            }
            return self.gt(a, b) && all_args(i + 1);
        }
        false
    }
}
