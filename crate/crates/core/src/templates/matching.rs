//! Recognizing a symbol's two rules as one of the four recursion templates.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::program::{Program, Rule};
use crate::term::{match_term, Head, Substitution, Symbol, Term, TheoryOp, Type, Var};
use crate::theory::{self, poly::Poly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TemplateKind {
    TailUp,
    TailDown,
    RecUp,
    RecDown,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 4] = [
        TemplateKind::TailUp,
        TemplateKind::TailDown,
        TemplateKind::RecUp,
        TemplateKind::RecDown,
    ];

    pub fn is_tail(self) -> bool {
        matches!(self, TemplateKind::TailUp | TemplateKind::TailDown)
    }

    pub fn is_up(self) -> bool {
        matches!(self, TemplateKind::TailUp | TemplateKind::RecUp)
    }

    /// The recursor this kind is equivalent to.
    pub fn recursor(self) -> &'static str {
        match self {
            TemplateKind::TailUp => "tailup",
            TemplateKind::TailDown => "taildn",
            TemplateKind::RecUp => "recup",
            TemplateKind::RecDown => "recdn",
        }
    }
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The recursor argument standing for the context function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FunctionSymbol {
    /// `F = g #1 #2` for a hole-free `g`.
    Existing(Term),
    /// A fresh symbol with rule `name params x1 x2 -> F(x1, x2)`.
    Synthesized { name: Arc<str>, params: Vec<Var> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateMatch {
    pub kind: TemplateKind,
    pub symbol: Arc<str>,
    /// Left-hand side with the index as `#1` and the accumulator as `#2`.
    pub context: Term,
    /// The context function over integer holes `#1`, `#2`.
    pub function: Term,
    /// `u` for upward kinds, `l` for downward ones.
    pub bound: Term,
    pub base: Option<Term>,
    pub index: Var,
    pub accumulator: Option<Var>,
    pub function_symbol: FunctionSymbol,
    /// Indices of the base and the recursive rule in the program.
    pub base_rule: usize,
    pub step_rule: usize,
}

fn hole(i: u32) -> Term {
    Term::sym(Symbol::Hole(i, Type::INT))
}

fn var_to(v: &Var, t: Term) -> Substitution {
    core::iter::once((v.clone(), t)).collect()
}

fn replace_subterm(t: &Term, from: &Term, to: &Term) -> Term {
    if t == from {
        return to.clone();
    }
    let args = t.args().iter().map(|a| replace_subterm(a, from, to)).collect();
    t.with_args(args)
}

fn occurrences(t: &Term, s: &Term) -> usize {
    let mut n = 0;
    t.walk(&mut |u| {
        if u == s {
            n += 1;
        }
    });
    n
}

/// `e + k` written without a redundant `+ 0` or `- 1 + 1`.
fn shift(e: &Term, k: i128) -> Term {
    if k == 0 {
        return e.clone();
    }
    if let Some(n) = e.as_int() {
        return Term::int(n + k);
    }
    let args = e.args();
    let c = match e.theory_op() {
        Some(TheoryOp::Add) if args.len() == 2 => args[1].as_int(),
        Some(TheoryOp::Sub) if args.len() == 2 => args[1].as_int().map(|n| -n),
        _ => None,
    };
    let (base, total) = match c {
        Some(c) => (args[0].clone(), c + k),
        None => (e.clone(), k),
    };
    match total {
        0 => base,
        t if t > 0 => theory::add(base, Term::int(t)),
        t => theory::sub(base, Term::int(-t)),
    }
}

fn same_int(a: &Term, b: &Term) -> bool {
    a == b || matches!((Poly::from_term(a), Poly::from_term(b)), (Ok(p), Ok(q)) if p == q)
}

/// A comparison `i op e` with `e` free of `i`, if `c` is one (either way round).
fn isolate(c: &Term, i: &Var) -> Option<(TheoryOp, Term)> {
    use TheoryOp::*;
    let op = c.theory_op()?;
    if !matches!(op, Lt | Le | Gt | Ge) || c.args().len() != 2 {
        return None;
    }
    let (l, r) = (&c.args()[0], &c.args()[1]);
    if l.as_var() == Some(i) && !r.contains_var(i) {
        return Some((op, r.clone()));
    }
    if r.as_var() == Some(i) && !l.contains_var(i) {
        let flipped = match op {
            Lt => Gt,
            Le => Ge,
            Gt => Lt,
            Ge => Le,
            _ => unreachable!(),
        };
        return Some((flipped, l.clone()));
    }
    None
}

/// Rewrites a guard on `i` into the polarity upward (`>`, `<=`) or downward
/// (`<`, `>=`) templates expect. Other constraints are returned unchanged.
pub fn normalize_guard(c: &Term, i: &Var, up: bool) -> Term {
    use TheoryOp::*;
    let Some((op, e)) = isolate(c, i) else {
        return c.clone();
    };
    let iv = Term::var(i.clone());
    match (up, op) {
        (true, Lt) => theory::le(iv, shift(&e, -1)),
        (true, Ge) => theory::gt(iv, shift(&e, -1)),
        (false, Le) => theory::lt(iv, shift(&e, 1)),
        (false, Gt) => theory::ge(iv, shift(&e, 1)),
        (_, op) => Term::op(op, alloc::vec![iv, e]),
    }
}

/// Normalizes the guards of `rules` with respect to the index `i`.
pub fn normalize_inequalities(rules: &[Rule], i: &Var, up: bool) -> Vec<Rule> {
    rules
        .iter()
        .map(|r| Rule {
            lhs: r.lhs.clone(),
            rhs: r.rhs.clone(),
            constraint: normalize_guard(&r.constraint, i, up),
        })
        .collect()
}

fn is_renaming(s: &Substitution) -> bool {
    let mut seen = Vec::new();
    for (_, t) in s.iter() {
        match t.as_var() {
            Some(w) if !seen.contains(&w) => seen.push(w),
            _ => return false,
        }
    }
    true
}

/// Equal up to a consistent renaming of variables.
pub fn same_rule(a: &Rule, b: &Rule) -> bool {
    match match_term(&a.lhs, &b.lhs) {
        Some(s) if is_renaming(&s) => a.rhs.subst(&s) == b.rhs && same_constraint(&a.constraint.subst(&s), &b.constraint),
        _ => false,
    }
}

fn same_constraint(a: &Term, b: &Term) -> bool {
    if a == b {
        return true;
    }
    match (a.theory_op(), b.theory_op()) {
        (Some(p), Some(q)) if p == q && a.args().len() == 2 && b.args().len() == 2 => {
            same_int(&a.args()[0], &b.args()[0]) && same_int(&a.args()[1], &b.args()[1])
        }
        _ => false,
    }
}

impl TemplateMatch {
    /// The two rules of the template row this match instantiates, base rule first.
    pub fn rules(&self) -> Result<[Rule; 2], String> {
        let i = Term::var(self.index.clone());
        let lhs = self.fill_context(&i, self.accumulator.as_ref().map(|a| Term::var(a.clone())))?;
        let b = &self.bound;
        let next = if self.kind.is_up() {
            theory::add(i.clone(), Term::int(1))
        } else {
            theory::sub(i.clone(), Term::int(1))
        };
        let (stop, go) = if self.kind.is_up() {
            (theory::gt(i.clone(), b.clone()), theory::le(i.clone(), b.clone()))
        } else {
            (theory::lt(i.clone(), b.clone()), theory::ge(i.clone(), b.clone()))
        };
        let fill = |x: Term, y: Term| self.function.fill(&[x, y]).map_err(|e| e.to_string());
        let (base, step) = match (self.kind, &self.accumulator, &self.base) {
            (TemplateKind::TailUp, Some(a), _) => {
                let a = Term::var(a.clone());
                (a.clone(), self.fill_context(&next, Some(fill(i.clone(), a)?))?)
            }
            (TemplateKind::TailDown, Some(a), _) => {
                let a = Term::var(a.clone());
                (a.clone(), self.fill_context(&next, Some(fill(a, i.clone())?))?)
            }
            (TemplateKind::RecUp, _, Some(z)) => (z.clone(), fill(self.fill_context(&next, None)?, i.clone())?),
            (TemplateKind::RecDown, _, Some(z)) => (z.clone(), fill(i.clone(), self.fill_context(&next, None)?)?),
            _ => return Err(String::from("inconsistent template match")),
        };
        let mk = |r, c| Rule::new(lhs.clone(), r, c).map_err(|e| e.to_string());
        Ok([mk(base, stop)?, mk(step, go)?])
    }

    fn fill_context(&self, i: &Term, a: Option<Term>) -> Result<Term, String> {
        let mut args = alloc::vec![i.clone()];
        args.extend(a);
        self.context.fill(&args).map_err(|e| e.to_string())
    }

    /// The term passed to the recursor for the context function.
    pub fn function_term(&self, program: &Program) -> Option<Term> {
        match &self.function_symbol {
            FunctionSymbol::Existing(g) => Some(g.clone()),
            FunctionSymbol::Synthesized { name, params } => {
                let params: Vec<Term> = params.iter().cloned().map(Term::var).collect();
                Term::sym(program.lookup(name)?).apply(&params).ok()
            }
        }
    }
}

/// All template instances formed by the rules of `symbol`.
pub fn match_template(program: &Program, symbol: &str, kind: Option<TemplateKind>) -> Vec<TemplateMatch> {
    let idx: Vec<usize> = program
        .rules()
        .iter()
        .enumerate()
        .filter(|(_, r)| &*r.root().name == symbol)
        .map(|(i, _)| i)
        .collect();
    let [r1, r2] = idx[..] else {
        return Vec::new();
    };
    let defined = |t: &Term| t.contains_symbol(&|s| s.fun_name() == Some(symbol));
    let rules = program.rules();
    let (bi, si) = match (defined(&rules[r1].rhs), defined(&rules[r2].rhs)) {
        (false, true) => (r1, r2),
        (true, false) => (r2, r1),
        _ => return Vec::new(),
    };
    let step = rules[si].clone();
    let Some(ren) = match_term(&rules[bi].lhs, &step.lhs).filter(is_renaming) else {
        return Vec::new();
    };
    let base = Rule {
        lhs: step.lhs.clone(),
        rhs: rules[bi].rhs.subst(&ren),
        constraint: rules[bi].constraint.subst(&ren),
    };
    let params: Vec<&Term> = step.lhs.args().iter().collect();
    let int_var = |t: &Term| t.as_var().filter(|v| v.ty == Type::INT).cloned();

    let mut out = Vec::new();
    for (p, ti) in params.iter().enumerate() {
        let Some(i) = int_var(ti) else { continue };
        for k in TemplateKind::ALL {
            if kind.is_some_and(|want| want != k) {
                continue;
            }
            let accs: Vec<Option<usize>> = if k.is_tail() {
                (0..params.len()).filter(|&q| q != p).map(Some).collect()
            } else {
                alloc::vec![None]
            };
            for q in accs {
                let a = match q {
                    Some(q) => match int_var(params[q]) {
                        Some(a) if a != i => Some(a),
                        _ => continue,
                    },
                    None => None,
                };
                if let Some(m) = build(program, symbol, k, &base, &step, (bi, si), p, &i, q, a.as_ref()) {
                    out.push(m);
                }
            }
        }
    }
    out
}

/// Matches for every defined symbol of the program, in declaration order.
pub fn match_all(program: &Program) -> Vec<TemplateMatch> {
    program
        .symbols()
        .iter()
        .flat_map(|f| match_template(program, &f.name, None))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn build(
    program: &Program,
    symbol: &str,
    kind: TemplateKind,
    base: &Rule,
    step: &Rule,
    (bi, si): (usize, usize),
    p: usize,
    i: &Var,
    q: Option<usize>,
    a: Option<&Var>,
) -> Option<TemplateMatch> {
    let up = kind.is_up();
    let nb = normalize_guard(&base.constraint, i, up);
    let ns = normalize_guard(&step.constraint, i, up);
    let (ob, bound) = isolate(&nb, i)?;
    let (os, bound2) = isolate(&ns, i)?;
    let want = if up {
        (TheoryOp::Gt, TheoryOp::Le)
    } else {
        (TheoryOp::Lt, TheoryOp::Ge)
    };
    if (ob, os) != want || !same_int(&bound, &bound2) {
        return None;
    }
    let clean = |t: &Term| !t.contains_var(i) && a.is_none_or(|a| !t.contains_var(a));
    if !clean(&bound) {
        return None;
    }

    let mut ctx_sub = var_to(i, hole(1));
    if let Some(a) = a {
        ctx_sub.insert(a.clone(), hole(2)).ok()?;
    }
    let context = step.lhs.subst(&ctx_sub);
    let iv = Term::var(i.clone());
    let next = if up {
        theory::add(iv.clone(), Term::int(1))
    } else {
        theory::sub(iv.clone(), Term::int(1))
    };

    let (function, base_term) = if let (Some(q), Some(a)) = (q, a) {
        if base.rhs.as_var() != Some(a) {
            return None;
        }
        let r = &step.rhs;
        if r.head() != step.lhs.head() || r.args().len() != step.lhs.args().len() {
            return None;
        }
        for (j, (x, y)) in step.lhs.args().iter().zip(r.args()).enumerate() {
            if j != p && j != q && x != y {
                return None;
            }
        }
        if !same_int(&r.args()[p], &next) {
            return None;
        }
        let e = &r.args()[q];
        let (first, second) = if up { (i, a) } else { (a, i) };
        let mut s = var_to(first, hole(1));
        s.insert(second.clone(), hole(2)).ok()?;
        (e.subst(&s), None)
    } else {
        let b = base.rhs.clone();
        if !clean(&b) || *b.ty() != Type::INT {
            return None;
        }
        let call = step.lhs.with_args(
            step.lhs
                .args()
                .iter()
                .enumerate()
                .map(|(j, x)| if j == p { next.clone() } else { x.clone() })
                .collect(),
        );
        // The recursive call may spell the index update differently.
        let mut found = None;
        step.rhs.walk(&mut |u| {
            if found.is_none()
                && u.head() == call.head()
                && u.args().len() == call.args().len()
                && u.args().iter().zip(call.args()).all(|(x, y)| x == y || same_int(x, y))
            {
                found = Some(u.clone());
            }
        });
        let call = found?;
        if occurrences(&step.rhs, &call) != 1 || *call.ty() != Type::INT {
            return None;
        }
        let (rec_hole, idx_hole) = if up { (1, 2) } else { (2, 1) };
        let f = replace_subterm(&step.rhs, &call, &hole(rec_hole)).subst(&var_to(i, hole(idx_hole)));
        (f, Some(b))
    };
    if !clean(&function) || function.contains_symbol(&|s| s.fun_name() == Some(symbol)) {
        return None;
    }
    if *function.ty() != Type::INT || function.hole_count(1) == 0 && function.hole_count(2) == 0 {
        return None;
    }

    let function_symbol = function_symbol_for(program, &function);
    let m = TemplateMatch {
        kind,
        symbol: symbol.into(),
        context,
        function,
        bound,
        base: base_term,
        index: i.clone(),
        accumulator: a.cloned(),
        function_symbol,
        base_rule: bi,
        step_rule: si,
    };
    let [rb, rs] = m.rules().ok()?;
    let nbase = Rule {
        constraint: nb,
        ..base.clone()
    };
    let nstep = Rule {
        constraint: ns,
        ..step.clone()
    };
    (same_rule(&rb, &nbase) && same_rule(&rs, &nstep)).then_some(m)
}

fn is_hole(t: &Term, i: u32) -> bool {
    t.args().is_empty() && matches!(t.head(), Head::Sym(Symbol::Hole(j, _)) if *j == i)
}

fn function_symbol_for(program: &Program, f: &Term) -> FunctionSymbol {
    let args = f.args();
    if args.len() >= 2 && is_hole(&args[args.len() - 2], 1) && is_hole(&args[args.len() - 1], 2) {
        let g = f.prefix(args.len() - 2);
        if g.max_hole() == 0 {
            return FunctionSymbol::Existing(g);
        }
    }
    let (name, params) = synthesized_name(program, f);
    FunctionSymbol::Synthesized { name, params }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// A name determined by the function's text with its free variables
/// canonically renamed, so equal functions share one symbol.
fn synthesized_name(program: &Program, f: &Term) -> (Arc<str>, Vec<Var>) {
    let mut params: Vec<Var> = Vec::new();
    f.walk(&mut |u| {
        if let Head::Var(v) = u.head() {
            if !params.contains(v) {
                params.push(v.clone());
            }
        }
    });
    let canon: Substitution = params
        .iter()
        .enumerate()
        .map(|(k, v)| {
            (
                v.clone(),
                Term::var(Var {
                    name: alloc::format!("p{k}").into(),
                    ty: v.ty.clone(),
                }),
            )
        })
        .collect();
    let mut key = f.subst(&canon).to_string();
    for v in &params {
        key.push_str(&alloc::format!(" :: {}", v.ty));
    }
    let mut name: String = alloc::format!("F_{:08x}", fnv1a(&key) as u32);
    // Different text that hashes the same, or a user symbol of that name.
    while program.lookup(&name).is_some() && !program.synthesized.contains(name.as_str()) {
        name.push('x');
    }
    (name.into(), params)
}

/// Source text declaring the synthesized symbol of `m`, or `None` when the
/// function is an existing symbol or the program already defines it.
pub fn synthesized_definition(program: &Program, m: &TemplateMatch) -> Option<String> {
    let FunctionSymbol::Synthesized { name, params } = &m.function_symbol else {
        return None;
    };
    if program.lookup(name).is_some() {
        return None;
    }
    let mut taken: alloc::collections::BTreeSet<Arc<str>> = params.iter().map(|v| v.name.clone()).collect();
    let x1 = crate::term::fresh_name("x1", &taken);
    taken.insert(x1.clone());
    let x2 = crate::term::fresh_name("x2", &taken);
    let body = m
        .function
        .fill(&[theory::int_var(&x1), theory::int_var(&x2)])
        .expect("integer holes");
    let ty = Type::curried(params.iter().map(|v| v.ty.clone()).chain([Type::INT, Type::INT]), Type::INT);
    let mut lhs = String::from(&**name);
    for v in params {
        lhs.push(' ');
        lhs.push_str(&v.name);
    }
    Some(alloc::format!("fun {name} :: {ty};\nrule {lhs} {x1} {x2} -> {body};\n"))
}
