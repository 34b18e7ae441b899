//! Simply-typed applicative terms.
//!
//! A term is stored in spine form: a head (symbol or variable) applied to a
//! list of arguments. `f a b` and `(f a) b` are the same value, and
//! substituting `x := g c` into `x d` yields `g c d`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Sort {
    Int,
    Bool,
    /// A sort declared implicitly by a term-symbol signature (e.g. `Nat`).
    User(Arc<str>),
}

impl Sort {
    pub fn is_theory(&self) -> bool {
        matches!(self, Sort::Int | Sort::Bool)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("Int"),
            Sort::Bool => f.write_str("Bool"),
            Sort::User(name) => f.write_str(name),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Type {
    Base(Sort),
    Arrow(Arc<Type>, Arc<Type>),
}

impl Type {
    pub const INT: Type = Type::Base(Sort::Int);
    pub const BOOL: Type = Type::Base(Sort::Bool);

    pub fn arrow(from: Type, to: Type) -> Type {
        Type::Arrow(Arc::new(from), Arc::new(to))
    }

    /// `σ₁ → … → σₙ → ι` from the argument list and result sort.
    pub fn curried(args: impl IntoIterator<Item = Type>, result: Type) -> Type {
        let args: Vec<Type> = args.into_iter().collect();
        args.into_iter().rev().fold(result, |acc, a| Type::arrow(a, acc))
    }

    pub fn is_base(&self) -> bool {
        matches!(self, Type::Base(_))
    }

    pub fn base_sort(&self) -> Option<&Sort> {
        match self {
            Type::Base(s) => Some(s),
            Type::Arrow(..) => None,
        }
    }

    /// Argument types and the final sort.
    pub fn uncurry(&self) -> (Vec<&Type>, &Sort) {
        let mut args = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Type::Base(s) => return (args, s),
                Type::Arrow(a, b) => {
                    args.push(a);
                    cur = b;
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.uncurry().0.len()
    }

    /// True when every sort at every position is a theory sort.
    pub fn is_theory(&self) -> bool {
        match self {
            Type::Base(s) => s.is_theory(),
            Type::Arrow(a, b) => a.is_theory() && b.is_theory(),
        }
    }

    /// The type after consuming `n` arguments.
    pub fn drop_args(&self, n: usize) -> Option<&Type> {
        let mut cur = self;
        for _ in 0..n {
            match cur {
                Type::Arrow(_, b) => cur = b,
                Type::Base(_) => return None,
            }
        }
        Some(cur)
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Base(s) => write!(f, "{s}"),
            Type::Arrow(a, b) => {
                if a.is_base() {
                    write!(f, "{a} -> {b}")
                } else {
                    write!(f, "({a}) -> {b}")
                }
            }
        }
    }
}

/// Equality is overloaded on the two theory sorts.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EqSort {
    Int,
    Bool,
}

/// The fixed theory signature.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum TheoryOp {
    Int(i128),
    True,
    False,
    Add,
    Sub,
    Mul,
    Eq(EqSort),
    Ne(EqSort),
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
}

impl TheoryOp {
    pub fn ty(&self) -> Type {
        use TheoryOp::*;
        let ii = || Type::curried([Type::INT, Type::INT], Type::INT);
        let ib = || Type::curried([Type::INT, Type::INT], Type::BOOL);
        let bb = || Type::curried([Type::BOOL, Type::BOOL], Type::BOOL);
        match self {
            Int(_) => Type::INT,
            True | False => Type::BOOL,
            Add | Sub | Mul => ii(),
            Eq(EqSort::Int) | Ne(EqSort::Int) | Lt | Le | Gt | Ge => ib(),
            Eq(EqSort::Bool) | Ne(EqSort::Bool) | And | Or => bb(),
            Not => Type::arrow(Type::BOOL, Type::BOOL),
        }
    }

    pub fn arity(&self) -> usize {
        self.ty().arity()
    }

    /// Values are the theory symbols of base type.
    pub fn is_value(&self) -> bool {
        matches!(self, TheoryOp::Int(_) | TheoryOp::True | TheoryOp::False)
    }

    /// Concrete syntax of the operator (infix spelling for binary ops).
    pub fn spelling(&self) -> String {
        use TheoryOp::*;
        match self {
            Int(n) => n.to_string(),
            True => "true".into(),
            False => "false".into(),
            Add => "+".into(),
            Sub => "-".into(),
            Mul => "*".into(),
            Eq(_) => "=".into(),
            Ne(_) => "!=".into(),
            Lt => "<".into(),
            Le => "<=".into(),
            Gt => ">".into(),
            Ge => ">=".into(),
            And => "/\\".into(),
            Or => "\\/".into(),
            Not => "not".into(),
        }
    }

    /// All non-value operators, in a fixed order.
    pub fn operators() -> [TheoryOp; 14] {
        use TheoryOp::*;
        [
            Add,
            Sub,
            Mul,
            Eq(EqSort::Int),
            Eq(EqSort::Bool),
            Ne(EqSort::Int),
            Ne(EqSort::Bool),
            Lt,
            Le,
            Gt,
            Ge,
            And,
            Or,
            Not,
        ]
    }
}

/// A term symbol declared by the user or synthesized by the template machinery.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FunSym {
    pub name: Arc<str>,
    pub ty: Type,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Symbol {
    Theory(TheoryOp),
    Fun(FunSym),
    /// Hole constant `□ᵢ` (1-based) of a context function.
    Hole(u32, Type),
}

impl Symbol {
    pub fn fun(name: &str, ty: Type) -> Symbol {
        Symbol::Fun(FunSym { name: name.into(), ty })
    }

    pub fn ty(&self) -> Type {
        match self {
            Symbol::Theory(op) => op.ty(),
            Symbol::Fun(f) => f.ty.clone(),
            Symbol::Hole(_, ty) => ty.clone(),
        }
    }

    pub fn is_theory(&self) -> bool {
        matches!(self, Symbol::Theory(_))
    }

    pub fn name(&self) -> String {
        match self {
            Symbol::Theory(op) => op.spelling(),
            Symbol::Fun(f) => f.name.to_string(),
            Symbol::Hole(i, _) => alloc::format!("#{i}"),
        }
    }

    pub fn fun_name(&self) -> Option<&str> {
        match self {
            Symbol::Fun(f) => Some(&f.name),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var {
    pub name: Arc<str>,
    pub ty: Type,
}

impl Var {
    pub fn new(name: &str, ty: Type) -> Var {
        Var { name: name.into(), ty }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Head {
    Sym(Symbol),
    Var(Var),
}

impl Head {
    pub fn ty(&self) -> Type {
        match self {
            Head::Sym(s) => s.ty(),
            Head::Var(v) => v.ty.clone(),
        }
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
struct Node {
    head: Head,
    args: Vec<Term>,
    ty: Type,
}

/// An immutable, cheaply clonable term. Equality is structural.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term(Arc<Node>);

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("`{head}` has type {ty} and cannot take another argument")]
    NotAFunction { head: String, ty: Type },
    #[error("argument `{arg}` has type {found}, expected {expected}")]
    ArgumentMismatch { arg: String, expected: Type, found: Type },
    #[error("replacement has type {found}, position holds type {expected}")]
    ReplaceMismatch { expected: Type, found: Type },
    #[error("invalid position {0:?}")]
    InvalidPosition(Vec<usize>),
    #[error("context function expects {expected} arguments, got {found}")]
    FillArity { expected: usize, found: usize },
}

/// A path of argument indices from the root.
pub type Position = Vec<usize>;

impl Term {
    /// Builds `head args…`, checking every argument against the head's type.
    pub fn app(head: Head, args: Vec<Term>) -> Result<Term, TypeError> {
        let mut ty = head.ty();
        for arg in &args {
            match ty {
                Type::Arrow(a, b) => {
                    if *a != *arg.ty() {
                        return Err(TypeError::ArgumentMismatch {
                            arg: arg.to_string(),
                            expected: (*a).clone(),
                            found: arg.ty().clone(),
                        });
                    }
                    ty = (*b).clone();
                }
                Type::Base(_) => {
                    return Err(TypeError::NotAFunction {
                        head: Term::leaf(head.clone()).to_string(),
                        ty: head.ty(),
                    })
                }
            }
        }
        Ok(Term(Arc::new(Node { head, args, ty })))
    }

    fn leaf(head: Head) -> Term {
        let ty = head.ty();
        Term(Arc::new(Node {
            head,
            args: Vec::new(),
            ty,
        }))
    }

    pub fn var(v: Var) -> Term {
        Term::leaf(Head::Var(v))
    }

    pub fn sym(s: Symbol) -> Term {
        Term::leaf(Head::Sym(s))
    }

    pub fn int(n: i128) -> Term {
        Term::sym(Symbol::Theory(TheoryOp::Int(n)))
    }

    pub fn bool(b: bool) -> Term {
        Term::sym(Symbol::Theory(if b { TheoryOp::True } else { TheoryOp::False }))
    }

    /// Theory operator applied to arguments; panics on ill-typed input, so
    /// only use it with arguments of known theory sort.
    pub fn op(op: TheoryOp, args: Vec<Term>) -> Term {
        Term::app(Head::Sym(Symbol::Theory(op)), args).expect("ill-typed theory application")
    }

    pub fn head(&self) -> &Head {
        &self.0.head
    }

    pub fn args(&self) -> &[Term] {
        &self.0.args
    }

    pub fn ty(&self) -> &Type {
        &self.0.ty
    }

    pub fn head_symbol(&self) -> Option<&Symbol> {
        match &self.0.head {
            Head::Sym(s) => Some(s),
            Head::Var(_) => None,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match &self.0.head {
            Head::Var(v) if self.0.args.is_empty() => Some(v),
            _ => None,
        }
    }

    pub fn theory_op(&self) -> Option<TheoryOp> {
        match &self.0.head {
            Head::Sym(Symbol::Theory(op)) => Some(*op),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i128> {
        match (self.theory_op(), self.0.args.is_empty()) {
            (Some(TheoryOp::Int(n)), true) => Some(n),
            _ => None,
        }
    }

    /// `self t₁ … tₙ` with the new arguments appended to the spine.
    pub fn apply(&self, extra: &[Term]) -> Result<Term, TypeError> {
        if extra.is_empty() {
            return Ok(self.clone());
        }
        let mut args = self.0.args.clone();
        args.extend_from_slice(extra);
        Term::app(self.0.head.clone(), args)
    }

    /// Rebuild with new arguments (same head, same count; types must match).
    pub fn with_args(&self, args: Vec<Term>) -> Term {
        debug_assert_eq!(args.len(), self.0.args.len());
        Term(Arc::new(Node {
            head: self.0.head.clone(),
            args,
            ty: self.0.ty.clone(),
        }))
    }

    /// The partial application consisting of the head and the first `n` arguments.
    pub fn prefix(&self, n: usize) -> Term {
        Term::app(self.0.head.clone(), self.0.args[..n].to_vec()).expect("prefix of a well-typed term")
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        if let Head::Var(v) = &self.0.head {
            out.insert(v.clone());
        }
        for a in &self.0.args {
            a.collect_vars(out);
        }
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        matches!(&self.0.head, Head::Var(w) if w == v) || self.0.args.iter().any(|a| a.contains_var(v))
    }

    pub fn contains_symbol(&self, pred: &dyn Fn(&Symbol) -> bool) -> bool {
        matches!(&self.0.head, Head::Sym(s) if pred(s)) || self.0.args.iter().any(|a| a.contains_symbol(pred))
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| {
            if let Head::Sym(s) = t.head() {
                out.insert(s.clone());
            }
        });
        out
    }

    /// Pre-order traversal of all (spine) subterms.
    pub fn walk(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        for a in &self.0.args {
            a.walk(f);
        }
    }

    pub fn size(&self) -> usize {
        1 + self.0.args.iter().map(Term::size).sum::<usize>()
    }

    pub fn is_ground(&self) -> bool {
        matches!(self.0.head, Head::Sym(_)) && self.0.args.iter().all(Term::is_ground)
    }

    /// Built solely from theory symbols and variables.
    pub fn is_theory_term(&self) -> bool {
        let head_ok = match &self.0.head {
            Head::Sym(s) => s.is_theory(),
            Head::Var(_) => true,
        };
        head_ok && self.0.args.iter().all(Term::is_theory_term)
    }

    /// A theory term of base type whose variables all have theory sorts:
    /// every ground instance by values evaluates.
    pub fn is_base_theory_term(&self) -> bool {
        self.ty().base_sort().is_some_and(Sort::is_theory)
            && self.is_theory_term()
            && self.vars().iter().all(|v| v.ty.base_sort().is_some_and(Sort::is_theory))
    }

    pub fn is_value(&self) -> bool {
        self.0.args.is_empty() && matches!(self.theory_op(), Some(op) if op.is_value())
    }

    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.collect_positions(&mut cur, &mut out);
        out
    }

    fn collect_positions(&self, cur: &mut Vec<usize>, out: &mut Vec<Position>) {
        out.push(cur.clone());
        for (i, a) in self.0.args.iter().enumerate() {
            cur.push(i);
            a.collect_positions(cur, out);
            cur.pop();
        }
    }

    pub fn at(&self, pos: &[usize]) -> Option<&Term> {
        let mut cur = self;
        for &i in pos {
            cur = cur.0.args.get(i)?;
        }
        Some(cur)
    }

    /// Replace the subterm at `pos` by `s` (the context fill `C[s]`).
    pub fn replace_at(&self, pos: &[usize], s: Term) -> Result<Term, TypeError> {
        match pos.split_first() {
            None => {
                if s.ty() != self.ty() {
                    return Err(TypeError::ReplaceMismatch {
                        expected: self.ty().clone(),
                        found: s.ty().clone(),
                    });
                }
                Ok(s)
            }
            Some((&i, rest)) => {
                let child = self.0.args.get(i).ok_or_else(|| TypeError::InvalidPosition(pos.to_vec()))?;
                let new_child = child.replace_at(rest, s).map_err(|e| match e {
                    TypeError::InvalidPosition(_) => TypeError::InvalidPosition(pos.to_vec()),
                    other => other,
                })?;
                let mut args = self.0.args.clone();
                args[i] = new_child;
                Ok(self.with_args(args))
            }
        }
    }

    pub fn subst(&self, sigma: &Substitution) -> Term {
        if sigma.is_empty() {
            return self.clone();
        }
        let args: Vec<Term> = self.0.args.iter().map(|a| a.subst(sigma)).collect();
        match &self.0.head {
            Head::Var(v) => match sigma.get(v) {
                Some(t) => t.apply(&args).expect("type-preserving substitution"),
                None => self.with_args(args),
            },
            Head::Sym(_) => self.with_args(args),
        }
    }

    /// Replace every hole `□ᵢ` by `args[i-1]` (context-function filling).
    pub fn fill(&self, args: &[Term]) -> Result<Term, TypeError> {
        let max = self.max_hole();
        if max as usize > args.len() {
            return Err(TypeError::FillArity {
                expected: max as usize,
                found: args.len(),
            });
        }
        self.fill_inner(args)
    }

    fn fill_inner(&self, fill: &[Term]) -> Result<Term, TypeError> {
        let args = self.0.args.iter().map(|a| a.fill_inner(fill)).collect::<Result<Vec<_>, _>>()?;
        match &self.0.head {
            Head::Sym(Symbol::Hole(i, ty)) => {
                let with = &fill[*i as usize - 1];
                if with.ty() != ty {
                    return Err(TypeError::ArgumentMismatch {
                        arg: with.to_string(),
                        expected: ty.clone(),
                        found: with.ty().clone(),
                    });
                }
                with.apply(&args)
            }
            _ => Ok(self.with_args(args)),
        }
    }

    /// Largest hole index occurring in the term (0 if none).
    pub fn max_hole(&self) -> u32 {
        let own = match &self.0.head {
            Head::Sym(Symbol::Hole(i, _)) => *i,
            _ => 0,
        };
        self.0.args.iter().map(Term::max_hole).fold(own, u32::max)
    }

    pub fn hole_count(&self, index: u32) -> usize {
        let mut n = 0;
        self.walk(&mut |t| {
            if matches!(t.head(), Head::Sym(Symbol::Hole(i, _)) if *i == index) {
                n += 1;
            }
        });
        n
    }

    /// Positions of `□ᵢ` occurrences (heads of spines).
    pub fn hole_positions(&self, index: u32) -> Vec<Position> {
        self.positions()
            .into_iter()
            .filter(|p| matches!(self.at(p).map(Term::head), Some(Head::Sym(Symbol::Hole(i, _))) if *i == index))
            .collect()
    }

    /// Rename variables by name using `f`; types are kept.
    pub fn rename(&self, f: &dyn Fn(&Var) -> Option<Var>) -> Term {
        let args: Vec<Term> = self.0.args.iter().map(|a| a.rename(f)).collect();
        match &self.0.head {
            Head::Var(v) => match f(v) {
                Some(w) => Term::app(Head::Var(w), args).expect("renaming keeps types"),
                None => self.with_args(args),
            },
            Head::Sym(_) => self.with_args(args),
        }
    }
}

/// A finite, type-preserving map from variables to terms.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution(BTreeMap<Var, Term>);

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} := {}", v.name, t)?;
        }
        f.write_str("}")
    }
}

impl Substitution {
    pub fn new() -> Self {
        Substitution(BTreeMap::new())
    }

    /// Inserts `v := t`; identity bindings are dropped so that `dom` stays exact.
    pub fn insert(&mut self, v: Var, t: Term) -> Result<(), TypeError> {
        if v.ty != *t.ty() {
            return Err(TypeError::ArgumentMismatch {
                arg: t.to_string(),
                expected: v.ty.clone(),
                found: t.ty().clone(),
            });
        }
        if t.as_var() == Some(&v) {
            self.0.remove(&v);
        } else {
            self.0.insert(v, t);
        }
        Ok(())
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    /// `self` followed by `other`: `t(self ∘ other) = (t self) other`.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (v, t) in &self.0 {
            let _ = out.insert(v.clone(), t.subst(other));
        }
        for (v, t) in &other.0 {
            if !self.0.contains_key(v) {
                out.0.insert(v.clone(), t.clone());
            }
        }
        out
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (v, t) in iter {
            s.insert(v, t).expect("ill-typed substitution binding");
        }
        s
    }
}

/// Purely syntactic matching: returns `γ` with `pattern γ = subject`.
///
/// A variable head applied to `k` arguments matches the prefix of a longer
/// spine, so `f x y` matches `[*] 2 w` with `f := [*]`.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    let mut deferred = Vec::new();
    match_into(pattern, subject, &mut sigma, &mut deferred, false).then_some(())?;
    Some(sigma)
}

/// Like [`match_term`], but mismatches between base-sort theory terms are
/// recorded in `deferred` as `(pattern part, subject part)` instead of
/// failing. The caller decides them (usually by entailment under a
/// constraint) after applying the returned substitution to the pattern parts.
/// Pattern variables should be renamed apart from the subject's.
pub fn match_modulo(pattern: &Term, subject: &Term, deferred: &mut Vec<(Term, Term)>) -> Option<Substitution> {
    match_modulo_all(&[(pattern, subject)], deferred)
}

/// Simultaneous [`match_modulo`] of several pattern/subject pairs.
pub fn match_modulo_all(pairs: &[(&Term, &Term)], deferred: &mut Vec<(Term, Term)>) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    pairs
        .iter()
        .all(|(p, s)| match_into(p, s, &mut sigma, deferred, true))
        .then_some(sigma)
}

fn match_into(pattern: &Term, subject: &Term, sigma: &mut Substitution, deferred: &mut Vec<(Term, Term)>, modulo: bool) -> bool {
    let ok = match_structural(pattern, subject, sigma, deferred, modulo);
    if !ok && modulo && pattern.is_base_theory_term() && subject.is_base_theory_term() && pattern.ty() == subject.ty() {
        deferred.push((pattern.clone(), subject.clone()));
        return true;
    }
    ok
}

fn match_structural(pattern: &Term, subject: &Term, sigma: &mut Substitution, deferred: &mut Vec<(Term, Term)>, modulo: bool) -> bool {
    let pargs = pattern.args();
    let sargs = subject.args();
    match pattern.head() {
        Head::Var(x) => {
            if sargs.len() < pargs.len() {
                return false;
            }
            let split = sargs.len() - pargs.len();
            let prefix = subject.prefix(split);
            if prefix.ty() != &x.ty {
                return false;
            }
            match sigma.get(x) {
                Some(bound) => {
                    if *bound != prefix && !(modulo && equal_modulo(bound, &prefix, deferred)) {
                        return false;
                    }
                }
                None => {
                    sigma.0.insert(x.clone(), prefix);
                }
            }
            pargs
                .iter()
                .zip(&sargs[split..])
                .all(|(p, s)| match_into(p, s, sigma, deferred, modulo))
        }
        Head::Sym(f) => {
            if subject.head() != &Head::Sym(f.clone()) || pargs.len() != sargs.len() {
                return false;
            }
            pargs.iter().zip(sargs).all(|(p, s)| match_into(p, s, sigma, deferred, modulo))
        }
    }
}

/// Structural equality up to base-sort theory subterms, which are deferred.
pub fn equal_modulo(a: &Term, b: &Term, deferred: &mut Vec<(Term, Term)>) -> bool {
    if a == b {
        return true;
    }
    if a.ty() == b.ty() && a.is_base_theory_term() && b.is_base_theory_term() {
        deferred.push((a.clone(), b.clone()));
        return true;
    }
    a.head() == b.head() && a.args().len() == b.args().len() && a.args().iter().zip(b.args()).all(|(x, y)| equal_modulo(x, y, deferred))
}

/// Pure syntactic predicates on a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub ground: bool,
    pub theory: bool,
    pub semi_constructor: bool,
    pub value: bool,
}

/// Classify `t`. `arity` returns `None` for `ar(f) = ∞` (constructors).
pub fn classify(t: &Term, arity: &dyn Fn(&Symbol) -> Option<usize>) -> Classification {
    Classification {
        ground: t.is_ground(),
        theory: t.is_theory_term(),
        semi_constructor: is_semi_constructor(t, arity),
        value: t.is_value(),
    }
}

/// Every subterm `f s₁ … sₙ` has `n < ar(f)`.
pub fn is_semi_constructor(t: &Term, arity: &dyn Fn(&Symbol) -> Option<usize>) -> bool {
    let head_ok = match t.head() {
        Head::Sym(s) => arity(s).is_none_or(|k| t.args().len() < k),
        Head::Var(_) => true,
    };
    head_ok && t.args().iter().all(|a| is_semi_constructor(a, arity))
}

/// A variable name not in `used`, derived from `base`.
pub fn fresh_name(base: &str, used: &BTreeSet<Arc<str>>) -> Arc<str> {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
    let stem = if stem.is_empty() { "v" } else { stem };
    let mut i = 1usize;
    loop {
        let cand: Arc<str> = alloc::format!("{stem}{i}").into();
        if !used.contains(&cand) {
            return cand;
        }
        i += 1;
    }
}
