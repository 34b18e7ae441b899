//! Rules, equations and programs: signatures, arities, calculation rules.

mod coverage;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::term::{fresh_name, FunSym, Head, Substitution, Symbol, Term, TheoryOp, Type, Var};
use crate::theory;

pub use coverage::{Coverage, CoverageReport};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("left-hand side `{0}` must be headed by a declared function symbol")]
    BadHead(String),
    #[error("left-hand side `{0}` is a theory term")]
    TheoryLhs(String),
    #[error("sides have different types: {0} and {1}")]
    TypeMismatch(Type, Type),
    #[error("constraint `{0}` is not a boolean theory term over theory-sorted variables")]
    BadConstraint(String),
    #[error("variable `{0}` of the right-hand side occurs neither in the left-hand side nor in the constraint")]
    UnboundVariable(String),
    #[error("`{name}` is used with {found} arguments but an earlier rule uses {expected}")]
    ArityClash { name: String, expected: usize, found: usize },
    #[error("symbol `{0}` is declared twice")]
    Redeclared(String),
    #[error("symbol `{0}` is not declared")]
    Undeclared(String),
    #[error("hole constants may not appear in rules")]
    Hole,
}

/// A constrained rewrite rule `lhs → rhs [constraint]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
    pub constraint: Term,
}

impl Rule {
    pub fn new(lhs: Term, rhs: Term, constraint: Term) -> Result<Rule, RuleError> {
        match lhs.head() {
            Head::Sym(Symbol::Fun(_)) => {}
            Head::Sym(Symbol::Theory(_)) => return Err(RuleError::TheoryLhs(lhs.to_string())),
            _ => return Err(RuleError::BadHead(lhs.to_string())),
        }
        if lhs.ty() != rhs.ty() {
            return Err(RuleError::TypeMismatch(lhs.ty().clone(), rhs.ty().clone()));
        }
        if !theory::is_constraint(&constraint) {
            return Err(RuleError::BadConstraint(constraint.to_string()));
        }
        let holes = |t: &Term| t.contains_symbol(&|s| matches!(s, Symbol::Hole(..)));
        if holes(&lhs) || holes(&rhs) {
            return Err(RuleError::Hole);
        }
        let mut bound = lhs.vars();
        constraint.collect_vars(&mut bound);
        if let Some(v) = rhs.vars().into_iter().find(|v| !bound.contains(v)) {
            return Err(RuleError::UnboundVariable(v.name.to_string()));
        }
        Ok(Rule { lhs, rhs, constraint })
    }

    pub fn root(&self) -> &FunSym {
        match self.lhs.head() {
            Head::Sym(Symbol::Fun(f)) => f,
            _ => unreachable!("checked at construction"),
        }
    }

    pub fn arity(&self) -> usize {
        self.lhs.args().len()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.lhs.vars();
        self.rhs.collect_vars(&mut out);
        self.constraint.collect_vars(&mut out);
        out
    }

    /// A copy whose variables avoid `used`.
    pub fn rename_apart(&self, used: &BTreeSet<Arc<str>>) -> Rule {
        let mut taken = used.clone();
        let mut sigma = Substitution::new();
        for v in self.vars() {
            if taken.contains(&v.name) {
                let name = fresh_name(&v.name, &taken);
                taken.insert(name.clone());
                let _ = sigma.insert(v.clone(), Term::var(Var { name, ty: v.ty.clone() }));
            } else {
                taken.insert(v.name.clone());
            }
        }
        Rule {
            lhs: self.lhs.subst(&sigma),
            rhs: self.rhs.subst(&sigma),
            constraint: self.constraint.subst(&sigma),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)?;
        if !theory::is_true(&self.constraint) {
            write!(f, " [{}]", self.constraint)?;
        }
        Ok(())
    }
}

/// A constrained equation `lhs ≈ rhs [constraint]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
    pub constraint: Term,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term, constraint: Term) -> Result<Equation, RuleError> {
        if lhs.ty() != rhs.ty() {
            return Err(RuleError::TypeMismatch(lhs.ty().clone(), rhs.ty().clone()));
        }
        if !theory::is_constraint(&constraint) {
            return Err(RuleError::BadConstraint(constraint.to_string()));
        }
        Ok(Equation { lhs, rhs, constraint })
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.lhs.vars();
        self.rhs.collect_vars(&mut out);
        self.constraint.collect_vars(&mut out);
        out
    }

    pub fn var_names(&self) -> BTreeSet<Arc<str>> {
        self.vars().into_iter().map(|v| v.name).collect()
    }

    pub fn subst(&self, sigma: &Substitution) -> Equation {
        Equation {
            lhs: self.lhs.subst(sigma),
            rhs: self.rhs.subst(sigma),
            constraint: self.constraint.subst(sigma),
        }
    }

    pub fn flipped(&self) -> Equation {
        Equation {
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
            constraint: self.constraint.clone(),
        }
    }

    /// Fill hole constants with concrete terms.
    pub fn fill(&self, args: &[Term]) -> Result<Equation, crate::term::TypeError> {
        Ok(Equation {
            lhs: self.lhs.fill(args)?,
            rhs: self.rhs.fill(args)?,
            constraint: self.constraint.fill(args)?,
        })
    }

    pub fn rename_apart(&self, used: &BTreeSet<Arc<str>>) -> Equation {
        let mut taken = used.clone();
        let mut sigma = Substitution::new();
        for v in self.vars() {
            if taken.contains(&v.name) {
                let name = fresh_name(&v.name, &taken);
                taken.insert(name.clone());
                let _ = sigma.insert(v.clone(), Term::var(Var { name, ty: v.ty.clone() }));
            } else {
                taken.insert(v.name.clone());
            }
        }
        self.subst(&sigma)
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ~ {}", self.lhs, self.rhs)?;
        if !theory::is_true(&self.constraint) {
            write!(f, " [{}]", self.constraint)?;
        }
        Ok(())
    }
}

/// A program: declared term symbols, rules, goals, lemmas and precedence hints.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    symbols: Vec<FunSym>,
    index: BTreeMap<Arc<str>, usize>,
    rules: Vec<Rule>,
    arities: BTreeMap<Arc<str>, usize>,
    pub goals: Vec<Equation>,
    pub lemmas: Vec<Equation>,
    /// `f > g` precedence edges from `prec` directives.
    pub precedence: Vec<(Arc<str>, Arc<str>)>,
    /// Symbols introduced by the template machinery for context functions.
    pub synthesized: BTreeSet<Arc<str>>,
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }

    pub fn declare(&mut self, name: &str, ty: Type) -> Result<Symbol, RuleError> {
        if self.index.contains_key(name) {
            return Err(RuleError::Redeclared(name.into()));
        }
        let f = FunSym { name: name.into(), ty };
        self.index.insert(f.name.clone(), self.symbols.len());
        self.symbols.push(f.clone());
        Ok(Symbol::Fun(f))
    }

    pub fn symbols(&self) -> &[FunSym] {
        &self.symbols
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        self.index.get(name).map(|&i| Symbol::Fun(self.symbols[i].clone()))
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn add_rule(&mut self, rule: Rule) -> Result<(), RuleError> {
        let root = rule.root().clone();
        match self.index.get(&root.name) {
            Some(&i) if self.symbols[i] == root => {}
            _ => return Err(RuleError::Undeclared(root.name.to_string())),
        }
        let k = rule.arity();
        if let Some(&expected) = self.arities.get(&root.name) {
            if expected != k {
                return Err(RuleError::ArityClash {
                    name: root.name.to_string(),
                    expected,
                    found: k,
                });
            }
        }
        self.arities.insert(root.name.clone(), k);
        self.rules.push(rule);
        Ok(())
    }

    /// Removes the rule at `index` (arity bookkeeping is recomputed).
    pub fn remove_rule(&mut self, index: usize) -> Rule {
        let r = self.rules.remove(index);
        self.arities.clear();
        for rule in &self.rules {
            self.arities.insert(rule.root().name.clone(), rule.arity());
        }
        r
    }

    /// `ar(f)`; `None` stands for ∞ (no rule heads the symbol).
    pub fn arity(&self, s: &Symbol) -> Option<usize> {
        match s {
            Symbol::Theory(op) if !op.is_value() => Some(op.arity()),
            Symbol::Fun(f) => self.arities.get(&f.name).copied(),
            _ => None,
        }
    }

    pub fn arity_map(&self) -> &BTreeMap<Arc<str>, usize> {
        &self.arities
    }

    pub fn is_defined(&self, name: &str) -> bool {
        self.arities.contains_key(name)
    }

    pub fn rules_for<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Rule> + 'a {
        self.rules.iter().filter(move |r| &*r.root().name == name)
    }

    /// Declared symbols no rule heads.
    pub fn constructors(&self) -> impl Iterator<Item = &FunSym> {
        self.symbols.iter().filter(|f| !self.arities.contains_key(&f.name))
    }

    /// A symbol name not yet declared, derived from `base`.
    pub fn fresh_symbol_name(&self, base: &str) -> Arc<str> {
        if !self.index.contains_key(base) {
            return base.into();
        }
        let taken: BTreeSet<Arc<str>> = self.index.keys().cloned().collect();
        fresh_name(base, &taken)
    }

    /// `f x₁ ⋯ xₘ → y [y = f x₁ ⋯ xₘ]` for every non-value theory symbol.
    pub fn calc_rules() -> Vec<CalcRule> {
        TheoryOp::operators()
            .into_iter()
            .map(|op| {
                let ty = op.ty();
                let (arg_tys, result) = ty.uncurry();
                let args: Vec<Term> = arg_tys
                    .iter()
                    .enumerate()
                    .map(|(i, t)| Term::var(Var::new(&alloc::format!("x{}", i + 1), (*t).clone())))
                    .collect();
                let lhs = Term::op(op, args);
                let y = Term::var(Var::new("y", Type::Base(result.clone())));
                let constraint = theory::eq(y.clone(), lhs.clone());
                CalcRule {
                    op,
                    lhs,
                    rhs: y,
                    constraint,
                }
            })
            .collect()
    }

    pub fn check_quasi_reductivity(&self, solver: &theory::Solver) -> Vec<CoverageReport> {
        coverage::check(self, solver)
    }
}

/// A calculation rule. Kept apart from [`Rule`] because its left-hand side is a theory term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CalcRule {
    pub op: TheoryOp,
    pub lhs: Term,
    pub rhs: Term,
    pub constraint: Term,
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            writeln!(f, "fun {} :: {};", s.name, s.ty)?;
        }
        for r in &self.rules {
            writeln!(f, "rule {r};")?;
        }
        for (a, b) in &self.precedence {
            writeln!(f, "prec {a} > {b};")?;
        }
        for l in &self.lemmas {
            writeln!(f, "lemma {l};")?;
        }
        for g in &self.goals {
            writeln!(f, "goal {g};")?;
        }
        Ok(())
    }
}
