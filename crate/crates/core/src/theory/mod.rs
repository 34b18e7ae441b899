//! The fixed integer/boolean theory: evaluation, constraint builders, the
//! polynomial normal form and the decision procedure.

mod lia;
pub mod poly;
pub mod smtlib;
mod solver;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::term::{EqSort, Head, Sort, Symbol, Term, TheoryOp, Type, Var};

pub use solver::{ExternalAnswer, ExternalSolver, SatResult, Solver, Verdict};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Value {
    Int(i128),
    Bool(bool),
}

impl Value {
    pub fn to_term(self) -> Term {
        match self {
            Value::Int(n) => Term::int(n),
            Value::Bool(b) => Term::bool(b),
        }
    }

    pub fn from_term(t: &Term) -> Option<Value> {
        if !t.args().is_empty() {
            return None;
        }
        match t.theory_op()? {
            TheoryOp::Int(n) => Some(Value::Int(n)),
            TheoryOp::True => Some(Value::Bool(true)),
            TheoryOp::False => Some(Value::Bool(false)),
            _ => None,
        }
    }

    pub fn as_int(self) -> Option<i128> {
        match self {
            Value::Int(n) => Some(n),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Int(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unassigned variable `{0}`")]
    Unassigned(String),
    #[error("`{0}` is not a theory symbol")]
    NotTheory(String),
    #[error("`{0}` is partially applied and has no base-type value")]
    Partial(String),
    #[error("integer overflow")]
    Overflow,
}

/// Interpret a ground theory term.
pub fn eval_ground(t: &Term) -> Result<Value, EvalError> {
    eval_with(t, &|_| None)
}

/// Interpret a theory term whose variables are given values by `env`.
pub fn eval_with(t: &Term, env: &dyn Fn(&Var) -> Option<Value>) -> Result<Value, EvalError> {
    let op = match t.head() {
        Head::Var(v) => {
            if !t.args().is_empty() {
                return Err(EvalError::NotTheory(v.name.as_ref().into()));
            }
            return env(v).ok_or_else(|| EvalError::Unassigned(v.name.as_ref().into()));
        }
        Head::Sym(Symbol::Theory(op)) => *op,
        Head::Sym(s) => return Err(EvalError::NotTheory(s.name())),
    };
    let args = t.args();
    if args.len() != op.arity() {
        return Err(EvalError::Partial(alloc::format!("{t}")));
    }
    let int = |i: usize| -> Result<i128, EvalError> { eval_with(&args[i], env)?.as_int().ok_or(EvalError::Overflow) };
    let boolean = |i: usize| -> Result<bool, EvalError> { eval_with(&args[i], env)?.as_bool().ok_or(EvalError::Overflow) };
    use TheoryOp::*;
    Ok(match op {
        Int(n) => Value::Int(n),
        True => Value::Bool(true),
        False => Value::Bool(false),
        Add => Value::Int(int(0)?.checked_add(int(1)?).ok_or(EvalError::Overflow)?),
        Sub => Value::Int(int(0)?.checked_sub(int(1)?).ok_or(EvalError::Overflow)?),
        Mul => Value::Int(int(0)?.checked_mul(int(1)?).ok_or(EvalError::Overflow)?),
        Eq(EqSort::Int) => Value::Bool(int(0)? == int(1)?),
        Ne(EqSort::Int) => Value::Bool(int(0)? != int(1)?),
        Eq(EqSort::Bool) => Value::Bool(boolean(0)? == boolean(1)?),
        Ne(EqSort::Bool) => Value::Bool(boolean(0)? != boolean(1)?),
        Lt => Value::Bool(int(0)? < int(1)?),
        Le => Value::Bool(int(0)? <= int(1)?),
        Gt => Value::Bool(int(0)? > int(1)?),
        Ge => Value::Bool(int(0)? >= int(1)?),
        And => Value::Bool(boolean(0)? && boolean(1)?),
        Or => Value::Bool(boolean(0)? || boolean(1)?),
        Not => Value::Bool(!boolean(0)?),
    })
}

/// True when `t` can serve as a constraint: a theory term of sort Bool whose
/// variables all have theory sorts.
pub fn is_constraint(t: &Term) -> bool {
    *t.ty() == Type::BOOL && t.is_base_theory_term()
}

pub fn truth() -> Term {
    Term::bool(true)
}

pub fn is_true(t: &Term) -> bool {
    t.theory_op() == Some(TheoryOp::True) && t.args().is_empty()
}

/// Negation; comparisons are flipped instead of wrapped.
pub fn not(a: Term) -> Term {
    use TheoryOp::*;
    let flipped = match a.theory_op() {
        Some(Lt) => Some(Ge),
        Some(Le) => Some(Gt),
        Some(Gt) => Some(Le),
        Some(Ge) => Some(Lt),
        Some(Eq(s)) => Some(Ne(s)),
        Some(Ne(s)) => Some(Eq(s)),
        _ => None,
    };
    match flipped {
        Some(op) if a.args().len() == 2 => Term::op(op, a.args().to_vec()),
        _ if a.theory_op() == Some(Not) && a.args().len() == 1 => a.args()[0].clone(),
        _ => Term::op(Not, alloc::vec![a]),
    }
}

pub fn and(a: Term, b: Term) -> Term {
    if is_true(&a) {
        return b;
    }
    if is_true(&b) {
        return a;
    }
    Term::op(TheoryOp::And, alloc::vec![a, b])
}

pub fn or(a: Term, b: Term) -> Term {
    Term::op(TheoryOp::Or, alloc::vec![a, b])
}

/// `¬a ∨ b`.
pub fn implies(a: Term, b: Term) -> Term {
    if is_true(&a) {
        return b;
    }
    or(not(a), b)
}

/// Left-nested conjunction, dropping `true` conjuncts.
pub fn conj(parts: impl IntoIterator<Item = Term>) -> Term {
    parts.into_iter().fold(truth(), and)
}

/// Splits a left- or right-nested conjunction into its conjuncts.
pub fn conjuncts(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    fn go(t: &Term, out: &mut Vec<Term>) {
        if t.theory_op() == Some(TheoryOp::And) && t.args().len() == 2 {
            go(&t.args()[0], out);
            go(&t.args()[1], out);
        } else if !is_true(t) {
            out.push(t.clone());
        }
    }
    go(t, &mut out);
    out
}

fn eq_sort(t: &Term) -> EqSort {
    if t.ty().base_sort() == Some(&Sort::Bool) {
        EqSort::Bool
    } else {
        EqSort::Int
    }
}

pub fn eq(a: Term, b: Term) -> Term {
    let s = eq_sort(&a);
    Term::op(TheoryOp::Eq(s), alloc::vec![a, b])
}

pub fn ne(a: Term, b: Term) -> Term {
    let s = eq_sort(&a);
    Term::op(TheoryOp::Ne(s), alloc::vec![a, b])
}

pub fn lt(a: Term, b: Term) -> Term {
    Term::op(TheoryOp::Lt, alloc::vec![a, b])
}

pub fn le(a: Term, b: Term) -> Term {
    Term::op(TheoryOp::Le, alloc::vec![a, b])
}

pub fn gt(a: Term, b: Term) -> Term {
    Term::op(TheoryOp::Gt, alloc::vec![a, b])
}

pub fn ge(a: Term, b: Term) -> Term {
    Term::op(TheoryOp::Ge, alloc::vec![a, b])
}

pub fn add(a: Term, b: Term) -> Term {
    Term::op(TheoryOp::Add, alloc::vec![a, b])
}

pub fn sub(a: Term, b: Term) -> Term {
    Term::op(TheoryOp::Sub, alloc::vec![a, b])
}

pub fn mul(a: Term, b: Term) -> Term {
    Term::op(TheoryOp::Mul, alloc::vec![a, b])
}

pub fn int_var(name: &str) -> Term {
    Term::var(Var::new(name, Type::INT))
}
