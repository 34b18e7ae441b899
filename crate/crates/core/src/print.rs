//! Concrete syntax output. Everything printed here is accepted by [`crate::parse`].

use alloc::string::String;
use core::fmt::{self, Write};

use crate::term::{Head, Symbol, Term, TheoryOp};

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_NOT: u8 = 3;
const PREC_CMP: u8 = 4;
const PREC_ADD: u8 = 5;
const PREC_MUL: u8 = 6;
const PREC_APP: u8 = 7;
const PREC_ATOM: u8 = 8;

fn infix_prec(op: TheoryOp) -> Option<u8> {
    use TheoryOp::*;
    match op {
        Or => Some(PREC_OR),
        And => Some(PREC_AND),
        Eq(_) | Ne(_) | Lt | Le | Gt | Ge => Some(PREC_CMP),
        Add | Sub => Some(PREC_ADD),
        Mul => Some(PREC_MUL),
        _ => None,
    }
}

/// Binding strength of the outermost construct of `t`.
fn prec_of(t: &Term) -> u8 {
    match (t.head(), t.args().len()) {
        (Head::Sym(Symbol::Theory(TheoryOp::Int(n))), 0) if *n < 0 => PREC_APP,
        (_, 0) => PREC_ATOM,
        (Head::Sym(Symbol::Theory(TheoryOp::Not)), 1) => PREC_NOT,
        (Head::Sym(Symbol::Theory(op)), 2) => infix_prec(*op).unwrap_or(PREC_APP),
        _ => PREC_APP,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, t: &Term, min: u8) -> fmt::Result {
    if prec_of(t) < min {
        f.write_char('(')?;
        write_term(f, t)?;
        f.write_char(')')
    } else {
        write_term(f, t)
    }
}

fn write_head(f: &mut fmt::Formatter<'_>, h: &Head) -> fmt::Result {
    match h {
        Head::Var(v) => f.write_str(&v.name),
        Head::Sym(Symbol::Theory(op)) if infix_prec(*op).is_some() || *op == TheoryOp::Not => {
            write!(f, "[{}]", op.spelling())
        }
        Head::Sym(s) => f.write_str(&s.name()),
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    let args = t.args();
    if let Head::Sym(Symbol::Theory(op)) = t.head() {
        if let (Some(p), 2) = (infix_prec(*op), args.len()) {
            // Comparisons do not associate; arithmetic and connectives associate left.
            let (lmin, rmin) = if p == PREC_CMP { (p + 1, p + 1) } else { (p, p + 1) };
            write_at(f, &args[0], lmin)?;
            write!(f, " {} ", op.spelling())?;
            return write_at(f, &args[1], rmin);
        }
        if let (TheoryOp::Not, 1) = (op, args.len()) {
            f.write_str("not ")?;
            return write_at(f, &args[0], PREC_NOT);
        }
    }
    write_head(f, t.head())?;
    for a in args {
        f.write_char(' ')?;
        write_at(f, a, PREC_ATOM)?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self)
    }
}

/// `t` in argument position: parenthesized unless atomic.
pub fn atomic(t: &Term) -> String {
    let mut s = String::new();
    struct A<'a>(&'a Term);
    impl fmt::Display for A<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_at(f, self.0, PREC_ATOM)
        }
    }
    let _ = write!(s, "{}", A(t));
    s
}
