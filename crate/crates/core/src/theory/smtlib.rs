//! SMT-LIB 2 serialization of constraints and decoding of `(get-model)` output.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt::Write;

use super::Value;
use crate::term::{Head, Symbol, Term, TheoryOp, Type, Var};

fn symbol(name: &str) -> String {
    alloc::format!("|{}|", name.replace('|', "_"))
}

/// SMT-LIB rendering of a constraint.
pub fn term_to_smt(t: &Term) -> String {
    let mut out = String::new();
    write_smt(t, &mut out);
    out
}

fn write_smt(t: &Term, out: &mut String) {
    match t.head() {
        Head::Var(v) => out.push_str(&symbol(&v.name)),
        Head::Sym(Symbol::Theory(op)) => {
            use TheoryOp::*;
            let name = match op {
                Int(n) if *n < 0 => {
                    let _ = write!(out, "(- {})", n.unsigned_abs());
                    return;
                }
                Int(n) => {
                    let _ = write!(out, "{n}");
                    return;
                }
                True => "true",
                False => "false",
                Add => "+",
                Sub => "-",
                Mul => "*",
                Eq(_) => "=",
                Ne(_) => "distinct",
                Lt => "<",
                Le => "<=",
                Gt => ">",
                Ge => ">=",
                And => "and",
                Or => "or",
                Not => "not",
            };
            if t.args().is_empty() {
                out.push_str(name);
            } else {
                out.push('(');
                out.push_str(name);
                for a in t.args() {
                    out.push(' ');
                    write_smt(a, out);
                }
                out.push(')');
            }
        }
        Head::Sym(s) => out.push_str(&symbol(&s.name())),
    }
}

/// Script checking validity of `phi`: `unsat` means valid, a model is a counterexample.
pub fn validity_script(phi: &Term) -> String {
    let mut s = String::from("(set-option :produce-models true)\n(set-logic QF_NIA)\n");
    let vars: BTreeSet<Var> = phi.vars();
    for v in &vars {
        let sort = if v.ty == Type::BOOL { "Bool" } else { "Int" };
        let _ = writeln!(s, "(declare-const {} {})", symbol(&v.name), sort);
    }
    let _ = writeln!(s, "(assert (not {}))", term_to_smt(phi));
    s.push_str("(check-sat)\n(get-model)\n");
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Option<Vec<String>> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' | ')' => {
                toks.push(c.to_string());
                chars.next();
            }
            '|' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next()? {
                        '|' => break,
                        ch => s.push(ch),
                    }
                }
                toks.push(s);
            }
            ';' => while chars.next().is_some_and(|ch| ch != '\n') {},
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || ch == '(' || ch == ')' {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                toks.push(s);
            }
        }
    }
    Some(toks)
}

fn parse_sexps(toks: &[String]) -> Option<Vec<Sexp>> {
    let mut stack: Vec<Vec<Sexp>> = alloc::vec![Vec::new()];
    for t in toks {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let done = stack.pop()?;
                stack.last_mut()?.push(Sexp::List(done));
            }
            _ => stack.last_mut()?.push(Sexp::Atom(t.clone())),
        }
    }
    if stack.len() != 1 {
        return None;
    }
    stack.pop()
}

fn value_of(e: &Sexp) -> Option<Value> {
    match e {
        Sexp::Atom(a) if a == "true" => Some(Value::Bool(true)),
        Sexp::Atom(a) if a == "false" => Some(Value::Bool(false)),
        Sexp::Atom(a) => a.parse::<i128>().ok().map(Value::Int),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(m), inner] if m == "-" => match value_of(inner)? {
                Value::Int(n) => Some(Value::Int(-n)),
                Value::Bool(_) => None,
            },
            _ => None,
        },
    }
}

fn collect_defs(e: &Sexp, out: &mut BTreeMap<Arc<str>, Value>) -> Option<()> {
    if let Sexp::List(items) = e {
        if let [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(params), _sort, body] = items.as_slice() {
            if kw == "define-fun" && params.is_empty() {
                out.insert(name.as_str().into(), value_of(body)?);
                return Some(());
            }
        }
        for i in items {
            collect_defs(i, out)?;
        }
    }
    Some(())
}

/// Decode a `(get-model)` response. Unparseable text yields `None`.
pub fn parse_model(text: &str) -> Option<BTreeMap<Arc<str>, Value>> {
    let sexps = parse_sexps(&tokenize(text)?)?;
    let mut out = BTreeMap::new();
    for e in &sexps {
        collect_defs(e, &mut out)?;
    }
    Some(out)
}

/// Classify the first line of solver output.
pub fn parse_status(text: &str) -> Option<&'static str> {
    match text.split_whitespace().next()? {
        "sat" => Some("sat"),
        "unsat" => Some("unsat"),
        "unknown" => Some("unknown"),
        _ => None,
    }
}
