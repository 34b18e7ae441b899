//! Text format for programs, goals and lemmas.
//!
//! ```text
//! fun u :: Int -> Int -> Int -> Int;
//! rule u x i a -> u x (i + 1) (i * a) [i <= x];
//! prec facRU > facTD;
//! goal facTU x ~ facRD x [x >= 1];
//! ```
//!
//! Undeclared lowercase identifiers are variables, scoped to one rule, goal
//! or lemma. Their types are inferred; `(x :: Int)` annotates when needed.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::program::{Equation, Program, Rule};
use crate::term::{EqSort, Sort, Symbol, Term, TheoryOp, Type, Var};
use crate::theory;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
struct Pos {
    line: usize,
    col: usize,
}

fn err<T>(pos: Pos, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i128),
    Hole(u32),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Hole(i) => write!(f, "`#{i}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const PUNCT: [&str; 22] = [
    "::", "->", "!=", "<=", ">=", "/\\", "\\/", "~", ";", "(", ")", "[", "]", "+", "-", "*", "=", "<", ">", ",", "{", "}",
];

fn lex(src: &str, allow_holes: bool) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let n = text.parse::<i128>().or_else(|_| err(pos, "integer literal out of range"))?;
            col += i - start;
            out.push((Tok::Int(n), pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c == '#' {
            if !allow_holes {
                return err(pos, "`#` names are reserved for hole constants");
            }
            let start = i + 1;
            i = start;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let n: u32 = chars[start..i]
                .iter()
                .collect::<String>()
                .parse()
                .or_else(|_| err(pos, "expected a hole index after `#`"))?;
            if n == 0 {
                return err(pos, "hole indices start at 1");
            }
            col += i - start + 1;
            out.push((Tok::Hole(n), pos));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match PUNCT.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                i += p.chars().count();
                col += p.chars().count();
                out.push((Tok::Punct(p), pos));
            }
            None => return err(pos, alloc::format!("unexpected character `{c}`")),
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Theory operators as written, before `=` is resolved to Int or Bool.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RawOp {
    Fixed(TheoryOp),
    Eq,
    Ne,
}

#[derive(Clone, Debug)]
enum Raw {
    Ident(String, Pos),
    Int(i128),
    Bool(bool),
    /// Operator with the slot used to resolve overloaded equality.
    Op(RawOp, Pos, usize),
    App(Box<Raw>, Vec<Raw>, Pos),
    Annot(Box<Raw>, Type, Pos),
    Hole(u32, Pos),
}

struct Parser<'a> {
    toks: &'a [(Tok, Pos)],
    at: usize,
    eq_slots: usize,
}

fn infix_op(p: &str) -> Option<RawOp> {
    use TheoryOp::*;
    Some(match p {
        "+" => RawOp::Fixed(Add),
        "-" => RawOp::Fixed(Sub),
        "*" => RawOp::Fixed(Mul),
        "=" => RawOp::Eq,
        "!=" => RawOp::Ne,
        "<" => RawOp::Fixed(Lt),
        "<=" => RawOp::Fixed(Le),
        ">" => RawOp::Fixed(Gt),
        ">=" => RawOp::Fixed(Ge),
        "/\\" => RawOp::Fixed(And),
        "\\/" => RawOp::Fixed(Or),
        _ => return None,
    })
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn expect(&mut self, p: &str) -> Result<(), ParseError> {
        if self.is_punct(p) {
            self.bump();
            Ok(())
        } else {
            err(self.pos(), alloc::format!("expected `{p}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.bump() {
            Tok::Ident(s) => Ok(s),
            t => err(
                self.toks[self.at.saturating_sub(1)].1,
                alloc::format!("expected an identifier, found {t}"),
            ),
        }
    }

    fn op_node(&mut self, op: RawOp, pos: Pos) -> Raw {
        let slot = self.eq_slots;
        self.eq_slots += 1;
        Raw::Op(op, pos, slot)
    }

    fn binary(&mut self, op: RawOp, pos: Pos, a: Raw, b: Raw) -> Raw {
        let f = self.op_node(op, pos);
        Raw::App(Box::new(f), alloc::vec![a, b], pos)
    }

    fn parse_type(&mut self) -> Result<Type, ParseError> {
        let pos = self.pos();
        let left = if self.is_punct("(") {
            self.bump();
            let t = self.parse_type()?;
            self.expect(")")?;
            t
        } else {
            match self.ident()?.as_str() {
                "Int" => Type::INT,
                "Bool" => Type::BOOL,
                s if s.starts_with(|c: char| c.is_uppercase()) => Type::Base(Sort::User(s.into())),
                s => return err(pos, alloc::format!("sort names start with an uppercase letter, found `{s}`")),
            }
        };
        if self.is_punct("->") {
            self.bump();
            Ok(Type::arrow(left, self.parse_type()?))
        } else {
            Ok(left)
        }
    }

    fn term(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.conj()?;
        while self.is_punct("\\/") {
            let pos = self.pos();
            self.bump();
            let rhs = self.conj()?;
            lhs = self.binary(RawOp::Fixed(TheoryOp::Or), pos, lhs, rhs);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.negation()?;
        while self.is_punct("/\\") {
            let pos = self.pos();
            self.bump();
            let rhs = self.negation()?;
            lhs = self.binary(RawOp::Fixed(TheoryOp::And), pos, lhs, rhs);
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<Raw, ParseError> {
        if matches!(self.peek(), Tok::Ident(s) if s == "not") {
            let pos = self.pos();
            self.bump();
            let inner = self.negation()?;
            let f = self.op_node(RawOp::Fixed(TheoryOp::Not), pos);
            return Ok(Raw::App(Box::new(f), alloc::vec![inner], pos));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Raw, ParseError> {
        let lhs = self.sum()?;
        let op = match self.peek() {
            Tok::Punct(p) if matches!(*p, "=" | "!=" | "<" | "<=" | ">" | ">=") => infix_op(p),
            _ => None,
        };
        let Some(op) = op else { return Ok(lhs) };
        let pos = self.pos();
        self.bump();
        let rhs = self.sum()?;
        if matches!(self.peek(), Tok::Punct(p) if matches!(*p, "=" | "!=" | "<" | "<=" | ">" | ">=")) {
            return err(self.pos(), "comparisons do not chain; use /\\");
        }
        Ok(self.binary(op, pos, lhs, rhs))
    }

    fn sum(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.product()?;
        while self.is_punct("+") || self.is_punct("-") {
            let pos = self.pos();
            let op = if self.is_punct("+") { TheoryOp::Add } else { TheoryOp::Sub };
            self.bump();
            let rhs = self.product()?;
            lhs = self.binary(RawOp::Fixed(op), pos, lhs, rhs);
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Raw, ParseError> {
        let mut lhs = self.application()?;
        while self.is_punct("*") {
            let pos = self.pos();
            self.bump();
            let rhs = self.application()?;
            lhs = self.binary(RawOp::Fixed(TheoryOp::Mul), pos, lhs, rhs);
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => s != "not",
            Tok::Int(_) | Tok::Hole(_) => true,
            Tok::Punct("(") => true,
            Tok::Punct("[") => self.bracket_op().is_some(),
            _ => false,
        }
    }

    /// `[op]` prefix form, recognized by two tokens of lookahead.
    fn bracket_op(&self) -> Option<RawOp> {
        if !matches!(self.peek_at(2), Tok::Punct("]")) {
            return None;
        }
        match self.peek_at(1) {
            Tok::Punct(p) => infix_op(p),
            Tok::Ident(s) if s == "not" => Some(RawOp::Fixed(TheoryOp::Not)),
            _ => None,
        }
    }

    fn application(&mut self) -> Result<Raw, ParseError> {
        let pos = self.pos();
        // A leading minus directly before a literal is a negative literal.
        if self.is_punct("-") {
            if let Tok::Int(n) = *self.peek_at(1) {
                self.bump();
                self.bump();
                return Ok(Raw::Int(-n));
            }
            return err(pos, "unexpected `-`; write `0 - e` or a negative literal");
        }
        let head = self.atom()?;
        let mut args = Vec::new();
        while self.starts_atom() {
            args.push(self.atom()?);
        }
        Ok(if args.is_empty() {
            head
        } else {
            Raw::App(Box::new(head), args, pos)
        })
    }

    fn atom(&mut self) -> Result<Raw, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Raw::Int(n))
            }
            Tok::Hole(i) => {
                self.bump();
                Ok(Raw::Hole(i, pos))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(match s.as_str() {
                    "true" => Raw::Bool(true),
                    "false" => Raw::Bool(false),
                    _ => Raw::Ident(s, pos),
                })
            }
            Tok::Punct("[") => match self.bracket_op() {
                Some(op) => {
                    self.bump();
                    self.bump();
                    self.bump();
                    Ok(self.op_node(op, pos))
                }
                None => err(pos, "expected a bracketed operator such as `[*]`"),
            },
            Tok::Punct("(") => {
                self.bump();
                if self.is_punct("-") {
                    if let (Tok::Int(n), Tok::Punct(")")) = (self.peek_at(1).clone(), self.peek_at(2).clone()) {
                        self.bump();
                        self.bump();
                        self.bump();
                        return Ok(Raw::Int(-n));
                    }
                }
                let inner = self.term()?;
                if self.is_punct("::") {
                    self.bump();
                    let ty = self.parse_type()?;
                    self.expect(")")?;
                    return Ok(Raw::Annot(Box::new(inner), ty, pos));
                }
                self.expect(")")?;
                Ok(inner)
            }
            t => err(pos, alloc::format!("expected a term, found {t}")),
        }
    }

    fn constraint(&mut self) -> Result<Option<Raw>, ParseError> {
        if self.is_punct("[") {
            self.bump();
            let c = self.term()?;
            self.expect("]")?;
            Ok(Some(c))
        } else {
            Ok(None)
        }
    }
}

/// Inference types with metavariables.
#[derive(Clone, Debug, PartialEq, Eq)]
enum IType {
    Meta(usize),
    Base(Sort),
    Arrow(Box<IType>, Box<IType>),
}

impl IType {
    fn from(t: &Type) -> IType {
        match t {
            Type::Base(s) => IType::Base(s.clone()),
            Type::Arrow(a, b) => IType::Arrow(Box::new(IType::from(a)), Box::new(IType::from(b))),
        }
    }
}

struct Infer<'a> {
    program: &'a Program,
    holes: &'a [Type],
    metas: Vec<Option<IType>>,
    vars: BTreeMap<String, IType>,
    eq_slots: BTreeMap<usize, IType>,
}

impl<'a> Infer<'a> {
    fn fresh(&mut self) -> IType {
        self.metas.push(None);
        IType::Meta(self.metas.len() - 1)
    }

    fn resolve(&self, t: &IType) -> IType {
        match t {
            IType::Meta(m) => match &self.metas[*m] {
                Some(u) => self.resolve(u),
                None => t.clone(),
            },
            IType::Arrow(a, b) => IType::Arrow(Box::new(self.resolve(a)), Box::new(self.resolve(b))),
            _ => t.clone(),
        }
    }

    fn occurs(&self, m: usize, t: &IType) -> bool {
        match self.resolve(t) {
            IType::Meta(n) => n == m,
            IType::Arrow(a, b) => self.occurs(m, &a) || self.occurs(m, &b),
            IType::Base(_) => false,
        }
    }

    fn unify(&mut self, a: &IType, b: &IType) -> bool {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (IType::Meta(m), IType::Meta(n)) if m == n => true,
            (IType::Meta(m), t) | (t, IType::Meta(m)) => {
                if self.occurs(*m, t) {
                    return false;
                }
                self.metas[*m] = Some(t.clone());
                true
            }
            (IType::Base(s), IType::Base(t)) => s == t,
            (IType::Arrow(a1, b1), IType::Arrow(a2, b2)) => self.unify(a1, a2) && self.unify(b1, b2),
            _ => false,
        }
    }

    fn show(&self, t: &IType) -> String {
        match self.resolve(t) {
            IType::Meta(_) => "?".into(),
            IType::Base(s) => s.to_string(),
            IType::Arrow(a, b) => {
                let a_s = self.show(&a);
                if matches!(*a, IType::Arrow(..)) {
                    alloc::format!("({a_s}) -> {}", self.show(&b))
                } else {
                    alloc::format!("{a_s} -> {}", self.show(&b))
                }
            }
        }
    }

    fn infer(&mut self, r: &Raw) -> Result<IType, ParseError> {
        Ok(match r {
            Raw::Int(_) => IType::Base(Sort::Int),
            Raw::Bool(_) => IType::Base(Sort::Bool),
            Raw::Hole(i, pos) => match self.holes.get(*i as usize - 1) {
                Some(t) => IType::from(t),
                None => return err(*pos, alloc::format!("hole #{i} is not in scope")),
            },
            Raw::Ident(name, pos) => {
                if let Some(s) = self.program.lookup(name) {
                    IType::from(&s.ty())
                } else if let Some(t) = self.vars.get(name) {
                    t.clone()
                } else if name.starts_with(|c: char| c.is_lowercase() || c == '_') {
                    let t = self.fresh();
                    self.vars.insert(name.clone(), t.clone());
                    t
                } else {
                    return err(*pos, alloc::format!("unknown symbol `{name}`"));
                }
            }
            Raw::Op(RawOp::Fixed(op), _, _) => IType::from(&op.ty()),
            Raw::Op(_, _, slot) => {
                let a = self.fresh();
                self.eq_slots.insert(*slot, a.clone());
                IType::Arrow(
                    Box::new(a.clone()),
                    Box::new(IType::Arrow(Box::new(a), Box::new(IType::Base(Sort::Bool)))),
                )
            }
            Raw::Annot(inner, ty, pos) => {
                let t = self.infer(inner)?;
                let want = IType::from(ty);
                if !self.unify(&t, &want) {
                    return err(*pos, alloc::format!("annotated as {ty} but has type {}", self.show(&t)));
                }
                want
            }
            Raw::App(f, args, pos) => {
                let mut tf = self.infer(f)?;
                for a in args {
                    let ta = self.infer(a)?;
                    let r = self.fresh();
                    let want = IType::Arrow(Box::new(ta.clone()), Box::new(r.clone()));
                    if !self.unify(&tf, &want) {
                        let shown = self.show(&tf);
                        return match self.resolve(&tf) {
                            IType::Arrow(expected, _) => err(
                                *pos,
                                alloc::format!("argument has type {}, expected {}", self.show(&ta), self.show(&expected)),
                            ),
                            _ => err(*pos, alloc::format!("a term of type {shown} cannot be applied to an argument")),
                        };
                    }
                    tf = r;
                }
                tf
            }
        })
    }

    fn ground(&self, t: &IType) -> Option<Type> {
        match self.resolve(t) {
            IType::Meta(_) => None,
            IType::Base(s) => Some(Type::Base(s)),
            IType::Arrow(a, b) => Some(Type::arrow(self.ground(&a)?, self.ground(&b)?)),
        }
    }

    fn elaborate(&self, r: &Raw, vars: &BTreeMap<String, Var>) -> Result<Term, ParseError> {
        match r {
            Raw::Int(n) => Ok(Term::int(*n)),
            Raw::Bool(b) => Ok(Term::bool(*b)),
            Raw::Hole(i, _) => Ok(Term::sym(Symbol::Hole(*i, self.holes[*i as usize - 1].clone()))),
            Raw::Ident(name, _) => Ok(match self.program.lookup(name) {
                Some(s) => Term::sym(s),
                None => Term::var(vars[name].clone()),
            }),
            Raw::Op(RawOp::Fixed(op), _, _) => Ok(Term::sym(Symbol::Theory(*op))),
            Raw::Op(kind, pos, slot) => {
                let sort = match self.ground(&self.eq_slots[slot]) {
                    Some(t) if t == Type::INT => EqSort::Int,
                    Some(t) if t == Type::BOOL => EqSort::Bool,
                    Some(t) => return err(*pos, alloc::format!("equality compares Int or Bool values, not {t}")),
                    None => return err(*pos, "cannot tell whether this equality compares Int or Bool; annotate an operand"),
                };
                let op = if *kind == RawOp::Eq {
                    TheoryOp::Eq(sort)
                } else {
                    TheoryOp::Ne(sort)
                };
                Ok(Term::sym(Symbol::Theory(op)))
            }
            Raw::Annot(inner, _, _) => self.elaborate(inner, vars),
            Raw::App(f, args, pos) => {
                let head = self.elaborate(f, vars)?;
                let args = args.iter().map(|a| self.elaborate(a, vars)).collect::<Result<Vec<_>, _>>()?;
                head.apply(&args).or_else(|e| err(*pos, e.to_string()))
            }
        }
    }
}

/// Types a group of raw terms sharing one variable scope. `expect` pins the
/// type of individual items (e.g. a constraint must be Bool).
fn type_group(
    program: &Program,
    holes: &[Type],
    env: &BTreeMap<String, Type>,
    items: &[(&Raw, Option<Type>, Pos)],
    same_type: bool,
) -> Result<Vec<Term>, ParseError> {
    let mut inf = Infer {
        program,
        holes,
        metas: Vec::new(),
        vars: env.iter().map(|(k, t)| (k.clone(), IType::from(t))).collect(),
        eq_slots: BTreeMap::new(),
    };
    let mut types = Vec::new();
    for (raw, want, pos) in items {
        let t = inf.infer(raw)?;
        if let Some(w) = want {
            if !inf.unify(&t, &IType::from(w)) {
                return err(*pos, alloc::format!("expected type {w}, found {}", inf.show(&t)));
            }
        }
        types.push((t, *pos));
    }
    if same_type && types.len() >= 2 {
        let (first, _) = types[0].clone();
        let (second, pos) = types[1].clone();
        if !inf.unify(&first, &second) {
            return err(
                pos,
                alloc::format!("the two sides have types {} and {}", inf.show(&first), inf.show(&second)),
            );
        }
    }
    let mut vars = BTreeMap::new();
    for (name, t) in &inf.vars {
        match inf.ground(t) {
            Some(ty) => {
                vars.insert(name.clone(), Var::new(name, ty));
            }
            None => {
                let pos = items.first().map(|i| i.2).unwrap_or_default();
                return err(
                    pos,
                    alloc::format!("cannot infer the type of `{name}`; annotate it, e.g. `({name} :: Int)`"),
                );
            }
        }
    }
    items.iter().map(|(raw, _, _)| inf.elaborate(raw, &vars)).collect()
}

/// Parses a whole program. Rules are checked for well-formedness as they are read.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut program = Program::new();
    parse_into(&mut program, src)?;
    Ok(program)
}

/// Reads further declarations into an existing program.
pub fn parse_into(program: &mut Program, src: &str) -> Result<(), ParseError> {
    let program = &mut *program;
    let toks = lex(src, false)?;
    let mut at = 0;
    loop {
        let mut p = Parser {
            toks: &toks,
            at,
            eq_slots: 0,
        };
        let pos = p.pos();
        let kw = match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(s) => s,
            t => return err(pos, alloc::format!("expected `fun`, `rule`, `goal`, `lemma` or `prec`, found {t}")),
        };
        p.bump();
        match kw.as_str() {
            "fun" => {
                let mut names = alloc::vec![(p.ident()?, pos)];
                while p.is_punct(",") {
                    p.bump();
                    let np = p.pos();
                    names.push((p.ident()?, np));
                }
                p.expect("::")?;
                let ty = p.parse_type()?;
                p.expect(";")?;
                at = p.at;
                for (name, npos) in names {
                    if matches!(name.as_str(), "fun" | "rule" | "goal" | "lemma" | "prec" | "not" | "true" | "false") {
                        return err(npos, alloc::format!("`{name}` is a keyword"));
                    }
                    program.declare(&name, ty.clone()).or_else(|e| err(npos, e.to_string()))?;
                }
            }
            "prec" => {
                let mut chain = alloc::vec![p.ident()?];
                while p.is_punct(">") {
                    p.bump();
                    chain.push(p.ident()?);
                }
                p.expect(";")?;
                at = p.at;
                for name in &chain {
                    if program.lookup(name).is_none() {
                        return err(pos, alloc::format!("unknown symbol `{name}` in precedence"));
                    }
                }
                for w in chain.windows(2) {
                    program.precedence.push((w[0].as_str().into(), w[1].as_str().into()));
                }
            }
            "rule" | "goal" | "lemma" => {
                let lpos = p.pos();
                let lhs = p.term()?;
                let sep = if kw == "rule" { "->" } else { "~" };
                p.expect(sep)?;
                let rpos = p.pos();
                let rhs = p.term()?;
                let cpos = p.pos();
                let c = p.constraint()?;
                p.expect(";")?;
                at = p.at;
                let truth = Raw::Bool(true);
                let c = c.unwrap_or(truth);
                let terms = type_group(
                    &program,
                    &[],
                    &BTreeMap::new(),
                    &[(&lhs, None, lpos), (&rhs, None, rpos), (&c, Some(Type::BOOL), cpos)],
                    true,
                )?;
                let [l, r, c]: [Term; 3] = terms.try_into().expect("three items");
                if kw == "rule" {
                    let rule = Rule::new(l, r, c).or_else(|e| err(pos, e.to_string()))?;
                    program.add_rule(rule).or_else(|e| err(pos, e.to_string()))?;
                } else {
                    let eq = Equation::new(l, r, c).or_else(|e| err(pos, e.to_string()))?;
                    if kw == "goal" {
                        program.goals.push(eq);
                    } else {
                        program.lemmas.push(eq);
                    }
                }
            }
            other => return err(pos, alloc::format!("unknown declaration `{other}`")),
        }
    }
    Ok(())
}

/// Parses one term against `program`. Variables in `env` keep their types;
/// other lowercase identifiers become fresh variables. `holes[i-1]` types `#i`.
pub fn parse_term(program: &Program, src: &str, env: &BTreeMap<String, Type>, holes: &[Type]) -> Result<Term, ParseError> {
    let toks = lex(src, !holes.is_empty())?;
    let mut p = Parser {
        toks: &toks,
        at: 0,
        eq_slots: 0,
    };
    let pos = p.pos();
    let raw = p.term()?;
    if *p.peek() != Tok::Eof {
        return err(p.pos(), alloc::format!("unexpected {} after term", p.peek()));
    }
    let mut out = type_group(program, holes, env, &[(&raw, None, pos)], false)?;
    Ok(out.remove(0))
}

/// Parses `s ~ t [c]` (constraint optional) in one variable scope.
pub fn parse_equation(program: &Program, src: &str, env: &BTreeMap<String, Type>, holes: &[Type]) -> Result<Equation, ParseError> {
    let toks = lex(src, !holes.is_empty())?;
    let mut p = Parser {
        toks: &toks,
        at: 0,
        eq_slots: 0,
    };
    let lpos = p.pos();
    let lhs = p.term()?;
    p.expect("~")?;
    let rpos = p.pos();
    let rhs = p.term()?;
    let cpos = p.pos();
    let c = p.constraint()?.unwrap_or(Raw::Bool(true));
    if *p.peek() != Tok::Eof {
        return err(p.pos(), alloc::format!("unexpected {} after equation", p.peek()));
    }
    let terms = type_group(
        program,
        holes,
        env,
        &[(&lhs, None, lpos), (&rhs, None, rpos), (&c, Some(Type::BOOL), cpos)],
        true,
    )?;
    let [l, r, c]: [Term; 3] = terms.try_into().expect("three items");
    Equation::new(l, r, c).or_else(|e| err(lpos, e.to_string()))
}

/// Parses a constraint (a Bool term) in the given variable scope.
pub fn parse_constraint(program: &Program, src: &str, env: &BTreeMap<String, Type>) -> Result<Term, ParseError> {
    let t = parse_term(program, src, env, &[])?;
    if *t.ty() != Type::BOOL || !theory::is_constraint(&t) {
        return err(Pos { line: 1, col: 1 }, alloc::format!("`{t}` is not a constraint"));
    }
    Ok(t)
}

/// Variable typing environment of an equation, for parsing terms that refer to it.
pub fn env_of(vars: impl IntoIterator<Item = Var>) -> BTreeMap<String, Type> {
    vars.into_iter().map(|v| (v.name.to_string(), v.ty)).collect()
}
