#![allow(dead_code)]

use std::collections::BTreeMap;

use lcri_core::parse::parse_program;
use lcri_core::Program;

pub const FACTORIAL: &str = include_str!("../../../../corpus/factorial.lcstrs");
pub const FUNFAC: &str = include_str!("../../../../corpus/funfac.lcstrs");

pub fn factorial() -> Program {
    parse_program(FACTORIAL).expect("factorial corpus parses")
}

pub fn funfac() -> Program {
    parse_program(FUNFAC).expect("funfac corpus parses")
}

/// n! by direct arithmetic.
pub fn fact(n: i128) -> i128 {
    (1..=n).product()
}

/// Source with the `k`-th `rule` line removed.
pub fn without_rule(src: &str, k: usize) -> String {
    let mut seen = 0;
    let mut out = String::new();
    for line in src.lines() {
        if line.trim_start().starts_with("rule") {
            seen += 1;
            if seen - 1 == k {
                continue;
            }
        }
        out.push_str(line);
        out.push('\n');
    }
    out
}

pub fn rule_lines(src: &str) -> usize {
    src.lines().filter(|l| l.trim_start().starts_with("rule")).count()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Val {
    I(i128),
    B(bool),
}

/// Evaluator for constraint text, written independently of the library:
/// `/\ \/ not = != < <= > >= + - *`, integer literals, `true`, `false`,
/// parentheses and variables looked up in `env`.
pub fn eval_text(src: &str, env: &BTreeMap<String, Val>) -> Result<Val, String> {
    let toks = lex(src)?;
    let mut p = Ev { toks, pos: 0, env };
    let v = p.or()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing input at token {}", p.pos));
    }
    Ok(v)
}

fn lex(src: &str) -> Result<Vec<String>, String> {
    let cs: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let s = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_' || cs[i] == '\'') {
                i += 1;
            }
            out.push(cs[s..i].iter().collect());
        } else {
            let two: String = cs[i..(i + 2).min(cs.len())].iter().collect();
            if ["/\\", "\\/", "!=", "<=", ">="].contains(&two.as_str()) {
                out.push(two);
                i += 2;
            } else if "()+-*=<>".contains(c) {
                out.push(c.to_string());
                i += 1;
            } else {
                return Err(format!("unexpected `{c}`"));
            }
        }
    }
    Ok(out)
}

struct Ev<'a> {
    toks: Vec<String>,
    pos: usize,
    env: &'a BTreeMap<String, Val>,
}

impl Ev<'_> {
    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(String::as_str)
    }

    fn eat(&mut self, t: &str) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Val, String> {
        let mut v = self.and()?;
        while self.eat("\\/") {
            let w = self.and()?;
            v = Val::B(b(v)? | b(w)?);
        }
        Ok(v)
    }

    fn and(&mut self) -> Result<Val, String> {
        let mut v = self.not()?;
        while self.eat("/\\") {
            let w = self.not()?;
            v = Val::B(b(v)? & b(w)?);
        }
        Ok(v)
    }

    fn not(&mut self) -> Result<Val, String> {
        if self.eat("not") {
            return Ok(Val::B(!b(self.not()?)?));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> Result<Val, String> {
        let l = self.sum()?;
        let op = match self.peek() {
            Some(o @ ("=" | "!=" | "<" | "<=" | ">" | ">=")) => o.to_string(),
            _ => return Ok(l),
        };
        self.pos += 1;
        let r = self.sum()?;
        Ok(Val::B(match (op.as_str(), l, r) {
            ("=", x, y) => x == y,
            ("!=", x, y) => x != y,
            ("<", Val::I(x), Val::I(y)) => x < y,
            ("<=", Val::I(x), Val::I(y)) => x <= y,
            (">", Val::I(x), Val::I(y)) => x > y,
            (">=", Val::I(x), Val::I(y)) => x >= y,
            _ => return Err("ill-typed comparison".into()),
        }))
    }

    fn sum(&mut self) -> Result<Val, String> {
        let mut v = self.prod()?;
        loop {
            if self.eat("+") {
                v = Val::I(i(v)? + i(self.prod()?)?);
            } else if self.eat("-") {
                v = Val::I(i(v)? - i(self.prod()?)?);
            } else {
                return Ok(v);
            }
        }
    }

    fn prod(&mut self) -> Result<Val, String> {
        let mut v = self.atom()?;
        while self.eat("*") {
            v = Val::I(i(v)? * i(self.atom()?)?);
        }
        Ok(v)
    }

    fn atom(&mut self) -> Result<Val, String> {
        let t = self.peek().ok_or("unexpected end")?.to_string();
        self.pos += 1;
        if t == "(" {
            let v = self.or()?;
            if !self.eat(")") {
                return Err("missing `)`".into());
            }
            return Ok(v);
        }
        if t == "true" {
            return Ok(Val::B(true));
        }
        if t == "false" {
            return Ok(Val::B(false));
        }
        if let Ok(n) = t.parse::<i128>() {
            return Ok(Val::I(n));
        }
        self.env.get(&t).copied().ok_or_else(|| format!("unbound `{t}`"))
    }
}

fn b(v: Val) -> Result<bool, String> {
    match v {
        Val::B(x) => Ok(x),
        _ => Err("expected a boolean".into()),
    }
}

fn i(v: Val) -> Result<i128, String> {
    match v {
        Val::I(x) => Ok(x),
        _ => Err("expected an integer".into()),
    }
}

pub const INT_VARS: &[&str] = &[
    "a", "b", "c", "i", "j", "k", "m", "n", "w", "x", "y", "z", "x1", "x2", "y1", "y2", "i1", "z1",
];
pub const BOOL_VARS: &[&str] = &["p", "q"];

#[derive(Clone, Debug)]
pub enum Expect {
    Valid(bool),
    Sat(bool),
    Entails(bool),
}

#[derive(Clone, Debug)]
pub struct LiaCase {
    pub line: usize,
    pub expect: Expect,
    pub premise: Option<String>,
    pub formula: String,
}

pub fn lia_cases() -> Vec<LiaCase> {
    let text = include_str!("../data/lia_cases.txt");
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (kind, rest) = line.split_once('|').expect("kind | formula");
        let rest = rest.trim();
        let (expect, premise, formula) = match kind.trim() {
            "valid" => (Expect::Valid(true), None, rest),
            "invalid" => (Expect::Valid(false), None, rest),
            "sat" => (Expect::Sat(true), None, rest),
            "unsat" => (Expect::Sat(false), None, rest),
            k @ ("entails" | "not-entails") => {
                let (a, c) = rest.split_once("|-").expect("premise |- conclusion");
                (Expect::Entails(k == "entails"), Some(a.trim().to_string()), c.trim())
            }
            other => panic!("line {}: unknown kind {other}", k + 1),
        };
        out.push(LiaCase {
            line: k + 1,
            expect,
            premise,
            formula: formula.to_string(),
        });
    }
    out
}

pub fn lia_env() -> BTreeMap<String, lcri_core::Type> {
    let mut env = BTreeMap::new();
    for v in INT_VARS {
        env.insert(v.to_string(), lcri_core::Type::INT);
    }
    for v in BOOL_VARS {
        env.insert(v.to_string(), lcri_core::Type::BOOL);
    }
    env
}
