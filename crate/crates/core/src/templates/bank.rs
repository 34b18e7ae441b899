//! Equivalences between recursors, with stored proof scripts.
//!
//! Statements, axioms and requirements are kept as text with `#1`, `#2`
//! standing for the context functions. Scripts use a small line format:
//!
//! ```text
//! induct | delete | case <constraint> | lemma <equation>
//! simp L|R <pos> <recursor>.b|<recursor>.r
//! calc L|R <pos> <fresh name>
//! hyp  L|R <pos> H<n>|A<n> ->|<- [var=term ...]
//! hdelete H<n>|A<n>
//! ```
//!
//! Every step acts on goal 0; `<pos>` is `-` for the root or dotted indices.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::kernel::{Direction, HypRef, ProofStep, Side, Using};
use crate::order::Requirement;
use crate::parse;
use crate::program::{Equation, Program};

use super::recursors::recursor_rule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaId {
    TailupRecdn,
    TaildnRecup,
    TailupTaildn,
    TaildnRecdn,
    TailupRecup,
    RecupRecdn,
}

impl LemmaId {
    pub fn name(self) -> &'static str {
        match self {
            LemmaId::TailupRecdn => "tailup-recdn",
            LemmaId::TaildnRecup => "taildn-recup",
            LemmaId::TailupTaildn => "tailup-taildn",
            LemmaId::TaildnRecdn => "taildn-recdn",
            LemmaId::TailupRecup => "tailup-recup",
            LemmaId::RecupRecdn => "recup-recdn",
        }
    }
}

impl core::fmt::Display for LemmaId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// One bank entry. `holes == 0` means the statement is over a variable `f`
/// and needs no instantiation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursorLemma {
    pub id: LemmaId,
    pub holes: usize,
    pub equation: &'static str,
    pub axioms: &'static [&'static str],
    /// Requirements as `lhs ~ rhs [constraint]`, read as `lhs > rhs`.
    pub requirements: &'static [&'static str],
    pub script: &'static str,
}

const L2A: &str = "
induct; case x > y
simp L - tailup.b; simp R - recdn.b; delete
simp L - tailup.r; calc L 1 x1; hyp L - H0 ->
simp R - recdn.r; calc R 1.2 y1
induct; case x1 > y
simp L - recdn.b; simp R 1 recdn.b; delete
simp L - recdn.r; calc L 1.2 y2; simp R 1 recdn.r; calc R 1.1.2 y3; hdelete H1
";

const L2B: &str = "
induct; case y < x
simp L - taildn.b; simp R - recup.b; delete
simp L - taildn.r; calc L 2 y1; hyp L - H0 ->
simp R - recup.r; calc R 0.1 x1
induct; case x > y1
simp L - recup.b; simp R 0 recup.b; delete
simp L - recup.r; calc L 0.1 x2; simp R 0 recup.r; calc R 0.0.1 x3; hdelete H1
";

const L3_1: &str = "
induct; case x > y
simp L - tailup.b; simp R - taildn.b; delete
simp L - tailup.r; calc L 1 x1; simp R - taildn.r; calc R 2 y1; hyp L - H0 ->
induct; case y < x1
simp L - taildn.b; simp R - taildn.b; hdelete A1
simp L - taildn.r; calc L 2 y2; hyp L 3 A0 <-
simp R - taildn.r; calc R 2 y3; hdelete H1
";

const L3_2: &str = "
induct; case y < x
simp L - taildn.b; simp R - recdn.b; delete
simp L - taildn.r; calc L 2 y1; hyp L - H0 ->
simp R - recdn.r; calc R 1.2 y2
lemma recdn #1 x i (#2 a y) ~ #1 y (recdn #1 x i a) [x <= y]
induct; case i < x
simp L - recdn.b; simp R 1 recdn.b; hdelete A1
simp L - recdn.r; calc L 1.2 i1; hyp L 1 H1 ->
simp R 1 recdn.r; calc R 1.1.2 i2; hdelete A0
hdelete H1
";

const L3_3: &str = "
induct; case x > y
simp L - tailup.b; simp R - recup.b; delete
simp L - tailup.r; calc L 1 x1; hyp L - H0 ->
simp R - recup.r; calc R 0.1 x2
lemma recup #1 i y (#2 x a) ~ #1 (recup #1 i y a) x [x <= y]
induct; case i > y
simp L - recup.b; simp R 0 recup.b; hdelete A1
simp L - recup.r; calc L 0.1 i1; hyp L 0 H1 ->
simp R 0 recup.r; calc R 0.0.1 i2; hdelete A0
hdelete H1
";

const L3_4: &str = "
induct; case x > y
simp L - recup.b; simp R - recdn.b; delete
simp L - recup.r; calc L 0.1 x1; hyp L 0 H0 ->
simp R - recdn.r; calc R 1.2 y1
induct; case y < x1
simp L 0 recdn.b; simp R 1 recdn.b; hdelete A1
simp R 1 recdn.r; calc R 1.1.2 y2; hyp R 1 H1 <- x1=x1
simp L 0 recdn.r; calc L 0.1.2 y3; hdelete A0
";

const BANK: [RecursorLemma; 6] = [
    RecursorLemma {
        id: LemmaId::TailupRecdn,
        holes: 0,
        equation: "tailup f x y z ~ recdn f x y z",
        axioms: &[],
        requirements: &["tailup f x y z ~ recdn f x' y (f x z) [x <= y /\\ x' = x + 1]"],
        script: L2A,
    },
    RecursorLemma {
        id: LemmaId::TaildnRecup,
        holes: 0,
        equation: "taildn f x y z ~ recup f x y z",
        axioms: &[],
        requirements: &["taildn f x y z ~ recup f x y' (f z y) [x <= y /\\ y' = y - 1]"],
        script: L2B,
    },
    RecursorLemma {
        id: LemmaId::TailupTaildn,
        holes: 2,
        equation: "tailup #1 x y a ~ taildn #2 x y a",
        axioms: &["#1 x (#2 y z) ~ #2 (#1 x y) z", "#1 x y ~ #2 y x"],
        requirements: &[
            "tailup #1 x y a ~ taildn #2 x1 y (#1 x a) [x <= y /\\ x1 = x + 1 /\\ y1 = y - 1]",
            "taildn #2 x1 y (#1 x a) ~ taildn #2 x1 y1 (#1 x (#2 a y)) [x <= y /\\ x1 = x + 1 /\\ y1 = y - 1 /\\ x1 <= y]",
        ],
        script: L3_1,
    },
    RecursorLemma {
        id: LemmaId::TaildnRecdn,
        holes: 2,
        equation: "taildn #2 x y a ~ recdn #1 x y a",
        axioms: &["#1 x (#1 y z) ~ #1 y (#1 x z)", "#1 x y ~ #2 y x"],
        requirements: &[
            "taildn #2 x y a ~ recdn #1 x y1 (#2 a y) [x <= y /\\ y1 = y - 1]",
            "recdn #1 x y1 (#2 a y) ~ #1 y1 (#1 y (recdn #1 x y2 a)) [x <= y /\\ x <= y1 /\\ y2 = y1 - 1]",
        ],
        script: L3_2,
    },
    RecursorLemma {
        id: LemmaId::TailupRecup,
        holes: 2,
        equation: "tailup #2 x y a ~ recup #1 x y a",
        axioms: &["#1 (#1 x y) z ~ #1 (#1 x z) y", "#1 x y ~ #2 y x"],
        requirements: &[
            "tailup #2 x y a ~ recup #1 x1 y (#2 x a) [x <= y /\\ x1 = x + 1]",
            "recup #1 x1 y (#2 x a) ~ #1 (#1 (recup #1 x2 y a) x) x1 [x <= y /\\ x1 <= y /\\ x2 = x1 + 1]",
        ],
        script: L3_3,
    },
    RecursorLemma {
        id: LemmaId::RecupRecdn,
        holes: 2,
        equation: "recup #1 x y a ~ recdn #2 x y a",
        axioms: &["#1 (#2 x y) z ~ #2 x (#1 y z)", "#1 x y ~ #2 y x"],
        requirements: &[
            "recup #1 x y a ~ #1 (recdn #2 x1 y a) x [x <= y /\\ x1 = x + 1]",
            "#2 y (recdn #2 x y1 a) ~ #2 y (#1 (recdn #2 x1 y1 a) x) [x <= y /\\ x1 = x + 1 /\\ y1 = y - 1 /\\ x1 <= y]",
        ],
        script: L3_4,
    },
];

pub fn lemma_bank() -> &'static [RecursorLemma] {
    &BANK
}

pub fn lemma(id: LemmaId) -> &'static RecursorLemma {
    BANK.iter().find(|l| l.id == id).expect("every id has an entry")
}

/// Terms substituted for `#1` and `#2`, as source text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instantiation {
    pub first: String,
    pub second: String,
}

impl Instantiation {
    pub fn shared(f: &str) -> Self {
        Instantiation {
            first: String::from(f),
            second: String::from(f),
        }
    }

    pub fn apply(&self, text: &str) -> String {
        let wrap = |s: &str| {
            if s.contains(' ') && !(s.starts_with('(') && s.ends_with(')')) {
                alloc::format!("({s})")
            } else {
                String::from(s)
            }
        };
        text.replace("#1", &wrap(&self.first)).replace("#2", &wrap(&self.second))
    }
}

impl RecursorLemma {
    pub fn equation_text(&self, inst: &Instantiation) -> String {
        inst.apply(self.equation)
    }

    pub fn axiom_texts(&self, inst: &Instantiation) -> Vec<String> {
        self.axioms.iter().map(|a| inst.apply(a)).collect()
    }

    pub fn equation(&self, program: &Program, inst: &Instantiation) -> Result<Equation, String> {
        parse_eq(program, &self.equation_text(inst))
    }

    pub fn axiom_equations(&self, program: &Program, inst: &Instantiation) -> Result<Vec<Equation>, String> {
        self.axioms.iter().map(|a| parse_eq(program, &inst.apply(a))).collect()
    }

    pub fn requirement_list(&self, program: &Program, inst: &Instantiation) -> Result<Vec<Requirement>, String> {
        self.requirements
            .iter()
            .map(|r| {
                let eq = parse_eq(program, &inst.apply(r))?;
                Ok(Requirement {
                    lhs: eq.lhs,
                    rhs: eq.rhs,
                    constraint: eq.constraint,
                })
            })
            .collect()
    }

    /// The proof script for a state whose axioms `A0, A1` are this entry's
    /// axioms and whose goal 0 is the instantiated equation.
    pub fn script(&self, program: &Program, inst: &Instantiation) -> Result<Vec<ProofStep>, String> {
        compile(&inst.apply(self.script), program)
    }

    /// Steps that state, prove, and leave the instantiated equation as a
    /// hypothesis inside a larger proof whose state already has `h`
    /// hypotheses and `a` axioms. Axioms are assumed and then discharged.
    pub fn embedded(&self, program: &Program, inst: &Instantiation, h: usize, a: usize) -> Result<Vec<ProofStep>, String> {
        let mut out = Vec::new();
        for ax in self.axiom_texts(inst) {
            out.push(ProofStep::AssumeAxiom { equation: ax });
        }
        for k in 0..self.axioms.len() {
            out.push(ProofStep::DischargeAxiom { axiom: a + k });
        }
        out.push(ProofStep::AddLemma {
            equation: self.equation_text(inst),
        });
        out.extend(self.script(program, inst)?.iter().map(|s| s.relocate(0, h, a)));
        Ok(out)
    }
}

fn parse_eq(program: &Program, text: &str) -> Result<Equation, String> {
    parse::parse_equation(program, text, &BTreeMap::new(), &[]).map_err(|e| alloc::format!("{text}: {e}"))
}

fn side(s: &str) -> Result<Side, String> {
    match s {
        "L" => Ok(Side::Left),
        "R" => Ok(Side::Right),
        _ => Err(alloc::format!("bad side `{s}`")),
    }
}

fn position(s: &str) -> Result<Vec<usize>, String> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split('.')
        .map(|k| k.parse().map_err(|_| alloc::format!("bad position `{s}`")))
        .collect()
}

fn hyp_ref(s: &str) -> Result<HypRef, String> {
    let bad = || alloc::format!("bad hypothesis `{s}`");
    let n = s.get(1..).and_then(|n| n.parse().ok()).ok_or_else(bad)?;
    match s.as_bytes().first() {
        Some(b'H') => Ok(HypRef::H(n)),
        Some(b'A') => Ok(HypRef::A(n)),
        _ => Err(bad()),
    }
}

/// Compiles a script in the line format above against `program`'s rule numbering.
pub fn compile(src: &str, program: &Program) -> Result<Vec<ProofStep>, String> {
    let mut out = Vec::new();
    for raw in src.split(['\n', ';']) {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (cmd, rest) = line.split_once(' ').unwrap_or((line, ""));
        let words: Vec<&str> = rest.split_whitespace().collect();
        let need = |n: usize| {
            if words.len() < n {
                Err(alloc::format!("`{line}`: expected {n} arguments"))
            } else {
                Ok(())
            }
        };
        let step = match cmd {
            "induct" => ProofStep::Induct { target: 0 },
            "delete" => ProofStep::Delete { target: 0 },
            "case" => ProofStep::Case {
                target: 0,
                constraint: rest.trim().to_string(),
            },
            "lemma" => ProofStep::AddLemma {
                equation: rest.trim().to_string(),
            },
            "simp" => {
                need(3)?;
                let (name, kind) = words[2]
                    .split_once('.')
                    .ok_or_else(|| alloc::format!("`{line}`: expected <recursor>.b or .r"))?;
                let r = recursor_rule(program, name, kind == "r").ok_or_else(|| alloc::format!("`{line}`: no rule for {name}"))?;
                ProofStep::Simplify {
                    target: 0,
                    side: side(words[0])?,
                    position: position(words[1])?,
                    using: Using::Rule(r),
                }
            }
            "calc" => {
                need(2)?;
                ProofStep::Simplify {
                    target: 0,
                    side: side(words[0])?,
                    position: position(words[1])?,
                    using: Using::Calc {
                        fresh: words.get(2).map(|w| w.to_string()),
                    },
                }
            }
            "hyp" => {
                need(4)?;
                let direction = match words[3] {
                    "->" => Direction::LeftToRight,
                    "<-" => Direction::RightToLeft,
                    d => return Err(alloc::format!("`{line}`: bad direction `{d}`")),
                };
                let mut bind = BTreeMap::new();
                for b in &words[4..] {
                    let (v, t) = b.split_once('=').ok_or_else(|| alloc::format!("`{line}`: bad binding `{b}`"))?;
                    bind.insert(v.to_string(), t.to_string());
                }
                ProofStep::Hypothesis {
                    target: 0,
                    side: side(words[0])?,
                    position: position(words[1])?,
                    hypothesis: hyp_ref(words[2])?,
                    direction,
                    bind,
                }
            }
            "hdelete" => {
                need(1)?;
                ProofStep::HDelete {
                    target: 0,
                    hypothesis: hyp_ref(words[0])?,
                }
            }
            _ => return Err(alloc::format!("unknown script command `{cmd}`")),
        };
        out.push(step);
    }
    Ok(out)
}
