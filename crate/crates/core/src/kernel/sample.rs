//! Post-hoc soundness sampling of completed proofs.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::order::RECURSOR_RANKS;
use crate::program::{Equation, Program, Rule};
use crate::rewrite::normalize;
use crate::term::{Substitution, Symbol, Term, Type, Var};
use crate::theory::{self, eval_ground, Solver, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    pub samples: usize,
    /// Integer variables are drawn from `lo..=hi`.
    pub lo: i128,
    pub hi: i128,
    pub seed: u64,
    pub fuel: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            samples: 50,
            lo: -20,
            hi: 20,
            seed: 0,
            fuel: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Both sides normalized to different terms under `assignment`.
    Mismatch {
        assignment: Vec<(String, String)>,
        lhs: String,
        rhs: String,
    },
    NoNormalForm {
        assignment: Vec<(String, String)>,
    },
    Unsupported(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |a: &[(String, String)]| -> String {
            let parts: Vec<String> = a.iter().map(|(v, t)| alloc::format!("{v} := {t}")).collect();
            parts.join(", ")
        };
        match self {
            Violation::Mismatch { assignment, lhs, rhs } => {
                write!(f, "under {{{}}} the sides normalize to {lhs} and {rhs}", show(assignment))
            }
            Violation::NoNormalForm { assignment } => write!(f, "no normal form under {{{}}}", show(assignment)),
            Violation::Unsupported(why) => write!(f, "cannot sample: {why}"),
        }
    }
}

/// True iff no recursor symbol occurs in the equation.
pub fn recursor_free(eq: &Equation) -> bool {
    let has = |t: &Term| {
        t.contains_symbol(&|s| match s {
            Symbol::Fun(f) => RECURSOR_RANKS.iter().any(|(n, _)| *n == &*f.name),
            _ => false,
        })
    };
    !has(&eq.lhs) && !has(&eq.rhs)
}

fn int_function_arity(ty: &Type) -> Option<usize> {
    let (args, res) = ty.uncurry();
    (res == &crate::term::Sort::Int && !args.is_empty() && args.iter().all(|a| **a == Type::INT)).then_some(args.len())
}

/// Draws ground instances of `goal` respecting its constraint and checks
/// that both sides reach the same normal form. Function variables over
/// integers are instantiated by fresh symbols defined as random affine maps.
/// Returns the number of instances checked.
pub fn sample_soundness(program: &Program, solver: &Solver, goal: &Equation, cfg: &SampleConfig) -> Result<usize, Violation> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vars: Vec<Var> = goal.vars().into_iter().collect();
    for v in &vars {
        if v.ty != Type::INT && v.ty != Type::BOOL && int_function_arity(&v.ty).is_none() {
            return Err(Violation::Unsupported(alloc::format!("variable `{}` of type {}", v.name, v.ty)));
        }
    }
    let mut checked = 0;
    let mut attempts = 0;
    while checked < cfg.samples && attempts < cfg.samples * 200 {
        attempts += 1;
        let mut p = program.clone();
        let mut gamma = Substitution::new();
        let mut shown = Vec::new();
        for v in &vars {
            let t = if v.ty == Type::INT {
                Term::int(rng.random_range(cfg.lo..=cfg.hi))
            } else if v.ty == Type::BOOL {
                Term::bool(rng.random_bool(0.5))
            } else {
                let k = int_function_arity(&v.ty).expect("checked above");
                let name = p.fresh_symbol_name(&v.name);
                let sym = p.declare(&name, v.ty.clone()).expect("fresh name");
                let params: Vec<Term> = (0..k).map(|i| Term::var(Var::new(&alloc::format!("x{i}"), Type::INT))).collect();
                let mut body = Term::int(rng.random_range(-2..=2));
                let mut text = body.to_string();
                for x in &params {
                    let c: i128 = rng.random_range(-2..=2);
                    body = theory::add(body, theory::mul(Term::int(c), x.clone()));
                    text = alloc::format!("{text} + {c}*{x}");
                }
                let lhs = Term::sym(sym.clone()).apply(&params).expect("well typed");
                p.add_rule(Rule::new(lhs, body, theory::truth()).expect("well formed"))
                    .expect("fresh symbol");
                shown.push((v.name.to_string(), alloc::format!("\\{}. {text}", params.len())));
                let _ = gamma.insert(v.clone(), Term::sym(sym));
                continue;
            };
            shown.push((v.name.to_string(), t.to_string()));
            let _ = gamma.insert(v.clone(), t);
        }
        if !matches!(eval_ground(&goal.constraint.subst(&gamma)), Ok(Value::Bool(true))) {
            continue;
        }
        let l = normalize(&p, solver, &goal.lhs.subst(&gamma), cfg.fuel);
        let r = normalize(&p, solver, &goal.rhs.subst(&gamma), cfg.fuel);
        match (l, r) {
            (Ok(l), Ok(r)) if l == r => checked += 1,
            (Ok(l), Ok(r)) => {
                return Err(Violation::Mismatch {
                    assignment: shown,
                    lhs: l.to_string(),
                    rhs: r.to_string(),
                })
            }
            _ => return Err(Violation::NoNormalForm { assignment: shown }),
        }
    }
    Ok(checked)
}
