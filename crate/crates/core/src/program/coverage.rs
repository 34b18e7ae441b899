//! Quasi-reductivity: no missing cases in the pattern matching of defined symbols.
//!
//! Two fragments are decided. Rules whose arguments are distinct variables are
//! covered iff the disjunction of their constraints is valid. Unconstrained
//! rules over constructor patterns are checked for exhaustiveness column by
//! column. Everything else is reported as unverified.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{Program, Rule};
use crate::term::{fresh_name, FunSym, Head, Sort, Substitution, Symbol, Term, Type, Var};
use crate::theory::{self, Solver, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coverage {
    Pass,
    /// Some ground instance is not covered. `region` describes the missing
    /// case; `witness` is a concrete instance when one is known.
    Fail {
        region: String,
        witness: Option<String>,
    },
    Unverified(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageReport {
    pub symbol: Arc<str>,
    pub coverage: Coverage,
}

pub(super) fn check(program: &Program, solver: &Solver) -> Vec<CoverageReport> {
    let mut out = Vec::new();
    for f in program.symbols() {
        // Int and Bool have no constructors besides values, so a symbol
        // into them without rules is uncovered everywhere.
        let theory_result = matches!(f.ty.uncurry().1, Sort::Int | Sort::Bool);
        if !program.is_defined(&f.name) && !theory_result {
            continue;
        }
        let rules: Vec<&Rule> = program.rules_for(&f.name).collect();
        out.push(CoverageReport {
            symbol: f.name.clone(),
            coverage: check_symbol(program, f, &rules, solver),
        });
    }
    out
}

fn distinct_var_args(r: &Rule) -> Option<Vec<Var>> {
    let mut seen = BTreeSet::new();
    let mut vars = Vec::new();
    for a in r.lhs.args() {
        let v = a.as_var()?;
        if !seen.insert(v.name.clone()) {
            return None;
        }
        vars.push(v.clone());
    }
    Some(vars)
}

fn check_symbol(program: &Program, f: &FunSym, rules: &[&Rule], solver: &Solver) -> Coverage {
    let k = rules.first().map_or(f.ty.uncurry().0.len(), |r| r.arity());
    let arg_tys: Vec<Type> = f.ty.uncurry().0.into_iter().take(k).cloned().collect();

    let var_rules: Option<Vec<Vec<Var>>> = rules.iter().map(|r| distinct_var_args(r)).collect();
    if let Some(var_rules) = var_rules {
        let mut taken: BTreeSet<Arc<str>> = BTreeSet::new();
        for r in rules {
            taken.extend(r.vars().into_iter().map(|v| v.name));
        }
        let canon: Vec<Var> = arg_tys
            .iter()
            .map(|ty| {
                let n = fresh_name("arg", &taken);
                taken.insert(n.clone());
                Var { name: n, ty: ty.clone() }
            })
            .collect();
        let mut disjuncts = Vec::new();
        for (r, vars) in rules.iter().zip(&var_rules) {
            let sigma: Substitution = vars.iter().zip(&canon).map(|(v, c)| (v.clone(), Term::var(c.clone()))).collect();
            let lhs_vars: BTreeSet<Var> = vars.iter().cloned().collect();
            if r.constraint.vars().iter().any(|v| !lhs_vars.contains(v)) {
                return Coverage::Unverified("a rule constraint introduces variables absent from the left-hand side".into());
            }
            disjuncts.push(r.constraint.subst(&sigma));
        }
        let cover = disjuncts.into_iter().reduce(theory::or).unwrap_or_else(|| Term::bool(false));
        return match solver.is_valid(&cover) {
            Verdict::Yes => Coverage::Pass,
            Verdict::No(model) => {
                let witness_args: Vec<String> = canon
                    .iter()
                    .map(|c| match model.get(c) {
                        Some(t) => crate::print::atomic(t),
                        None => String::from("_"),
                    })
                    .collect();
                let mut witness = f.name.to_string();
                for a in witness_args {
                    witness.push(' ');
                    witness.push_str(&a);
                }
                let region = if rules.is_empty() {
                    String::from("every argument (no rules)")
                } else {
                    theory::not(cover).to_string()
                };
                Coverage::Fail {
                    region,
                    witness: Some(witness),
                }
            }
            Verdict::Unknown => Coverage::Unverified("the solver could not decide constraint coverage".into()),
        };
    }

    if rules.iter().any(|r| !theory::is_true(&r.constraint)) {
        return Coverage::Unverified("constrained rules with non-variable patterns".into());
    }
    let mut rows = Vec::new();
    for r in rules {
        let mut row = Vec::new();
        for a in r.lhs.args() {
            match to_pat(program, a) {
                Some(p) => row.push(p),
                None => return Coverage::Unverified(alloc::format!("pattern `{a}` is outside the checked fragment")),
            }
        }
        rows.push(row);
    }
    match missing(program, &rows, &arg_tys) {
        None => Coverage::Pass,
        Some(w) => {
            let mut s = f.name.to_string();
            for a in w {
                s.push(' ');
                s.push_str(&a);
            }
            Coverage::Fail {
                region: s.clone(),
                witness: Some(s),
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Pat {
    Wild,
    Con(FunSym, Vec<Pat>),
}

fn to_pat(program: &Program, t: &Term) -> Option<Pat> {
    match t.head() {
        Head::Var(_) if t.args().is_empty() => Some(Pat::Wild),
        Head::Sym(Symbol::Fun(c)) if !program.is_defined(&c.name) && t.ty().is_base() => {
            if !matches!(t.ty().base_sort(), Some(Sort::User(_))) {
                return None;
            }
            let args = t.args().iter().map(|a| to_pat(program, a)).collect::<Option<Vec<_>>>()?;
            Some(Pat::Con(c.clone(), args))
        }
        _ => None,
    }
}

/// A witness row not matched by any of `rows`, or `None` when they are exhaustive.
fn missing(program: &Program, rows: &[Vec<Pat>], tys: &[Type]) -> Option<Vec<String>> {
    let Some((ty0, rest_tys)) = tys.split_first() else {
        return if rows.is_empty() { Some(Vec::new()) } else { None };
    };
    let ctors: Vec<&FunSym> = match ty0 {
        Type::Base(Sort::User(_)) => program
            .constructors()
            .filter(|c| c.ty.uncurry().1 == ty0.base_sort().expect("base type"))
            .collect(),
        _ => Vec::new(),
    };
    let any_con = rows.iter().any(|r| matches!(r.first(), Some(Pat::Con(..))));
    if any_con && !ctors.is_empty() {
        for c in ctors {
            let (cargs, _) = c.ty.uncurry();
            let n = cargs.len();
            let spec: Vec<Vec<Pat>> = rows
                .iter()
                .filter_map(|r| match &r[0] {
                    Pat::Con(d, ps) if d == c => Some(ps.iter().cloned().chain(r[1..].iter().cloned()).collect()),
                    Pat::Con(..) => None,
                    Pat::Wild => Some(core::iter::repeat_n(Pat::Wild, n).chain(r[1..].iter().cloned()).collect()),
                })
                .collect();
            let tys: Vec<Type> = cargs.into_iter().cloned().chain(rest_tys.iter().cloned()).collect();
            if let Some(w) = missing(program, &spec, &tys) {
                let (inner, outer) = w.split_at(n);
                let mut head = c.name.to_string();
                for a in inner {
                    head.push(' ');
                    head.push_str(a);
                }
                let head = if n > 0 { alloc::format!("({head})") } else { head };
                let mut out = alloc::vec![head];
                out.extend(outer.iter().cloned());
                return Some(out);
            }
        }
        return None;
    }
    let default: Vec<Vec<Pat>> = rows.iter().filter(|r| matches!(r[0], Pat::Wild)).map(|r| r[1..].to_vec()).collect();
    missing(program, &default, rest_tys).map(|w| {
        let mut out = alloc::vec![String::from("_")];
        out.extend(w);
        out
    })
}
