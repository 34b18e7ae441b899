mod common;

use std::collections::BTreeMap;

use common::{eval_text, lia_env, Val};
use lcri_core::parse::{parse_program, parse_term};
use lcri_core::theory::poly::Poly;
use lcri_core::theory::{eval_ground, eval_with, EvalError, SatResult, Value, Verdict};
use lcri_core::{Program, Solver, Substitution, Term, Var};
use proptest::prelude::*;

fn empty() -> Program {
    parse_program("").unwrap()
}

fn phi(src: &str) -> Term {
    parse_term(&empty(), src, &lia_env(), &[]).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn oracle_env(g: &Substitution) -> BTreeMap<String, Val> {
    let mut env = BTreeMap::new();
    for v in common::INT_VARS {
        env.insert(v.to_string(), Val::I(0));
    }
    for v in common::BOOL_VARS {
        env.insert(v.to_string(), Val::B(false));
    }
    for (v, t) in g.iter() {
        let val = match Value::from_term(t).expect("assignment to a value") {
            Value::Int(n) => Val::I(n),
            Value::Bool(b) => Val::B(b),
        };
        env.insert(v.name.to_string(), val);
    }
    env
}

#[test]
fn ground_evaluation() {
    assert_eq!(eval_ground(&phi("7 * 0")), Ok(Value::Int(0)));
    assert_eq!(eval_ground(&phi("2 + 3 >= 5")), Ok(Value::Bool(true)));
    assert_eq!(eval_ground(&phi("not (1 = 1) \\/ 3 < 2")), Ok(Value::Bool(false)));
    assert_eq!(eval_ground(&phi("0 - 4 * 5")), Ok(Value::Int(-20)));
    assert!(matches!(eval_ground(&phi("x + 1")), Err(EvalError::Unassigned(_))));
    let big = phi("170141183460469231731687303715884105727 + 1");
    assert_eq!(eval_ground(&big), Err(EvalError::Overflow));
}

#[test]
fn validity() {
    let s = Solver::new();
    assert_eq!(s.is_valid(&phi("x + 1 > x")), Verdict::Yes);
    assert_eq!(s.is_valid(&phi("not (z >= 10) \\/ z > 1")), Verdict::Yes);
    assert_eq!(s.entails(&phi("z >= 10"), &phi("z > 1")), Verdict::Yes);
    match s.is_valid(&phi("x > 0")) {
        Verdict::No(g) => {
            let env = oracle_env(&g);
            assert_eq!(eval_text("x > 0", &env), Ok(Val::B(false)));
        }
        v => panic!("expected a counterexample, got {v:?}"),
    }
    assert_eq!(s.entails(&phi("z >= 1"), &phi("z > 1")).is_yes(), false);
}

#[test]
fn satisfiability() {
    let s = Solver::new();
    assert_eq!(s.satisfiable(&phi("x < 0 /\\ x > 0")), SatResult::Unsat);
    // The negation is valid, so the conjunction has no model; the
    // falsifier of validity for its negation is any x, e.g. x = 0.
    match s.is_valid(&phi("x < 0 /\\ x > 0")) {
        Verdict::No(g) => {
            assert_eq!(eval_text("x < 0 /\\ x > 0", &oracle_env(&g)), Ok(Val::B(false)));
        }
        v => panic!("{v:?}"),
    }
    match s.satisfiable(&phi("2 * x = y /\\ y > 7 /\\ y < 10")) {
        SatResult::Sat(g) => {
            assert_eq!(eval_text("2 * x = y /\\ y > 7 /\\ y < 10", &oracle_env(&g)), Ok(Val::B(true)));
        }
        r => panic!("{r:?}"),
    }
    // Integer reasoning, not rational.
    assert_eq!(s.satisfiable(&phi("2 * x = 1")), SatResult::Unsat);
}

#[test]
fn entailment_from_the_factorial_proofs() {
    let s = Solver::new();
    let cases = [
        ("y >= 2 /\\ z = y - 1", "z >= 1", true),
        ("x >= 1 /\\ not (x <= 1)", "x - 1 >= 1", true),
        ("i <= x /\\ i >= 1", "x >= 1", true),
        ("x > 1", "x >= 2", true),
        ("x >= 1", "x >= 2", false),
    ];
    for (a, b, want) in cases {
        assert_eq!(s.entails(&phi(a), &phi(b)).is_yes(), want, "{a} |= {b}");
    }
    assert!(s.equal_under(&phi("y = x + 1"), &phi("y - 1"), &phi("x")));
    assert!(!s.equal_under(&phi("true"), &phi("y - 1"), &phi("x")));
}

#[test]
fn verdicts_match_the_case_file() {
    // Every `No`/`Sat` witness is checked with the independent evaluator.
    let s = Solver::new();
    for c in common::lia_cases() {
        let f = phi(&c.formula);
        match c.expect {
            common::Expect::Valid(_) => {
                if let Verdict::No(g) = s.is_valid(&f) {
                    assert_eq!(eval_text(&c.formula, &oracle_env(&g)), Ok(Val::B(false)), "line {}", c.line);
                }
            }
            common::Expect::Sat(_) => {
                if let SatResult::Sat(g) = s.satisfiable(&f) {
                    assert_eq!(eval_text(&c.formula, &oracle_env(&g)), Ok(Val::B(true)), "line {}", c.line);
                }
            }
            common::Expect::Entails(_) => {
                let p = c.premise.as_deref().unwrap();
                if let Verdict::No(g) = s.entails(&phi(p), &f) {
                    let env = oracle_env(&g);
                    assert_eq!(eval_text(p, &env), Ok(Val::B(true)), "line {}", c.line);
                    assert_eq!(eval_text(&c.formula, &env), Ok(Val::B(false)), "line {}", c.line);
                }
            }
        }
    }
}

fn int_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        Just("z".to_string()),
        (0i32..7).prop_map(|n| n.to_string()),
    ];
    leaf.prop_recursive(4, 20, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a} * {b})")),
        ]
    })
}

fn linear() -> impl Strategy<Value = String> {
    let atom = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        (-4i32..5).prop_map(|n| if n < 0 { format!("(0 - {})", -n) } else { n.to_string() }),
        ((1i32..4), prop_oneof![Just("x"), Just("y")]).prop_map(|(k, v)| format!("{k} * {v}")),
    ];
    prop::collection::vec(atom, 1..4).prop_map(|v| v.join(" + "))
}

fn constraint() -> impl Strategy<Value = String> {
    let rel = prop_oneof![Just("<"), Just("<="), Just("="), Just(">="), Just(">"), Just("!=")];
    let lit = (linear(), rel, linear()).prop_map(|(a, r, b)| format!("{a} {r} {b}"));
    prop::collection::vec(lit, 1..4).prop_map(|v| v.join(" /\\ "))
}

proptest! {
    #[test]
    fn polynomial_normal_form_evaluates_alike(e in int_expr(), x in -20i128..20, y in -20i128..20, z in -20i128..20) {
        let t = phi(&e);
        let p = Poly::from_term(&t).unwrap();
        let env = BTreeMap::from([("x".to_string(), Val::I(x)), ("y".to_string(), Val::I(y)), ("z".to_string(), Val::I(z))]);
        let Ok(Val::I(want)) = eval_text(&e, &env) else { panic!("oracle") };
        let got = p.eval(&|v| match v { "x" => Some(x), "y" => Some(y), "z" => Some(z), _ => None });
        prop_assert_eq!(got, Some(want));
        let back = p.to_term();
        let lookup = |v: &Var| match &*v.name { "x" => Some(Value::Int(x)), "y" => Some(Value::Int(y)), "z" => Some(Value::Int(z)), _ => None };
        prop_assert_eq!(eval_with(&back, &lookup), Ok(Value::Int(want)));
    }

    #[test]
    fn satisfiability_agrees_with_a_bounded_search(c in constraint()) {
        // The constraints are linear with small coefficients, so a
        // satisfiable one has a model in a small box.
        let s = Solver::new();
        let f = phi(&c);
        let mut found = false;
        'outer: for x in -30i128..=30 {
            for y in -30i128..=30 {
                let env = BTreeMap::from([("x".to_string(), Val::I(x)), ("y".to_string(), Val::I(y))]);
                if eval_text(&c, &env) == Ok(Val::B(true)) {
                    found = true;
                    break 'outer;
                }
            }
        }
        match s.satisfiable(&f) {
            SatResult::Sat(g) => {
                prop_assert_eq!(eval_text(&c, &oracle_env(&g)), Ok(Val::B(true)));
            }
            SatResult::Unsat => prop_assert!(!found, "{c} has a model"),
            SatResult::Unknown => prop_assert!(false, "unknown on linear input {c}"),
        }
    }
}
