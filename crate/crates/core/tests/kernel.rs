mod common;

use std::collections::BTreeMap;

use common::{eval_text, fact, Val};
use lcri_core::kernel::{
    recursor_free, sample_soundness, Direction, HypRef, ProofState, ProofStep, Rejection, RequirementMode, SampleConfig, Side, Status,
    Using, Violation,
};
use lcri_core::parse::{parse_equation, parse_program, parse_term};
use lcri_core::program::Equation;
use lcri_core::rewrite::normalize;
use lcri_core::trace::Trace;
use lcri_core::{Program, Solver, Term};
use proptest::prelude::*;

// Rule indices in the factorial corpus.
const FAC_TU: usize = 0;
const FAC_RD_BASE: usize = 6;
const FAC_RD_STEP: usize = 7;

fn eq(p: &Program, src: &str) -> Equation {
    parse_equation(p, src, &BTreeMap::new(), &[]).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn state(p: &Program, src: &str) -> ProofState {
    ProofState::new(p.clone(), Solver::new(), eq(p, src))
}

fn simplify(target: usize, side: Side, position: Vec<usize>, rule: usize) -> ProofStep {
    ProofStep::Simplify {
        target,
        side,
        position,
        using: Using::Rule(rule),
    }
}

fn ground(p: &Program, src: &str) -> Term {
    parse_term(p, src, &BTreeMap::new(), &[]).unwrap()
}

fn nf(p: &Program, src: &str) -> String {
    normalize(p, &Solver::new(), &ground(p, src), 100_000).unwrap().to_string()
}

#[test]
fn simplify_uses_entailed_rules_only() {
    let p = common::factorial();
    let mut st = state(&p, "facRD z ~ facTU z [z >= 10]");
    let refused = st.apply(simplify(0, Side::Left, vec![], FAC_RD_BASE)).unwrap_err();
    assert!(refused.to_string().contains("does not entail z <= 1"), "{refused:?}");
    st.apply(simplify(0, Side::Left, vec![], FAC_RD_STEP)).unwrap();
    assert_eq!(st.goals()[0].equation.lhs.to_string(), "z * facRD (z - 1)");
    st.apply(simplify(0, Side::Right, vec![], FAC_TU)).unwrap();
    assert_eq!(st.goals()[0].equation.rhs.to_string(), "u z 1 1");
    assert_eq!(st.goals().len(), 1);
    assert_eq!(st.trace().len(), 2);
    // Simplify does not touch the bounds.
    assert_eq!(st.goals()[0].bound_left, None);
}

#[test]
fn case_splits_the_constraint() {
    let p = common::factorial();
    let s = Solver::new();
    let mut st = state(&p, "facTU z ~ facRD z [z >= 1]");
    st.apply(ProofStep::Case {
        target: 0,
        constraint: "z = 1".into(),
    })
    .unwrap();
    assert_eq!(st.goals().len(), 2);
    let (yes, no) = (&st.goals()[0].equation.constraint, &st.goals()[1].equation.constraint);
    for (phi, z1) in [(yes, true), (no, false)] {
        let at_one = lcri_core::theory::eval_with(phi, &|_| Some(lcri_core::theory::Value::Int(1)));
        assert_eq!(at_one, Ok(lcri_core::theory::Value::Bool(z1)));
    }
    // The first branch can now evaluate facRD at its base case.
    let z = parse_term(&p, "z", &lcri_core::parse::env_of(st.goals()[0].equation.vars()), &[]).unwrap();
    assert!(s.equal_under(yes, &z, &Term::int(1)));
    assert!(st
        .check(&ProofStep::Case {
            target: 0,
            constraint: "w > 0".into()
        })
        .is_err());
}

#[test]
fn delete() {
    let p = common::factorial();
    let mut st = state(&p, "facTU x ~ facTU x");
    let steps = st.enumerate_steps(0);
    assert_eq!(steps.first(), Some(&ProofStep::Delete { target: 0 }));
    st.apply(ProofStep::Delete { target: 0 }).unwrap();
    assert!(st.goals().is_empty());
    assert_eq!(st.status(), Status::Proved);
    assert!(st.enumerate_steps(0).is_empty());

    let mut st = state(&p, "facTU x ~ facRD x [x >= 1]");
    let err = st.apply(ProofStep::Delete { target: 0 }).unwrap_err();
    assert_eq!(err, Rejection::DeleteCondition);
    assert_eq!(err.to_string(), "neither s = t nor φ unsatisfiable");
    assert_eq!(st.goals().len(), 1);

    // An unsatisfiable constraint deletes anything.
    let mut st = state(&p, "facTU x ~ facRD x [x < 0 /\\ x > 0]");
    st.apply(ProofStep::Delete { target: 0 }).unwrap();
    // Theory subterms equal under the constraint count as equal.
    let mut st = state(&p, "facTU (x + 1) ~ facTU y [y = x + 1]");
    st.apply(ProofStep::Delete { target: 0 }).unwrap();
}

#[test]
fn hdelete_by_an_assumed_equation() {
    let p = common::factorial();
    let mut st = state(&p, "y * facTU z ~ y * facRD z [y >= 2 /\\ z = y - 1]");
    st.apply(ProofStep::AssumeAxiom {
        equation: "facTU x ~ facRD x [x >= 1]".into(),
    })
    .unwrap();
    assert_eq!(st.status(), Status::Open);
    st.apply(ProofStep::HDelete {
        target: 0,
        hypothesis: HypRef::A(0),
    })
    .unwrap();
    assert!(st.goals().is_empty());
    // The axiom is still owed.
    assert_eq!(st.status(), Status::Conditional);

    // Without the side constraint z >= 1 is not entailed.
    let mut st = state(&p, "y * facTU z ~ y * facRD z [y >= 2]");
    st.apply(ProofStep::AssumeAxiom {
        equation: "facTU x ~ facRD x [x >= 1]".into(),
    })
    .unwrap();
    assert!(matches!(
        st.apply(ProofStep::HDelete {
            target: 0,
            hypothesis: HypRef::A(0)
        }),
        Err(Rejection::Entailment(_))
    ));
}

#[test]
fn hdelete_needs_a_changed_bound() {
    let p = common::factorial();
    let mut st = state(&p, "facTU x ~ facRD x [x >= 1]");
    st.apply(ProofStep::Induct { target: 0 }).unwrap();
    assert_eq!(st.hypotheses().len(), 1);
    let c = &st.goals()[0];
    assert_eq!(c.bound_left.as_ref(), Some(&c.equation.lhs));
    let h = ProofStep::HDelete {
        target: 0,
        hypothesis: HypRef::H(0),
    };
    assert_eq!(st.check(&h).unwrap_err(), Rejection::BoundUnchanged);
    assert!(matches!(
        st.check(&ProofStep::HDelete {
            target: 0,
            hypothesis: HypRef::H(3)
        }),
        Err(Rejection::NoSuchHypothesis(_))
    ));
}

#[test]
fn hypothesis_rewrites_below_the_bound() {
    let p = parse_program(
        "fun f, g :: Int -> Int;
         rule f x -> 0 [x <= 0];
         rule f x -> f (x - 1) [x > 0];
         rule g x -> 0;
         prec f > g;",
    )
    .unwrap();
    let mut st = state(&p, "f x ~ g x");
    st.apply(ProofStep::Induct { target: 0 }).unwrap();
    st.apply(ProofStep::Case {
        target: 0,
        constraint: "x <= 0".into(),
    })
    .unwrap();
    st.apply(simplify(0, Side::Left, vec![], 0)).unwrap();
    st.apply(simplify(0, Side::Right, vec![], 2)).unwrap();
    st.apply(ProofStep::Delete { target: 0 }).unwrap();
    st.apply(simplify(0, Side::Left, vec![], 1)).unwrap();
    // At the root the rewritten term would be the bound itself.
    let at_root = ProofStep::Hypothesis {
        target: 0,
        side: Side::Right,
        position: vec![],
        hypothesis: HypRef::H(0),
        direction: Direction::RightToLeft,
        bind: BTreeMap::new(),
    };
    assert!(st.check(&at_root).is_err());
    st.apply(ProofStep::Hypothesis {
        target: 0,
        side: Side::Left,
        position: vec![],
        hypothesis: HypRef::H(0),
        direction: Direction::LeftToRight,
        bind: BTreeMap::new(),
    })
    .unwrap();
    assert_eq!(st.goals()[0].equation.lhs.to_string(), "g (x - 1)");
    st.apply(simplify(0, Side::Left, vec![], 2)).unwrap();
    st.apply(simplify(0, Side::Right, vec![], 2)).unwrap();
    st.apply(ProofStep::Delete { target: 0 }).unwrap();
    st.discharge_requirements();
    assert_eq!(st.status(), Status::Proved);
}

#[test]
fn enumerated_steps_are_accepted_and_ranked() {
    let p = common::factorial();
    let mut st = state(&p, "facRD x ~ x * 1 [x >= 0]");
    st.apply(ProofStep::Induct { target: 0 }).unwrap();
    let steps = st.enumerate_steps(0);
    assert!(!steps.is_empty());
    for s in &steps {
        assert!(st.check(s).is_ok(), "{s}");
    }
    // Neither facRD rule is entailed by x >= 0, so the guard is offered.
    let cases: Vec<&ProofStep> = steps.iter().filter(|s| matches!(s, ProofStep::Case { .. })).collect();
    assert!(!cases.is_empty());
    let rank = |s: &ProofStep| {
        ["Delete", "HDelete", "Simplify", "Hypothesis", "Case", "Induct"]
            .iter()
            .position(|n| *n == s.name())
            .unwrap()
    };
    assert!(steps.windows(2).all(|w| rank(&w[0]) <= rank(&w[1])), "{steps:?}");
    for s in &steps {
        if let ProofStep::Simplify { using: Using::Rule(r), .. } = s {
            assert!(*r != FAC_RD_BASE && *r != FAC_RD_STEP);
        }
    }
    assert!(st.enumerate_steps(5).is_empty());
}

#[test]
fn normal_forms_are_factorials() {
    let p = common::factorial();
    for n in 1..=8 {
        for f in ["facTU", "facTD", "facRU", "facRD"] {
            let want = fact(n);
            assert_eq!(nf(&p, &format!("{f} {n}")), want.to_string(), "{f} {n}");
        }
    }
    assert_eq!(nf(&p, "facRD 4"), "24");
    assert_eq!(nf(&p, "facTU 1"), "1");
}

#[test]
fn sampling_finds_a_corrupted_rule() {
    let p = common::factorial();
    let s = Solver::new();
    let goal = eq(&p, "facTU x ~ facRD x [x >= 1]");
    let cfg = SampleConfig {
        lo: 1,
        hi: 12,
        ..SampleConfig::default()
    };
    assert_eq!(sample_soundness(&p, &s, &goal, &cfg), Ok(cfg.samples));

    let broken = parse_program(&common::FACTORIAL.replace("rule facRD x -> 1 [x <= 1];", "rule facRD x -> 2 [x <= 1];")).unwrap();
    let goal = eq(&broken, "facTU x ~ facRD x [x >= 1]");
    match sample_soundness(&broken, &s, &goal, &cfg) {
        Err(Violation::Mismatch { assignment, lhs, rhs }) => {
            let x: i128 = assignment.iter().find(|(v, _)| v == "x").unwrap().1.parse().unwrap();
            assert_eq!(lhs, fact(x).to_string());
            assert_eq!(rhs, (2 * fact(x)).to_string());
        }
        r => panic!("expected a mismatch, got {r:?}"),
    }
}

#[test]
fn recursor_freedom() {
    let p = common::factorial();
    assert!(recursor_free(&eq(&p, "facTU x ~ facRD x [x >= 1]")));
    let r = lcri_core::templates::install_recursors(&p).unwrap();
    assert!(!recursor_free(&eq(&r, "facRD x ~ recdn [*] 2 x 1")));
    assert!(!recursor_free(&eq(&r, "tailup [*] i x a ~ u x i a")));
}

#[test]
fn shipped_traces_replay_identically() {
    let p = common::factorial();
    let s = Solver::new();
    let t = Trace::from_json(include_str!("../../../corpus/traces/factorial-goal0.json")).unwrap();
    let a = t.replay(&p, &s).unwrap();
    let b = t.replay(&p, &s).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.status(), Status::Proved);
    let again = Trace::of(&p, &a);
    assert_eq!(again.to_json(), t.to_json());
}

#[test]
fn theorem_steps_must_be_proved() {
    let p = common::factorial();
    let mut st = state(&p, "facTU x ~ facRD x [x >= 1]");
    let bogus = ProofStep::Theorem {
        equation: "facTU x ~ facTD x".into(),
        proof: vec![ProofStep::Delete { target: 0 }],
    };
    assert!(matches!(st.apply(bogus), Err(Rejection::Theorem(_))));
    let fine = ProofStep::Theorem {
        equation: "facTU x ~ facTU x".into(),
        proof: vec![ProofStep::Delete { target: 0 }],
    };
    st.apply(fine).unwrap();
    assert_eq!(st.axioms().len(), 1);
    assert!(st.obligations().is_empty());
}

fn walk(p: &Program, goal: &str, picks: &[usize], mode: RequirementMode) -> ProofState {
    let mut st = state(p, goal).with_mode(mode);
    for &k in picks {
        if st.goals().is_empty() {
            break;
        }
        let t = k % st.goals().len();
        let steps = st.enumerate_steps(t);
        if steps.is_empty() {
            continue;
        }
        let s = steps[(k / 7) % steps.len()].clone();
        st.apply(s).expect("enumerated steps are accepted");
    }
    st
}

fn bounds_hold(st: &ProofState) -> bool {
    // Bounds are set together by Induct, to the sides of the hypothesis it records.
    st.goals().iter().all(|c| match (&c.bound_left, &c.bound_right) {
        (None, None) => true,
        (Some(l), Some(r)) => st
            .hypotheses()
            .iter()
            .any(|h| (&h.lhs == l && &h.rhs == r) || (&h.lhs == r && &h.rhs == l)),
        _ => false,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn replay_is_deterministic(picks in prop::collection::vec(0usize..1000, 0..10), goal in 0usize..4) {
        let p = common::factorial();
        let src = p.goals[goal].to_string();
        let st = walk(&p, &src, &picks, RequirementMode::Record);
        prop_assert!(bounds_hold(&st));
        let again = ProofState::replay(p.clone(), Solver::new(), st.goal().clone(), st.mode(), st.trace()).unwrap();
        prop_assert_eq!(&again, &st);
        let json = Trace::of(&p, &st).to_json();
        let back = Trace::from_json(&json).unwrap();
        prop_assert_eq!(back.to_json(), json);
    }

    #[test]
    fn case_partitions_the_constraint(k in -5i64..5, rel in 0usize..4, x in -10i128..10) {
        let p = common::factorial();
        let rels = ["<", "<=", "=", ">"];
        let psi = if k < 0 { format!("x {} 0 - {}", rels[rel], -k) } else { format!("x {} {k}", rels[rel]) };
        let mut st = state(&p, "facTU x ~ facRD x [x >= 0 - 3]");
        st.apply(ProofStep::Case { target: 0, constraint: psi.clone() }).unwrap();
        let env = BTreeMap::from([("x".to_string(), Val::I(x))]);
        let phi = eval_text("x >= 0 - 3", &env).unwrap();
        let holds: Vec<bool> = st
            .goals()
            .iter()
            .map(|c| lcri_core::theory::eval_with(&c.equation.constraint, &|_| Some(lcri_core::theory::Value::Int(x))) == Ok(lcri_core::theory::Value::Bool(true)))
            .collect();
        prop_assert_eq!(holds.len(), 2);
        if phi == Val::B(true) {
            prop_assert!(holds[0] ^ holds[1]);
            prop_assert_eq!(holds[0], eval_text(&psi, &env).unwrap() == Val::B(true));
        } else {
            prop_assert!(!holds[0] && !holds[1]);
        }
    }
}
