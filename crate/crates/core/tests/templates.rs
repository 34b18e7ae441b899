mod common;

use std::collections::BTreeMap;

use lcri_core::kernel::{check_axiom, sample_soundness, ProofState, ProofStep, SampleConfig, Side, Status};
use lcri_core::order::Ordering;
use lcri_core::parse::parse_equation;
use lcri_core::program::{Coverage, Equation};
use lcri_core::templates::*;
use lcri_core::{Program, Solver, Type, Var};

fn eq(p: &Program, src: &str) -> Equation {
    parse_equation(p, src, &BTreeMap::new(), &[]).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn only(p: &Program, sym: &str, kind: TemplateKind) -> TemplateMatch {
    let ms = match_template(p, sym, Some(kind));
    assert_eq!(ms.len(), 1, "{sym}: {ms:?}");
    ms.into_iter().next().unwrap()
}

/// `p` with the recursors and the context symbols of `ms`, added as a proof would.
fn defined(p: &Program, ms: &[&TemplateMatch]) -> Program {
    let mut st = ProofState::new(p.clone(), Solver::new(), p.goals[0].clone());
    for m in ms {
        for s in setup_steps(st.program(), m) {
            st.apply(s).unwrap();
        }
    }
    st.program().clone()
}

fn guards(p: &Program, sym: &str, index: &str, up: bool) -> Vec<String> {
    let rules: Vec<_> = p.rules_for(sym).cloned().collect();
    normalize_inequalities(&rules, &Var::new(index, Type::INT), up)
        .iter()
        .map(|r| r.constraint.to_string())
        .collect()
}

#[test]
fn inequality_normalization() {
    let p = common::factorial();
    assert_eq!(guards(&p, "d", "x", false), ["x < 1", "x >= 1"]);
    assert_eq!(guards(&p, "facRD", "x", false), ["x < 2", "x >= 2"]);
    assert_eq!(guards(&p, "u", "i", true), ["i > x", "i <= x"]);
    // Idempotent.
    let once: Vec<_> = p.rules_for("d").cloned().collect();
    let x = Var::new("x", Type::INT);
    let a = normalize_inequalities(&once, &x, false);
    assert_eq!(normalize_inequalities(&a, &x, false), a);
}

#[test]
fn factorial_matches() {
    let p = common::factorial();
    let u = only(&p, "u", TemplateKind::TailUp);
    assert_eq!(u.function.to_string(), "#1 * #2");
    assert_eq!(u.bound.to_string(), "x");
    assert_eq!(u.context.to_string(), "u x #1 #2");
    assert!(matches!(&u.function_symbol, FunctionSymbol::Existing(t) if t.to_string() == "[*]"));

    let up = only(&p, "U", TemplateKind::RecUp);
    assert_eq!(up.function.to_string(), "#2 * #1");
    assert_eq!(up.bound.to_string(), "x - 1");
    assert_eq!(up.base.as_ref().unwrap().to_string(), "x");
    assert_eq!(up.context.to_string(), "U #1 x");
    let def = synthesized_definition(&p, &up).expect("#2 * #1 needs a symbol");
    assert!(def.contains("-> x2 * x1;"), "{def}");

    let rd = only(&p, "facRD", TemplateKind::RecDown);
    assert_eq!(
        (rd.bound.to_string(), rd.base.as_ref().unwrap().to_string()),
        ("2".into(), "1".into())
    );
    assert!(match_template(&p, "facTU", None).is_empty());
    assert_eq!(match_all(&p).len(), 4);
}

#[test]
fn composite_operator_matches() {
    let p = common::funfac();
    let u = only(&p, "u", TemplateKind::TailUp);
    assert_eq!(u.function.to_string(), "h #1 * #2");
    let d = only(&p, "d", TemplateKind::TailDown);
    assert_eq!(d.function.to_string(), "#1 * h #2");
    let g = synthesized_definition(&p, &d).unwrap();
    assert!(g.contains("h x1 x2 -> x1 * h x2;"), "{g}");
    // Names are content-addressed.
    assert_eq!(
        synthesized_definition(&p, &d),
        synthesized_definition(&p, &only(&p, "d", TemplateKind::TailDown))
    );
    assert_ne!(synthesized_definition(&p, &u), synthesized_definition(&p, &d));
}

#[test]
fn matches_reconstruct_their_rules() {
    for p in [common::factorial(), common::funfac()] {
        for m in match_all(&p) {
            let src: Vec<_> = p.rules_for(&m.symbol).cloned().collect();
            let norm = normalize_inequalities(&src, &m.index, m.kind.is_up());
            let rebuilt = m.rules().unwrap();
            let show = |rs: &[lcri_core::Rule]| rs.iter().map(|r| r.to_string()).collect::<Vec<_>>();
            let mut want = show(&norm);
            want.sort();
            let mut got = show(&rebuilt);
            got.sort();
            assert_eq!(got, want, "{}", m.symbol);
        }
    }
}

#[test]
fn recursor_installation() {
    let s = Solver::new();
    let p = install_recursors(&common::factorial()).unwrap();
    assert!(has_recursors(&p));
    assert!(p.check_quasi_reductivity(&s).iter().all(|r| r.coverage == Coverage::Pass));
    assert!(matches!(install_recursors(&p), Err(InstallError::NameClash(_))));
    let bare = install_recursors(&Program::new()).unwrap();
    assert_eq!(bare.rules().len(), 8);
    let (rules, calcs) = Ordering::new(&bare, &s).orient_rules(&bare);
    assert!(rules.is_empty() && calcs.is_empty());
}

#[test]
fn template_recursor_lemmas() {
    let s = Solver::new();
    let p = install_recursors(&common::factorial()).unwrap();
    let m = only(&p, "u", TemplateKind::TailUp);
    let (e, script) = emit_template_recursor_lemma(&p, &s, &m).unwrap();
    assert_eq!(e.to_string(), "u x i a ~ tailup [*] i x a");
    assert_eq!(script.first(), Some(&ProofStep::Induct { target: 0 }));
    let st = ProofState::replay(p.clone(), s.clone(), e, Default::default(), &script).unwrap();
    assert_eq!(st.status(), Status::Proved);
    assert!(st.requirements().is_empty());

    // The composite downward loop goes through a synthesized symbol.
    let f = common::funfac();
    let d = only(&f, "d", TemplateKind::TailDown);
    let q = defined(&f, &[&d]);
    let (e, script) = emit_template_recursor_lemma(&q, &s, &d).unwrap();
    let shown = e.to_string();
    assert!(shown.starts_with("d h x a ~ taildn (F_"), "{shown}");
    assert!(shown.ends_with(" h) 1 x a"), "{shown}");
    let st = ProofState::replay(q, s, e, Default::default(), &script).unwrap();
    assert_eq!(st.status(), Status::Proved);
}

#[test]
fn bank_contents() {
    let bank = lemma_bank();
    assert_eq!(bank.len(), 6);
    assert_eq!(bank.iter().filter(|e| e.axioms.is_empty()).count(), 2);
    for e in bank {
        assert_eq!(e.requirements.len(), if e.axioms.is_empty() { 1 } else { 2 }, "{}", e.id);
    }
    let tr = lemma(LemmaId::TailupRecdn);
    assert_eq!(tr.requirements, ["tailup f x y z ~ recdn f x' y (f x z) [x <= y /\\ x' = x + 1]"]);
    let l31 = lemma(LemmaId::TailupTaildn);
    assert_eq!(
        l31.axiom_texts(&Instantiation::shared("[*]")),
        ["[*] x ([*] y z) ~ [*] ([*] x y) z", "[*] x y ~ [*] y x"]
    );
}

#[test]
fn axiom_discharge() {
    let p = common::factorial();
    let s = Solver::new();
    let l31 = lemma(LemmaId::TailupTaildn);
    for op in ["[*]", "[+]"] {
        for a in l31.axiom_equations(&p, &Instantiation::shared(op)).unwrap() {
            assert_eq!(check_axiom(&p, &s, &a), Ok(()), "{a}");
        }
    }
    let minus = l31.axiom_equations(&p, &Instantiation::shared("[-]")).unwrap();
    let why = check_axiom(&p, &s, &minus[1]).unwrap_err();
    assert!(why.contains("x=") && why.contains("y="), "{why}");

    // (F, G) from the composite example.
    let f = common::funfac();
    let (u, d) = (only(&f, "u", TemplateKind::TailUp), only(&f, "d", TemplateKind::TailDown));
    let (fd, gd) = (synthesized_definition(&f, &u).unwrap(), synthesized_definition(&f, &d).unwrap());
    let q = defined(&f, &[&u, &d]);
    let name = |def: &str| def.split_whitespace().nth(1).unwrap().to_string();
    let inst = Instantiation {
        first: format!("({} h)", name(&fd)),
        second: format!("({} h)", name(&gd)),
    };
    let axioms = l31.axiom_texts(&inst);
    let comm = parse_equation(
        &q,
        &axioms[1],
        &BTreeMap::from([("h".to_string(), Type::arrow(Type::INT, Type::INT))]),
        &[],
    )
    .unwrap();
    assert_eq!(check_axiom(&q, &s, &comm), Ok(()), "{comm}");
}

fn residuals(st: &ProofState) -> Vec<String> {
    st.goals().iter().map(|g| g.equation.to_string()).collect()
}

fn one_sided(p: &Program, goal: &str, side: Side, rec: &str) -> Vec<String> {
    let st = ProofState::new(p.clone(), Solver::new(), eq(p, goal));
    let t = match side {
        Side::Left => &st.goals()[0].equation.lhs,
        Side::Right => &st.goals()[0].equation.rhs,
    };
    let m = term_matches(p, t).into_iter().next().expect("side matches a template");
    let e = entries_for(&m).into_iter().find(|e| e.equation.contains(rec)).expect("bank entry");
    let mut out = st.clone();
    for s in tactic_one_sided(&st, 0, side, &m, e).unwrap() {
        out.apply(s).unwrap();
    }
    residuals(&out)
}

#[test]
fn one_sided_residuals() {
    let p = common::factorial();
    let g = "u x 2 1 ~ facRD x [x >= 1]";
    assert_eq!(one_sided(&p, g, Side::Left, "recdn"), ["recdn [*] 2 x 1 ~ facRD x [x >= 1]"]);
    assert_eq!(one_sided(&p, g, Side::Right, "tailup"), ["u x 2 1 ~ tailup [*] 2 x 1 [x >= 1]"]);
    let r = one_sided(&p, "d (x - 1) x ~ U 1 x [x >= 1]", Side::Right, "taildn");
    assert_eq!(r.len(), 1);
    assert!(
        r[0].starts_with("d (x - 1) x ~ taildn F_") && r[0].ends_with(" 1 (x - 1) x [x >= 1]"),
        "{r:?}"
    );
}

#[test]
fn two_sided_closes_or_suggests_bridges() {
    let p = common::factorial();
    let s = Solver::new();
    let st = ProofState::new(p.clone(), s.clone(), eq(&p, "u x 2 1 ~ facRD x [x >= 1]"));
    let (l, r) = (&st.goals()[0].equation.lhs, &st.goals()[0].equation.rhs);
    let (ml, mr) = (term_matches(&p, l).remove(0), term_matches(&p, r).remove(0));
    let mut done = st.clone();
    for step in tactic_two_sided(&st, 0, &ml, &mr, false).unwrap() {
        done.apply(step).unwrap();
    }
    done.discharge_requirements();
    assert_eq!(done.status(), Status::Proved);

    let st = ProofState::new(p.clone(), s, eq(&p, "d (x - 1) x ~ U 1 x [x >= 1]"));
    let (l, r) = (&st.goals()[0].equation.lhs, &st.goals()[0].equation.rhs);
    let (ml, mr) = (term_matches(&p, l).remove(0), term_matches(&p, r).remove(0));
    match tactic_two_sided(&st, 0, &ml, &mr, false) {
        Err(TwoSidedFailure::BridgeNeeded(ls)) => {
            assert_eq!(ls.len(), 2);
            assert!(ls[0].starts_with("taildn [*] i y a ~ taildn F_"), "{ls:?}");
            assert!(ls[1].starts_with("recup [*] i y a ~ recup F_"), "{ls:?}");
        }
        r => panic!("expected bridge suggestions, got {r:?}"),
    }
    assert!(tactic_two_sided(&st, 0, &ml, &mr, true).is_ok());
}

#[test]
fn auto_prove_outcomes() {
    let s = Solver::new();
    let cfg = AutoConfig::default();
    let p = common::factorial();
    let r = auto_prove(&p, &s, &eq(&p, "facTU x ~ facRD x [x >= 1]"), &cfg);
    assert_eq!((r.status, r.strategy), (Status::Proved, Strategy::TwoSided));
    let q = common::funfac();
    let r = auto_prove(&q, &s, &q.goals[0], &cfg);
    assert_eq!(r.status, Status::Proved);

    // Both sides are 1 at x <= 0, so the unconstrained goal is true. Either
    // it is proved and survives sampling, or it stays open.
    let g = eq(&p, "facTU x ~ facRD x");
    let r = auto_prove(&p, &s, &g, &cfg);
    let samp = SampleConfig {
        lo: -5,
        hi: 10,
        ..SampleConfig::default()
    };
    match r.status {
        Status::Proved => assert!(sample_soundness(&p, &s, &g, &samp).is_ok()),
        st => assert_eq!(st, Status::Open),
    }
    // A false goal is never proved.
    let bad = eq(&p, "facTU x ~ facRD x + 1 [x >= 1]");
    let r = auto_prove(&p, &s, &bad, &AutoConfig { budget: 200, ..cfg });
    assert_eq!(r.status, Status::Open);
    assert!(r.residual().is_some());
}

#[test]
fn naive_induction_diverges() {
    let p = common::factorial();
    let s = Solver::new();
    let st = ProofState::new(p.clone(), s, eq(&p, "facTU x ~ facRD x [x >= 1]"));
    assert!(search(&st, 0, 400).is_none());

    // Rewriting and splitting on guards only ever reaches the next
    // accumulator state.
    let mut cur = st;
    let mut seen = Vec::new();
    for _ in 0..400 {
        let Some(step) = cur
            .enumerate_steps(0)
            .into_iter()
            .find(|s| !matches!(s, ProofStep::Induct { .. } | ProofStep::HDelete { .. }))
        else {
            break;
        };
        cur.apply(step).unwrap();
        let lhs = cur.goals()[0].equation.lhs.to_string();
        if !seen.contains(&lhs) {
            seen.push(lhs);
        }
    }
    for (i, a) in [(3, 2), (4, 6), (5, 24)] {
        assert!(seen.contains(&format!("u x {i} {a}")), "{seen:?}");
    }
    assert!(!cur.goals().is_empty());
    // Templates close it.
    let r = auto_prove(&p, &Solver::new(), &p.goals[0], &AutoConfig::default());
    assert_eq!(r.status, Status::Proved);
}
