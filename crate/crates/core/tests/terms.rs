mod common;

use std::collections::BTreeMap;

use lcri_core::parse::{parse_program, parse_term};
use lcri_core::rewrite::candidate_positions;
use lcri_core::term::{classify, is_semi_constructor, match_term, Head};
use lcri_core::{Program, Substitution, Symbol, Term, Type, Var};
use proptest::prelude::*;

const SIG: &str = "
fun add :: Nat -> Nat -> Nat;
fun s :: Nat -> Nat;
fun o :: Nat;
fun f, g :: Int -> Int -> Int;
fun k :: Int -> Int;
fun h :: (Int -> Int) -> Int -> Int;
rule add o y -> y;
rule add (s x) y -> s (add x y);
rule f x y -> x + y;
rule k x -> f x x;
";

fn sig() -> Program {
    parse_program(SIG).unwrap()
}

fn env(vars: &[(&str, Type)]) -> BTreeMap<String, Type> {
    vars.iter().map(|(n, t)| (n.to_string(), t.clone())).collect()
}

fn nat() -> Type {
    Type::Base(lcri_core::term::Sort::User("Nat".into()))
}

fn term(p: &Program, src: &str, vars: &[(&str, Type)]) -> Term {
    parse_term(p, src, &env(vars), &[]).unwrap_or_else(|e| panic!("{src}: {e}"))
}

#[test]
fn typing() {
    let p = sig();
    let t = term(&p, "add o y", &[("y", nat())]);
    assert_eq!(*t.ty(), nat());
    let x = term(&p, "x", &[("x", Type::INT)]);
    assert_eq!(*x.ty(), Type::INT);
    assert!(parse_term(&p, "0 0", &BTreeMap::new(), &[]).is_err());
    assert!(parse_term(&p, "nosuch 1", &BTreeMap::new(), &[]).is_err());
    assert!(parse_term(&p, "s 1", &BTreeMap::new(), &[]).is_err());
    // Application associates to the left.
    let t = term(&p, "f 1 2", &[]);
    assert_eq!(t.args().len(), 2);
    assert_eq!(t.prefix(1).args().len(), 1);
}

#[test]
fn matching() {
    let p = common::factorial();
    let ints = [("x", Type::INT), ("i", Type::INT), ("a", Type::INT)];
    let pat = term(&p, "u x i a", &ints);
    let subj = term(&p, "u x 2 1", &ints);
    let g = match_term(&pat, &subj).unwrap();
    assert_eq!(g.len(), 3);
    assert_eq!(pat.subst(&g), subj);
    assert_eq!(g.get(&Var::new("i", Type::INT)), Some(&Term::int(2)));
    assert_eq!(g.get(&Var::new("a", Type::INT)), Some(&Term::int(1)));

    let r = lcri_core::templates::install_recursors(&p).unwrap();
    let f = Type::curried([Type::INT, Type::INT], Type::INT);
    let pat = term(
        &r,
        "tailup f x y z",
        &[("f", f), ("x", Type::INT), ("y", Type::INT), ("z", Type::INT)],
    );
    let subj = term(&r, "tailup [*] 2 w 1", &[("w", Type::INT)]);
    let g = match_term(&pat, &subj).unwrap();
    assert_eq!(g.get(&Var::new("y", Type::INT)).unwrap().to_string(), "w");
    assert_eq!(
        g.get(&Var::new("f", Type::curried([Type::INT, Type::INT], Type::INT)))
            .unwrap()
            .to_string(),
        "[*]"
    );
    assert_eq!(pat.subst(&g), subj);

    let q = sig();
    let pat = term(&q, "f a a", &[("a", Type::INT)]);
    assert!(match_term(&pat, &term(&q, "g 1 2", &[])).is_none());
    assert!(match_term(&pat, &term(&q, "f 1 2", &[])).is_none());
    assert!(match_term(&pat, &term(&q, "f 3 3", &[])).is_some());
}

#[test]
fn substitution() {
    let p = common::factorial();
    let x = Var::new("x", Type::INT);
    let mut g = Substitution::new();
    g.insert(x.clone(), Term::int(2)).unwrap();
    assert_eq!(term(&p, "x + 3", &[("x", Type::INT)]).subst(&g).to_string(), "2 + 3");
    let mut g4 = Substitution::new();
    g4.insert(x.clone(), Term::int(4)).unwrap();
    assert_eq!(term(&p, "facTU x", &[("x", Type::INT)]).subst(&g4).to_string(), "facTU 4");
    let ground = term(&p, "facRD 3 * 2", &[]);
    assert_eq!(ground.subst(&g), ground);
    // Type-preserving only.
    assert!(g.insert(Var::new("b", Type::BOOL), Term::int(1)).is_err());
}

#[test]
fn filling() {
    let p = common::funfac();
    let holes = [Type::INT, Type::INT];
    let ints = [("i", Type::INT), ("a", Type::INT)];
    let f = parse_term(&p, "#1 * #2", &BTreeMap::new(), &holes).unwrap();
    let filled = f.fill(&[term(&p, "i", &ints), term(&p, "a", &ints)]).unwrap();
    assert_eq!(filled.to_string(), "i * a");

    let fh = Type::arrow(Type::INT, Type::INT);
    let hv = [("h", fh.clone()), ("i", Type::INT), ("a", Type::INT)];
    let f = parse_term(&p, "h #1 * #2", &env(&[("h", fh)]), &holes).unwrap();
    let filled = f.fill(&[term(&p, "i", &hv), term(&p, "a", &hv)]).unwrap();
    assert_eq!(filled.to_string(), "h i * a");

    let plain = term(&p, "3 + 4", &[]);
    assert_eq!(plain.fill(&[Term::int(1), Term::int(2)]).unwrap(), plain);
    assert!(f.fill(&[Term::bool(true), Term::int(1)]).is_err());
    assert!(f.fill(&[Term::int(1)]).is_err());
    // Hole names are reserved in programs.
    assert!(parse_program("fun q :: Int -> Int; rule q x -> #1;").is_err());
}

#[test]
fn positions_and_replacement() {
    let p = common::factorial();
    let vars = [("z", Type::INT), ("z1", Type::INT)];
    let t = term(&p, "z * facRD z1", &vars);
    assert_eq!(t.at(&[1]).unwrap().to_string(), "facRD z1");
    let s = term(&p, "7", &[]);
    assert_eq!(t.replace_at(&[], s.clone()).unwrap(), s);
    for pos in t.positions() {
        let r = t.replace_at(&pos, Term::int(5));
        if let Ok(r) = r {
            assert_eq!(r.at(&pos), Some(&Term::int(5)));
        }
    }
    assert!(t.at(&[7]).is_none());
    assert!(t.replace_at(&[1], Term::bool(true)).is_err());
}

#[test]
fn classification() {
    let p = sig();
    let ar = |s: &Symbol| p.arity(s);
    let c = classify(&term(&p, "7 * 0", &[]), &ar);
    assert!(c.ground && c.theory && !c.value);
    let c = classify(&term(&p, "true", &[]), &ar);
    assert!(c.ground && c.theory && c.value);
    let c = classify(&term(&p, "s (s o)", &[]), &ar);
    assert!(c.ground && c.semi_constructor && !c.theory);
    let c = classify(&term(&p, "add o o", &[]), &ar);
    assert!(!c.semi_constructor);
    // A partial application of a defined symbol is semi-constructor.
    assert!(is_semi_constructor(&term(&p, "f 1", &[]), &ar));
}

fn int_term() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        (-5i32..6).prop_map(|n| if n < 0 { format!("({n})") } else { n.to_string() }),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("(f {a} {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            inner.clone().prop_map(|a| format!("(k {a})")),
            inner.prop_map(|a| format!("(g {a} 1)")),
        ]
    })
}

fn ground_nat() -> impl Strategy<Value = String> {
    Just("o".to_string()).prop_recursive(5, 16, 1, |inner| inner.prop_map(|a| format!("(s {a})")))
}

proptest! {
    #[test]
    fn match_round_trip(pat in int_term(), a in int_term(), b in int_term()) {
        let p = sig();
        let vars = [("x", Type::INT), ("y", Type::INT)];
        let pattern = term(&p, &pat, &vars);
        let mut g = Substitution::new();
        g.insert(Var::new("x", Type::INT), term(&p, &a, &vars)).unwrap();
        g.insert(Var::new("y", Type::INT), term(&p, &b, &vars)).unwrap();
        let subject = pattern.subst(&g);
        let found = match_term(&pattern, &subject).expect("an instance matches");
        prop_assert_eq!(pattern.subst(&found), subject.clone());
        prop_assert_eq!(subject.ty(), pattern.ty());
    }

    #[test]
    fn fill_agrees_with_replacement(a in int_term(), b in int_term(), c in int_term()) {
        let p = sig();
        let vars = [("x", Type::INT), ("y", Type::INT)];
        let holes = [Type::INT, Type::INT];
        let ctx = parse_term(&p, &format!("f (g #1 {c}) #2"), &env(&vars), &holes).unwrap();
        let (ta, tb) = (term(&p, &a, &vars), term(&p, &b, &vars));
        let filled = ctx.fill(&[ta.clone(), tb.clone()]).unwrap();
        let mut r = ctx.clone();
        for (k, t) in [(1u32, ta), (2, tb)] {
            for pos in ctx.hole_positions(k) {
                r = r.replace_at(&pos, t.clone()).unwrap();
            }
        }
        prop_assert_eq!(filled, r);
    }

    #[test]
    fn semi_constructor_terms_are_irreducible(n in ground_nat()) {
        let p = sig();
        let t = term(&p, &format!("add {n}"), &[]);
        let ar = |s: &Symbol| p.arity(s);
        prop_assert!(is_semi_constructor(&t, &ar));
        prop_assert!(candidate_positions(&p, &t).into_iter().all(|(_, r)| r.is_none()));
        prop_assert!(matches!(t.head(), Head::Sym(_)));
    }
}
