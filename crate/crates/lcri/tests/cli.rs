use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lcri_core::kernel::Status;
use lcri_core::trace::Trace;
use lcri_core::{parse, Solver};

const FACTORIAL: &str = include_str!("../../../corpus/factorial.lcstrs");

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn lcri(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcri")).args(args).output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn write(dir: &Path, name: &str, src: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, src).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn proves_the_corpus_and_writes_replayable_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let traces = tmp.path().join("traces");
    let file = corpus("factorial.lcstrs");
    let out = lcri(&["prove", file.to_str().unwrap(), "--trace-dir", traces.to_str().unwrap()]);
    let stdout = text(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}{}", text(&out.stderr));
    for k in 0..4 {
        assert!(stdout.contains(&format!("goal {k}: ")), "{stdout}");
    }
    assert_eq!(stdout.matches(": proved (").count(), 4, "{stdout}");
    assert!(stdout.contains("instances agree"));

    let program = parse::parse_program(FACTORIAL).unwrap();
    for k in 0..4 {
        let json = std::fs::read_to_string(traces.join(format!("factorial-goal{k}.json"))).unwrap();
        let t = Trace::from_json(&json).unwrap();
        assert_eq!(t.verdict, Status::Proved);
        assert_eq!(t.replay(&program, &Solver::new()).unwrap().status(), Status::Proved);
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let fac = corpus("factorial.lcstrs");
    let fac = fac.to_str().unwrap();

    let bad = write(tmp.path(), "bad.lcstrs", "fun f :: Int -> Int;\nrule f x -> ;\n");
    let out = lcri(&["prove", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("bad.lcstrs:2:"), "{}", text(&out.stderr));

    let out = lcri(&["prove", "/nonexistent/x.lcstrs"]);
    assert_eq!(out.status.code(), Some(1));

    let out = lcri(&["prove", fac, "--goal", "7"]);
    assert_eq!(out.status.code(), Some(1));

    let out = lcri(&["prove", fac, "--goal", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    assert!(!text(&out.stdout).contains("goal 0"));

    let wrong = write(
        tmp.path(),
        "wrong.lcstrs",
        &format!("{FACTORIAL}\ngoal facTU x ~ facRD x + 1 [x >= 1];\n"),
    );
    let out = lcri(&["prove", &wrong, "--goal", "4", "--budget", "0"]);
    assert_eq!(out.status.code(), Some(3), "{}", text(&out.stdout));
    assert!(text(&out.stdout).contains("open: "));
}

#[test]
fn eval_agrees_with_factorial() {
    let fac = corpus("factorial.lcstrs");
    for n in 1..=10i64 {
        let want: i64 = (1..=n).product();
        for f in ["facTU", "facTD", "facRD", "facRU"] {
            let out = lcri(&["eval", fac.to_str().unwrap(), &format!("{f} {n}")]);
            assert_eq!(out.status.code(), Some(0));
            assert_eq!(text(&out.stdout).trim(), want.to_string(), "{f} {n}");
        }
    }
    let out = lcri(&["eval", fac.to_str().unwrap(), "facTU"]);
    assert_eq!(out.status.code(), Some(0));
    let out = lcri(&["eval", fac.to_str().unwrap(), "nope 3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_reports_coverage() {
    let tmp = tempfile::tempdir().unwrap();
    let fac = corpus("factorial.lcstrs");
    let out = lcri(&["check", fac.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    assert!(text(&out.stdout).contains("all 11 rules oriented"));

    // Without the base case facRD is undefined below 2.
    let line = FACTORIAL.lines().find(|l| l.starts_with("rule facRD x -> 1")).unwrap();
    let gap = write(tmp.path(), "gap.lcstrs", &FACTORIAL.replacen(line, "", 1));
    let out = lcri(&["check", &gap]);
    assert_eq!(out.status.code(), Some(3));
    assert!(text(&out.stdout).contains("facRD: not covered"), "{}", text(&out.stdout));
}
