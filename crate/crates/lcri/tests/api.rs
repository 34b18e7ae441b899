use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use lcri::service::Store;
use lcri_core::kernel::{sample_soundness, SampleConfig, Status};
use lcri_core::trace::Trace;
use lcri_core::{parse, Solver};
use serde_json::{json, Value};
use tower::ServiceExt;

const FACTORIAL: &str = include_str!("../../../corpus/factorial.lcstrs");

fn app() -> Router {
    lcri::api::router(Arc::new(Store::new(Solver::new(), None)))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, v)
}

async fn create(app: &Router, body: Value) -> String {
    let (s, v) = call(app, "POST", "/v1/sessions", Some(body)).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    v["id"].as_str().unwrap().to_string()
}

fn path(id: &str, rest: &str) -> String {
    format!("/v1/sessions/{id}{rest}")
}

#[tokio::test]
async fn two_sided_tactic_proves_the_first_goal() {
    let app = app();
    let (s, v) = call(&app, "POST", "/v1/sessions", Some(json!({"program": FACTORIAL}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["goals"].as_array().unwrap().len(), 1);
    assert_eq!(v["status"], "open");
    assert_eq!(v["version"], 0);
    let id = v["id"].as_str().unwrap();

    let (s, v) = call(
        &app,
        "POST",
        &path(id, "/tactics"),
        Some(json!({"tactic": {"tactic": "two_sided", "target": 0}})),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["status"], "proved");
    assert_eq!(v["goals"], json!([]));
    assert_eq!(v["version"], 1);

    // The exported trace replays in the kernel to the same verdict, and the
    // goal agrees with evaluation on sampled instances.
    let (s, t) = call(&app, "GET", &path(id, "/trace"), None).await;
    assert_eq!(s, StatusCode::OK);
    let trace: Trace = serde_json::from_value(t).unwrap();
    let program = parse::parse_program(FACTORIAL).unwrap();
    let replayed = trace.replay(&program, &Solver::new()).unwrap();
    assert_eq!(replayed.status(), Status::Proved);
    assert_eq!(replayed.trace().len(), v["steps"].as_u64().unwrap() as usize);
    let goal = trace.goal_equation(&program).unwrap();
    assert!(sample_soundness(&program, &Solver::new(), &goal, &SampleConfig::default()).is_ok());
}

#[tokio::test]
async fn rejected_delete_reports_the_kernel_reason() {
    let app = app();
    let id = create(&app, json!({"program": FACTORIAL})).await;
    let (s, v) = call(
        &app,
        "POST",
        &path(&id, "/steps"),
        Some(json!({"step": {"step": "delete", "target": 0}})),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["code"], "delete_condition");
    assert!(v["message"].as_str().unwrap().contains("neither s = t nor φ unsatisfiable"), "{v}");
    let (_, v) = call(&app, "GET", &path(&id, ""), None).await;
    assert_eq!(v["version"], 0);
    assert_eq!(v["steps"], 0);
}

#[tokio::test]
async fn versions_guard_concurrent_edits() {
    let app = app();
    let id = create(&app, json!({"program": FACTORIAL})).await;
    let simplify = json!({"step": "simplify", "target": 0, "side": "left", "position": [], "using": {"rule": 0}});

    let (s, v) = call(
        &app,
        "POST",
        &path(&id, "/steps"),
        Some(json!({"step": simplify, "expected_version": 3})),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["code"], "conflict");

    let (s, v) = call(
        &app,
        "POST",
        &path(&id, "/steps"),
        Some(json!({"step": simplify, "expected_version": 0})),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["version"], 1);
    assert_eq!(v["goals"][0]["lhs"], "u x 1 1");

    let (s, v) = call(&app, "POST", &path(&id, "/undo"), Some(json!({"count": 4}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST, "{v}");

    let (s, v) = call(&app, "POST", &path(&id, "/undo"), None).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["version"], 2);
    assert_eq!(v["steps"], 0);
    assert_eq!(v["goals"][0]["lhs"], "facTU x");
}

#[tokio::test]
async fn unknown_sessions_are_not_found() {
    let app = app();
    for (method, rest, body) in [
        ("GET", "", None),
        ("DELETE", "", None),
        ("GET", "/trace", None),
        ("GET", "/suggestions", None),
        ("POST", "/steps", Some(json!({"step": {"step": "delete", "target": 0}}))),
    ] {
        let (s, v) = call(&app, method, &path("missing", rest), body).await;
        assert_eq!(s, StatusCode::NOT_FOUND, "{method} {rest}");
        assert_eq!(v["code"], "not_found");
    }
}

#[tokio::test]
async fn bad_programs_and_goals_are_client_errors() {
    let app = app();
    let (s, v) = call(&app, "POST", "/v1/sessions", Some(json!({"program": "fun f :: Int -> ;"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "bad_request");
    let (s, _) = call(&app, "POST", "/v1/sessions", Some(json!({"program": FACTORIAL, "goal": 9}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(
        &app,
        "POST",
        "/v1/sessions",
        Some(json!({"program": FACTORIAL, "equation": "facTU ~"})),
    )
    .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, v) = call(
        &app,
        "POST",
        "/v1/sessions",
        Some(json!({"program": FACTORIAL, "equation": "facTU x ~ facTD x"})),
    )
    .await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["goal"], "facTU x ~ facTD x");
}

#[tokio::test]
async fn list_and_delete() {
    let app = app();
    let a = create(&app, json!({"program": FACTORIAL})).await;
    let b = create(&app, json!({"program": FACTORIAL, "goal": 2})).await;
    let (_, v) = call(&app, "GET", "/v1/sessions", None).await;
    let mut ids: Vec<&str> = v.as_array().unwrap().iter().map(|s| s["id"].as_str().unwrap()).collect();
    ids.sort();
    let mut want = vec![a.as_str(), b.as_str()];
    want.sort();
    assert_eq!(ids, want);

    let (s, _) = call(&app, "DELETE", &path(&a, ""), None).await;
    assert_eq!(s, StatusCode::NO_CONTENT);
    let (_, v) = call(&app, "GET", "/v1/sessions", None).await;
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["id"], b.as_str());
}

#[tokio::test]
async fn suggestions_are_applicable() {
    let app = app();
    let id = create(&app, json!({"program": FACTORIAL})).await;
    let (s, v) = call(&app, "GET", &path(&id, "/suggestions?target=0"), None).await;
    assert_eq!(s, StatusCode::OK);
    let steps = v["steps"].as_array().unwrap();
    assert!(!steps.is_empty());
    let tactics: Vec<&str> = v["tactics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["tactic"]["tactic"].as_str().unwrap())
        .collect();
    assert!(tactics.contains(&"two_sided") && tactics.contains(&"one_sided") && tactics.contains(&"auto"));
    let mut symbols: Vec<&str> = v["matches"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["symbol"].as_str().unwrap())
        .collect();
    symbols.sort();
    assert_eq!(symbols, ["U", "d", "facRD", "u"]);

    // Every suggested step is accepted from the state it was suggested for.
    for step in steps {
        let (s, r) = call(&app, "POST", &path(&id, "/steps"), Some(json!({"step": step}))).await;
        assert_eq!(s, StatusCode::OK, "{step} -> {r}");
        let (s, _) = call(&app, "POST", &path(&id, "/undo"), None).await;
        assert_eq!(s, StatusCode::OK);
    }

    // Out of range targets offer nothing.
    let (_, v) = call(&app, "GET", &path(&id, "/suggestions?target=5"), None).await;
    assert_eq!(v["steps"], json!([]));
    assert_eq!(v["tactics"], json!([]));
}

#[tokio::test]
async fn traces_move_between_sessions() {
    let app = app();
    let a = create(&app, json!({"program": FACTORIAL, "goal": 1})).await;
    let (s, done) = call(
        &app,
        "POST",
        &path(&a, "/tactics"),
        Some(json!({"tactic": {"tactic": "two_sided", "target": 0}})),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{done}");
    let (_, trace) = call(&app, "GET", &path(&a, "/trace"), None).await;

    let b = create(&app, json!({"program": FACTORIAL, "goal": 1})).await;
    let (s, v) = call(
        &app,
        "PUT",
        &path(&b, "/trace"),
        Some(json!({"trace": trace, "expected_version": 0})),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{v}");
    for key in ["status", "goals", "hypotheses", "axioms", "requirements", "steps", "goal"] {
        assert_eq!(v[key], done[key], "{key}");
    }

    // A trace for another goal is refused.
    let c = create(&app, json!({"program": FACTORIAL, "goal": 0})).await;
    let (s, v) = call(&app, "PUT", &path(&c, "/trace"), Some(json!({"trace": trace}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST, "{v}");

    // A corrupted step makes the replay diverge and leaves the session as it was.
    let mut bad = trace.clone();
    let steps = bad["steps"].as_array_mut().unwrap();
    let k = steps.iter().position(|s| s["step"] == "simplify").unwrap();
    steps[k]["position"] = json!([7, 7]);
    let (s, v) = call(&app, "PUT", &path(&b, "/trace"), Some(json!({"trace": bad}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["code"], "replay_divergence");
    assert!(v["message"].as_str().unwrap().contains(&format!("step {k}")), "{v}");
    let (_, v) = call(&app, "GET", &path(&b, ""), None).await;
    assert_eq!(v["version"], 1);
    assert_eq!(v["status"], done["status"]);
}

#[tokio::test]
async fn shipped_traces_import_to_their_verdicts() {
    let app = app();
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus");
    let mut seen = 0;
    for entry in std::fs::read_dir(format!("{dir}/traces")).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        let stem = name.split('-').next().unwrap();
        let program = std::fs::read_to_string(format!("{dir}/{stem}.lcstrs")).unwrap();
        let trace: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        let id = create(&app, json!({"program": program, "equation": trace["goal"]})).await;
        let (s, v) = call(&app, "PUT", &path(&id, "/trace"), Some(json!({"trace": trace}))).await;
        assert_eq!(s, StatusCode::OK, "{name}: {v}");
        assert_eq!(v["status"], "proved", "{name}");
        seen += 1;
    }
    assert_eq!(seen, 5);
}
