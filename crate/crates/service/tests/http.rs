mod common;

use std::path::Path;
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::{clock, demo_copy, TIMESTAMP};
use transdoc::project::Project;
use transdoc::server::{router, AppState, LoggedRequest};
use transdoc_agents::{ChatBackend, CompletionRequest, FixedClock, Gateway, GatewayError, MockBackend, MockReply};

const GOOD: &str = r#"(model_ "LSTM" tableData).time_s"#;
const STACK_CANDIDATE: &str = r#"improves (compare (model_ "3 stacked BiLSTM").f1 (model_ "2 stacked BiLSTM").f1)"#;

fn app_with(path: &Path, backend: impl ChatBackend + 'static, log: Option<&Path>) -> Router {
    let project = Project::load(path, &clock()).unwrap();
    let mut state = AppState::new(project, Arc::new(Gateway::new(backend, "mock")), Arc::new(FixedClock(TIMESTAMP.into())));
    if let Some(log) = log {
        state = state.logging_to(log).unwrap();
    }
    router(Arc::new(state))
}

async fn call(app: &Router, method: &str, path: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(path).header("content-type", "application/json");
    let req = req.body(body.map_or(Body::empty(), |b| Body::from(b.to_string()))).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
}

async fn raw(app: &Router, path: &str, body: &'static str) -> StatusCode {
    let req = Request::builder().method("POST").uri(path).body(Body::from(body)).unwrap();
    app.clone().oneshot(req).await.unwrap().status()
}

fn fresh_lstm(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("lstm/p.json");
    std::fs::copy(dir.join("lstm/fresh.project.json"), &p).unwrap();
    p
}

#[tokio::test]
async fn provenance_of_the_comparison_hole() {
    let dir = demo_copy();
    let app = app_with(&dir.path().join("lstm/project.json"), MockBackend::default(), None);
    let (status, body) = call(&app, "GET", "/provenance/0", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        body,
        json!({
            "fragmentId": 0,
            "cells": [
                { "dataset": "tableData", "row": 0, "field": "time_s" },
                { "dataset": "tableData", "row": 1, "field": "time_s" }
            ],
            "linkedFragments": []
        })
    );
    // The stale hole points at the LSTM2 row, not at LSTM.
    let (_, body) = call(&app, "GET", "/provenance/1", None).await;
    assert_eq!(body["cells"], json!([{ "dataset": "tableData", "row": 4, "field": "time_s" }]));
}

#[tokio::test]
async fn error_status_contracts() {
    let dir = demo_copy();
    let app = app_with(&dir.path().join("lstm/project.json"), MockBackend::texts(Vec::<String>::new()), None);
    assert_eq!(call(&app, "GET", "/provenance/9", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&app, "POST", "/approve", None).await.0, StatusCode::CONFLICT);
    assert_eq!(call(&app, "POST", "/reject", None).await.0, StatusCode::CONFLICT);
    assert_eq!(call(&app, "POST", "/revise-goal", None).await.0, StatusCode::CONFLICT);
    assert_eq!(call(&app, "POST", "/cancel", None).await.0, StatusCode::CONFLICT);

    let span = |s: usize, e: usize| json!({ "span": { "start": s, "end": e } });
    let (status, body) = call(&app, "POST", "/select", Some(span(60, 99))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
    // Inside the approved "growing" hole.
    assert_eq!(call(&app, "POST", "/select", Some(span(29, 31))).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(call(&app, "POST", "/select", Some(span(3, 3))).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    let both = json!({ "span": { "start": 0, "end": 3 }, "fragmentId": 0 });
    assert_eq!(call(&app, "POST", "/select", Some(both)).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(call(&app, "POST", "/select", None).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(raw(&app, "/select", "{not json").await, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(call(&app, "POST", "/select", Some(json!({ "fragmentId": 3 }))).await.0, StatusCode::NOT_FOUND);

    // An empty script stands in for an unreachable model.
    let (status, body) = call(&app, "POST", "/select", Some(span(0, 3))).await;
    assert_eq!(status, StatusCode::BAD_GATEWAY, "{body}");
    assert_eq!(call(&app, "GET", "/session", None).await.1["state"]["state"], "awaitingSelection");
}

#[tokio::test]
async fn approve_is_reflected_in_the_document_and_on_disk() {
    let dir = demo_copy();
    let path = fresh_lstm(dir.path());
    let app = app_with(&path, MockBackend::texts([GOOD]), None);
    let (status, body) = call(&app, "POST", "/select", Some(json!({ "span": { "start": 41, "end": 43 } }))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["outcome"], json!({ "kind": "success", "expr": GOOD, "attempts": 1 }));
    assert_eq!(body["session"]["state"]["state"], "awaitingValidation");
    assert_eq!(body["session"]["tentativeText"], "The training time per epoch growing from 67 seconds to 106 seconds.");

    let (_, doc) = call(&app, "GET", "/document", None).await;
    assert_eq!((doc["revision"].clone(), doc["fragments"].clone()), (json!(0), json!([])));
    assert_eq!(doc["sessionState"], "AwaitingValidation");

    assert_eq!(call(&app, "POST", "/approve", None).await.0, StatusCode::OK);
    let (_, doc) = call(&app, "GET", "/document", None).await;
    assert_eq!(doc["revision"], 1);
    assert_eq!(doc["fragments"][0]["text"], "67");
    assert_eq!(doc["fragments"][0]["cells"], json!([{ "dataset": "tableData", "row": 0, "field": "time_s" }]));

    let on_disk = Project::load(&path, &clock()).unwrap();
    assert_eq!(on_disk.to_json(), std::fs::read_to_string(&path).unwrap());
    assert_eq!(on_disk.session.history.len(), 2);

    let (_, page) = call(&app, "GET", "/", None).await;
    assert!(page.as_str().unwrap().contains(r#"data-fragment="0">67</span>"#));
}

#[tokio::test]
async fn hidden_target_is_not_sent_to_the_model() {
    let dir = demo_copy();
    let backend = Arc::new(MockBackend::texts([GOOD]));
    let app = app_with(&fresh_lstm(dir.path()), backend.clone(), None);
    let body = json!({
        "span": { "start": 41, "end": 43 },
        "shareTarget": false,
        "shareParagraphValue": false,
        "maxRetries": 1
    });
    assert_eq!(call(&app, "POST", "/select", Some(body)).await.0, StatusCode::OK);
    let user: Value = serde_json::from_str(&backend.requests()[0].messages[1].content).unwrap();
    assert_eq!(user["paragraph"], "The training time per epoch growing from [REPLACE] seconds to 106 seconds.");
    assert!(user.get("paragraphValue").is_none(), "{user}");
}

/// Answers only when the test says so.
struct Gated(Mutex<Receiver<String>>);

impl ChatBackend for Gated {
    fn complete(&self, _: &CompletionRequest) -> Result<String, GatewayError> {
        self.0.lock().unwrap().recv().map_err(|e| GatewayError::Transport(e.to_string()))
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn reads_do_not_wait_for_the_model() {
    let dir = demo_copy();
    let (tx, rx): (Sender<String>, _) = channel();
    let app = app_with(&fresh_lstm(dir.path()), Gated(Mutex::new(rx)), None);
    let pending = {
        let app = app.clone();
        tokio::spawn(async move {
            call(&app, "POST", "/select", Some(json!({ "span": { "start": 41, "end": 43 } }))).await
        })
    };
    let mut seen = String::new();
    for _ in 0..200 {
        let (status, body) = call(&app, "GET", "/session", None).await;
        assert_eq!(status, StatusCode::OK);
        seen = body["state"]["state"].as_str().unwrap().to_string();
        if seen == "synthesizing" {
            break;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    assert_eq!(seen, "synthesizing");
    // A second mutation queues behind the first rather than interleaving.
    let queued = {
        let app = app.clone();
        tokio::spawn(async move { call(&app, "POST", "/approve", None).await })
    };
    tx.send(GOOD.into()).unwrap();
    assert_eq!(pending.await.unwrap().0, StatusCode::OK);
    assert_eq!(queued.await.unwrap().0, StatusCode::OK);
    assert_eq!(call(&app, "GET", "/document", None).await.1["revision"], 1);
}

fn stacking_script() -> Vec<MockReply> {
    let suggestion = "Stacking more layers of BiLSTMs [REPLACE value=\"does not further improve\"] F1-scores.";
    [suggestion, STACK_CANDIDATE, "\"F1-scores\""].into_iter().map(|s| MockReply::Text(s.into())).collect()
}

#[tokio::test]
async fn replaying_the_mutation_log_reproduces_the_project_file() {
    let dir = demo_copy();
    let original = dir.path().join("stacking/project.json");
    let replica = dir.path().join("stacking/replica.json");
    std::fs::copy(&original, &replica).unwrap();
    let log = dir.path().join("requests.jsonl");

    let app = app_with(&original, MockBackend::new(stacking_script()), Some(&log));
    let steps = [
        ("/suggest", None),
        ("/select", Some(json!({ "fragmentId": 0, "maxRetries": 1 }))),
        ("/revise-goal", None),
        ("/approve", None),
        ("/approve", None),
        ("/select", Some(json!({ "span": { "start": 49, "end": 58 }, "maxRetries": 1 }))),
        ("/reject", None),
    ];
    let mut statuses = Vec::new();
    for (path, body) in steps.clone() {
        statuses.push(call(&app, "POST", path, body).await.0.as_u16());
    }
    assert_eq!(statuses, [200, 200, 200, 200, 409, 200, 200]);

    let entries: Vec<LoggedRequest> = std::fs::read_to_string(&log)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(entries.len(), steps.len());

    let replay = app_with(&replica, MockBackend::new(stacking_script()), None);
    for e in &entries {
        let body = if e.body.is_null() { None } else { Some(e.body.clone()) };
        let (status, _) = call(&replay, &e.method, &e.path, body).await;
        assert_eq!(status.as_u16(), e.status, "{}", e.path);
    }
    let a = std::fs::read_to_string(&original).unwrap();
    let b = std::fs::read_to_string(&replica).unwrap();
    assert_eq!(a, b);
    let project: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(project["session"]["history"].as_array().unwrap().len(), 3);
}
