//! The HTTP service over one project. Mutations are serialized and each one
//! is persisted before its response is sent; reads see the last persisted
//! state and never wait on the model.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{Method, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use transdoc_agents::{Clock, Gateway, SynthesisOutcome};
use transdoc_core::doc::TextSpan;

use crate::app::{self, Decision, InterpretOptions, Selection, ServiceError};
use crate::project::Project;
use crate::wire::{page, session_view, wire_document, SessionView};

pub struct AppState {
    /// The project as last persisted.
    project: RwLock<Project>,
    /// Held for the whole of each mutation.
    writer: Mutex<()>,
    gateway: Arc<Gateway>,
    clock: Arc<dyn Clock>,
    log: Option<Mutex<File>>,
}

impl AppState {
    pub fn new(project: Project, gateway: Arc<Gateway>, clock: Arc<dyn Clock>) -> Self {
        Self { project: RwLock::new(project), writer: Mutex::new(()), gateway, clock, log: None }
    }

    /// Appends every mutation request to a JSON-lines file.
    pub fn logging_to(mut self, path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        self.log = Some(Mutex::new(file));
        Ok(self)
    }

    pub fn snapshot(&self) -> Project {
        self.project.read().expect("project lock").clone()
    }

    fn publish(&self, project: &Project) {
        *self.project.write().expect("project lock") = project.clone();
    }
}

/// One line of the mutation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedRequest {
    pub method: String,
    pub path: String,
    pub body: serde_json::Value,
    pub status: u16,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectRequest {
    #[serde(default)]
    pub span: Option<TextSpan>,
    #[serde(default)]
    pub fragment_id: Option<u64>,
    #[serde(flatten)]
    pub options: InterpretOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InterpretResponse {
    pub outcome: SynthesisOutcome,
    pub session: SessionView,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

fn error_response(e: &ServiceError) -> Response {
    let status = StatusCode::from_u16(e.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, Json(ErrorBody { error: e.to_string() })).into_response()
}

fn respond<T: Serialize>(result: Result<T, ServiceError>) -> Response {
    match result {
        Ok(v) => Json(v).into_response(),
        Err(e) => error_response(&e),
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/document", get(document))
        .route("/provenance/{id}", get(provenance))
        .route("/session", get(session))
        .route("/select", post(select))
        .route("/approve", post(|s: State<Arc<AppState>>, b: Bytes| decision(s, b, "/approve", Decision::Approve)))
        .route("/reject", post(|s: State<Arc<AppState>>, b: Bytes| decision(s, b, "/reject", Decision::Reject)))
        .route("/revise-goal", post(|s: State<Arc<AppState>>, b: Bytes| decision(s, b, "/revise-goal", Decision::ReviseGoal)))
        .route("/cancel", post(|s: State<Arc<AppState>>, b: Bytes| decision(s, b, "/cancel", Decision::Cancel)))
        .route("/suggest", post(suggest))
        .with_state(state)
}

async fn index(State(state): State<Arc<AppState>>) -> Response {
    match wire_document(&state.snapshot()) {
        Ok(wire) => Html(page(&wire)).into_response(),
        Err(e) => error_response(&e.into()),
    }
}

async fn document(State(state): State<Arc<AppState>>) -> Response {
    respond(wire_document(&state.snapshot()).map_err(ServiceError::from))
}

async fn provenance(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<u64>) -> Response {
    respond(app::provenance(&state.snapshot(), id))
}

async fn session(State(state): State<Arc<AppState>>) -> Response {
    Json(session_view(&state.snapshot())).into_response()
}

/// Runs `op` on a private copy of the project while holding the writer
/// lock, off the async runtime, and logs the request with its status.
async fn mutate<T, F>(state: Arc<AppState>, path: &'static str, body: Bytes, op: F) -> Response
where
    T: Serialize + Send + 'static,
    F: FnOnce(&AppState, &mut Project, serde_json::Value) -> Result<T, ServiceError> + Send + 'static,
{
    let result = tokio::task::spawn_blocking(move || {
        let _guard = state.writer.lock().expect("writer lock");
        let value: serde_json::Value = if body.iter().all(u8::is_ascii_whitespace) {
            serde_json::Value::Null
        } else {
            match serde_json::from_slice(&body) {
                Ok(v) => v,
                Err(e) => {
                    let err = ServiceError::InvalidSelection(format!("malformed request body: {e}"));
                    return log_and_respond(&state, path, serde_json::Value::Null, Err::<(), _>(err));
                }
            }
        };
        let mut project = state.snapshot();
        let result = op(&state, &mut project, value.clone());
        log_and_respond(&state, path, value, result)
    })
    .await;
    result.unwrap_or_else(|e| (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response())
}

fn log_and_respond<T: Serialize>(
    state: &AppState,
    path: &str,
    body: serde_json::Value,
    result: Result<T, ServiceError>,
) -> Response {
    let response = respond(result);
    if let Some(log) = &state.log {
        let entry = LoggedRequest {
            method: Method::POST.to_string(),
            path: path.to_string(),
            body,
            status: response.status().as_u16(),
        };
        let mut file = log.lock().expect("log lock");
        let line = serde_json::to_string(&entry).expect("log entry serializes");
        if let Err(e) = writeln!(file, "{line}") {
            return (StatusCode::INTERNAL_SERVER_ERROR, format!("cannot write request log: {e}")).into_response();
        }
    }
    response
}

async fn select(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    mutate(state, "/select", body, |state, project, value| {
        let req: SelectRequest = if value.is_null() {
            SelectRequest::default()
        } else {
            serde_json::from_value(value).map_err(|e| ServiceError::InvalidSelection(e.to_string()))?
        };
        let selection = match (req.span, req.fragment_id) {
            (Some(span), None) => Selection::Span(span),
            (None, Some(id)) => Selection::Fragment(id),
            _ => return Err(ServiceError::InvalidSelection("give exactly one of span and fragmentId".into())),
        };
        let outcome =
            app::interpret(project, &state.gateway, state.clock.as_ref(), selection, req.options, |p| state.publish(p))?;
        Ok(InterpretResponse { outcome, session: session_view(project) })
    })
    .await
}

async fn decision(State(state): State<Arc<AppState>>, body: Bytes, path: &'static str, d: Decision) -> Response {
    mutate(state, path, body, move |state, project, _| {
        app::decide(project, state.clock.as_ref(), d)?;
        state.publish(project);
        Ok(session_view(project))
    })
    .await
}

async fn suggest(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    mutate(state, "/suggest", body, |state, project, _| {
        let out = app::run_suggest(project, &state.gateway)?;
        state.publish(project);
        Ok(out)
    })
    .await
}

/// Serves until interrupted.
pub async fn serve(state: Arc<AppState>, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
