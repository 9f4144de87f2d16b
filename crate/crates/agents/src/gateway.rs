//! Chat-completion client behind one interface: a live HTTP backend, a
//! scripted mock and a transcript replayer.

use std::collections::VecDeque;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub const DEFAULT_TEMPERATURE: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CompletionRequest {
    pub messages: Vec<ChatMessage>,
    pub model_name: String,
    pub temperature: f64,
    pub max_retries_hint: u32,
}

impl CompletionRequest {
    pub fn new(messages: Vec<ChatMessage>, model_name: &str) -> Self {
        Self { messages, model_name: model_name.to_string(), temperature: DEFAULT_TEMPERATURE, max_retries_hint: 0 }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        let invalid = |m: &str| Err(GatewayError::InvalidRequest(m.to_string()));
        match self.messages.first() {
            Some(m) if m.role == Role::System => {}
            _ => return invalid("first message must have role system"),
        }
        if self.messages.iter().any(|m| m.role != Role::Assistant && m.content.is_empty()) {
            return invalid("system and user messages must be nonempty");
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return invalid("temperature must lie in [0, 2]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GatewayError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("malformed backend response: {0}")]
    Malformed(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("mock script exhausted")]
    ScriptExhausted,
    #[error("replay transcript exhausted")]
    ReplayExhausted,
    #[error("request {index} differs from the recorded transcript")]
    ReplayMismatch { index: usize },
    #[error("{0}")]
    Config(String),
}

impl GatewayError {
    /// Transport-level failures worth retrying; the rest will not improve.
    pub fn is_retryable(&self) -> bool {
        matches!(self, GatewayError::Transport(_) | GatewayError::Timeout | GatewayError::Malformed(_))
    }
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, req: &CompletionRequest) -> Result<String, GatewayError>;
}

/// One scripted mock reply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MockReply {
    Text(String),
    Failure { error: String },
}

/// Answers from a fixed queue and records every request it sees.
#[derive(Debug, Default)]
pub struct MockBackend {
    queue: Mutex<VecDeque<MockReply>>,
    seen: Mutex<Vec<CompletionRequest>>,
}

impl MockBackend {
    pub fn new(replies: impl IntoIterator<Item = MockReply>) -> Self {
        Self { queue: Mutex::new(replies.into_iter().collect()), seen: Mutex::default() }
    }

    pub fn texts<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        Self::new(replies.into_iter().map(|s| MockReply::Text(s.into())))
    }

    /// Reads a JSON array of strings or `{"error": ...}` objects.
    pub fn from_file(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::Config(format!("mock script {}: {e}", path.display())))?;
        let replies: Vec<MockReply> = serde_json::from_str(&text)
            .map_err(|e| GatewayError::Config(format!("mock script {}: {e}", path.display())))?;
        Ok(Self::new(replies))
    }

    pub fn requests(&self) -> Vec<CompletionRequest> {
        self.seen.lock().expect("mock lock").clone()
    }

    pub fn remaining(&self) -> usize {
        self.queue.lock().expect("mock lock").len()
    }
}

impl ChatBackend for MockBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<String, GatewayError> {
        self.seen.lock().expect("mock lock").push(req.clone());
        match self.queue.lock().expect("mock lock").pop_front() {
            Some(MockReply::Text(t)) => Ok(t),
            Some(MockReply::Failure { error }) => Err(GatewayError::Transport(error)),
            None => Err(GatewayError::ScriptExhausted),
        }
    }
}

impl<T: ChatBackend + ?Sized> ChatBackend for Arc<T> {
    fn complete(&self, req: &CompletionRequest) -> Result<String, GatewayError> {
        (**self).complete(req)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub request: CompletionRequest,
    pub response: String,
    pub timestamp: String,
}

pub fn read_transcript(path: &Path) -> Result<Vec<TranscriptEntry>, GatewayError> {
    let file = std::fs::File::open(path)
        .map_err(|e| GatewayError::Config(format!("transcript {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| GatewayError::Config(format!("transcript {}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line)
            .map_err(|e| GatewayError::Config(format!("transcript {} line {}: {e}", path.display(), i + 1)))?;
        out.push(entry);
    }
    Ok(out)
}

/// Plays back recorded responses in order. In strict mode each request must
/// match the recorded one message for message.
#[derive(Debug)]
pub struct ReplayBackend {
    entries: Vec<TranscriptEntry>,
    next: Mutex<usize>,
    strict: bool,
}

impl ReplayBackend {
    pub fn new(entries: Vec<TranscriptEntry>, strict: bool) -> Self {
        Self { entries, next: Mutex::new(0), strict }
    }

    pub fn from_file(path: &Path, strict: bool) -> Result<Self, GatewayError> {
        Ok(Self::new(read_transcript(path)?, strict))
    }
}

impl ChatBackend for ReplayBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<String, GatewayError> {
        let mut next = self.next.lock().expect("replay lock");
        let entry = self.entries.get(*next).ok_or(GatewayError::ReplayExhausted)?;
        if self.strict && entry.request.messages != req.messages {
            return Err(GatewayError::ReplayMismatch { index: *next });
        }
        *next += 1;
        Ok(entry.response.clone())
    }
}

/// OpenAI-style `POST {endpoint}/chat/completions`.
#[derive(Debug)]
pub struct LiveBackend {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl LiveBackend {
    pub fn new(endpoint: &str, api_key: Option<String>, timeout: Duration) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        Ok(Self { endpoint: endpoint.trim_end_matches('/').to_string(), api_key, client })
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: Option<String>,
}

impl ChatBackend for LiveBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<String, GatewayError> {
        let body = serde_json::json!({
            "model": req.model_name,
            "messages": req.messages,
            "temperature": req.temperature,
        });
        let mut call = self.client.post(format!("{}/chat/completions", self.endpoint)).json(&body);
        if let Some(key) = &self.api_key {
            call = call.bearer_auth(key);
        }
        let resp = call.send().map_err(|e| {
            if e.is_timeout() {
                GatewayError::Timeout
            } else {
                GatewayError::Transport(e.to_string())
            }
        })?;
        let status = resp.status();
        let text = resp.text().map_err(|e| GatewayError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(GatewayError::Transport(format!("HTTP {status}: {text}")));
        }
        let parsed: ChatResponse = serde_json::from_str(&text).map_err(|e| GatewayError::Malformed(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| GatewayError::Malformed("no message content in response".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendKind {
    Live,
    Mock,
    Replay,
}

/// Gateway settings, normally read from `TRANSDOC_*` environment variables.
#[derive(Debug, Clone, PartialEq)]
pub struct GatewayConfig {
    pub backend: BackendKind,
    pub endpoint: String,
    pub model_name: String,
    pub api_key: Option<String>,
    /// Where new transcript entries are appended, and what replay reads.
    pub transcript: Option<PathBuf>,
    pub mock_script: Option<PathBuf>,
    pub timeout: Duration,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            backend: BackendKind::Mock,
            endpoint: "https://api.openai.com/v1".into(),
            model_name: "gpt-4o".into(),
            api_key: None,
            transcript: None,
            mock_script: None,
            timeout: Duration::from_secs(60),
        }
    }
}

impl GatewayConfig {
    pub fn from_env() -> Result<Self, GatewayError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, GatewayError> {
        let mut c = Self::default();
        if let Some(b) = get("TRANSDOC_BACKEND") {
            c.backend = match b.as_str() {
                "live" => BackendKind::Live,
                "mock" => BackendKind::Mock,
                "replay" => BackendKind::Replay,
                other => return Err(GatewayError::Config(format!("unknown backend `{other}`"))),
            };
        }
        if let Some(v) = get("TRANSDOC_ENDPOINT") {
            c.endpoint = v;
        }
        if let Some(v) = get("TRANSDOC_MODEL") {
            c.model_name = v;
        }
        c.api_key = get("TRANSDOC_API_KEY");
        c.transcript = get("TRANSDOC_TRANSCRIPT").map(PathBuf::from);
        c.mock_script = get("TRANSDOC_MOCK_SCRIPT").map(PathBuf::from);
        Ok(c)
    }

    pub fn build(&self) -> Result<Gateway, GatewayError> {
        match self.backend {
            BackendKind::Live => {
                let backend = LiveBackend::new(&self.endpoint, self.api_key.clone(), self.timeout)?;
                Ok(Gateway::new(backend, &self.model_name).recording_to(self.transcript.clone()))
            }
            BackendKind::Mock => {
                let backend = match &self.mock_script {
                    Some(p) => MockBackend::from_file(p)?,
                    None => MockBackend::default(),
                };
                Ok(Gateway::new(backend, &self.model_name))
            }
            BackendKind::Replay => {
                let path = self
                    .transcript
                    .as_deref()
                    .ok_or_else(|| GatewayError::Config("replay needs TRANSDOC_TRANSCRIPT".into()))?;
                Ok(Gateway::new(ReplayBackend::from_file(path, false)?, &self.model_name))
            }
        }
    }
}

/// A backend plus the session's append-only transcript.
pub struct Gateway {
    backend: Box<dyn ChatBackend>,
    model_name: String,
    transcript: Mutex<Vec<TranscriptEntry>>,
    sink: Option<PathBuf>,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway").field("model_name", &self.model_name).field("sink", &self.sink).finish()
    }
}

impl Gateway {
    pub fn new(backend: impl ChatBackend + 'static, model_name: &str) -> Self {
        Self { backend: Box::new(backend), model_name: model_name.to_string(), transcript: Mutex::default(), sink: None }
    }

    /// Also appends each entry as one JSON line to `path`.
    pub fn recording_to(mut self, path: Option<PathBuf>) -> Self {
        self.sink = path;
        self
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    pub fn request(&self, messages: Vec<ChatMessage>) -> CompletionRequest {
        CompletionRequest::new(messages, &self.model_name)
    }

    /// Returns the assistant text verbatim. Only successful calls are
    /// recorded.
    pub fn complete(&self, req: &CompletionRequest) -> Result<String, GatewayError> {
        req.validate()?;
        let response = self.backend.complete(req)?;
        let entry =
            TranscriptEntry { request: req.clone(), response: response.clone(), timestamp: chrono::Utc::now().to_rfc3339() };
        let mut transcript = self.transcript.lock().expect("transcript lock");
        if let Some(path) = &self.sink {
            let line = serde_json::to_string(&entry).map_err(|e| GatewayError::Config(e.to_string()))?;
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| GatewayError::Config(format!("transcript {}: {e}", path.display())))?;
            writeln!(f, "{line}").map_err(|e| GatewayError::Config(format!("transcript {}: {e}", path.display())))?;
        }
        transcript.push(entry);
        Ok(response)
    }

    pub fn transcript(&self) -> Vec<TranscriptEntry> {
        self.transcript.lock().expect("transcript lock").clone()
    }
}

/// Removes surrounding code fences (with an optional language tag) and
/// surrounding whitespace. Idempotent.
pub fn strip_fences(response: &str) -> String {
    let mut s = response.trim();
    while let Some(inner) = s.strip_prefix("```").and_then(|r| r.strip_suffix("```")) {
        if s.len() < 6 {
            break;
        }
        // The opening line may carry a language tag.
        let body = match inner.find('\n') {
            Some(nl) if !inner[..nl].trim().contains(char::is_whitespace) => &inner[nl + 1..],
            _ => inner,
        };
        s = body.trim();
    }
    s.to_string()
}
