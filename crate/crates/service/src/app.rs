//! Project-level operations shared by the command line and the HTTP service.
//! Each one maps to workflow transitions and persists after every one.

use serde::{Deserialize, Serialize};

use transdoc_agents::{
    suggest, synthesize, Clock, Gateway, GatewayError, Sharing, SuggestError, SynthesisConfig, SynthesisError,
    SynthesisOutcome, SynthesisTask, WorkflowError,
};
use transdoc_core::doc::{FragmentId, TargetFragment, TextSpan};

use crate::project::{Project, ProjectError, RegisteredFragment};
use crate::wire::{linked, render_document, ProvenanceResponse, RenderFailure};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Project(#[from] ProjectError),
    #[error("unknown fragment {0}")]
    UnknownFragment(u64),
    #[error("invalid selection: {0}")]
    InvalidSelection(String),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error("gateway: {0}")]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Synthesis(SynthesisError),
    #[error(transparent)]
    Render(#[from] RenderFailure),
    #[error("empty paragraph")]
    EmptyParagraph,
}

impl From<SynthesisError> for ServiceError {
    fn from(e: SynthesisError) -> Self {
        match e {
            SynthesisError::Gateway(g) => ServiceError::Gateway(g),
            other => ServiceError::Synthesis(other),
        }
    }
}

impl From<SuggestError> for ServiceError {
    fn from(e: SuggestError) -> Self {
        match e {
            SuggestError::EmptyParagraph => ServiceError::EmptyParagraph,
            SuggestError::Gateway(g) => ServiceError::Gateway(g),
        }
    }
}

impl ServiceError {
    /// HTTP status for this error.
    pub fn status(&self) -> u16 {
        match self {
            ServiceError::UnknownFragment(_) => 404,
            ServiceError::Workflow(WorkflowError::WrongState { .. }) => 409,
            ServiceError::InvalidSelection(_)
            | ServiceError::Workflow(WorkflowError::InvalidFragment(_))
            | ServiceError::EmptyParagraph
            | ServiceError::Synthesis(SynthesisError::NoRetries) => 422,
            ServiceError::Gateway(_) => 502,
            _ => 500,
        }
    }
}

/// What to interpret: a registered suggestion or a character span of the
/// current paragraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Selection {
    Fragment(u64),
    Span(TextSpan),
}

/// Resolves a selection against the current paragraph.
pub fn resolve(project: &Project, selection: Selection) -> Result<TargetFragment, ServiceError> {
    let text = project.head().text();
    match selection {
        Selection::Fragment(id) => {
            let reg = project.file.fragments.iter().find(|f| f.id == id).ok_or(ServiceError::UnknownFragment(id))?;
            let frag = reg.target();
            match TargetFragment::at(&text, frag.span) {
                Some(now) if now == frag => Ok(frag),
                _ => Err(ServiceError::InvalidSelection(format!(
                    "suggestion {id} ({:?} at {}) no longer matches the paragraph",
                    frag.text, frag.span
                ))),
            }
        }
        Selection::Span(span) => TargetFragment::at(&text, span)
            .filter(|f| !f.text.is_empty())
            .ok_or_else(|| ServiceError::InvalidSelection(format!("span {span} is empty or outside the paragraph"))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuggestResponse {
    pub annotated_paragraph: String,
    pub fragments: Vec<RegisteredFragment>,
    pub warnings: Vec<String>,
}

/// Runs the suggestion agent over the current paragraph and replaces the
/// fragment registry with its findings.
pub fn run_suggest(project: &mut Project, gateway: &Gateway) -> Result<SuggestResponse, ServiceError> {
    let head = project.head().clone();
    let text = head.text();
    let result = suggest(gateway, &text, &project.sources.datasets)?;
    let mut warnings = result.warnings;
    let mut fragments = Vec::new();
    for frag in result.fragments {
        match head.check_fragment(&frag) {
            Ok(()) => fragments.push(RegisteredFragment { id: fragments.len() as u64, span: frag.span, text: frag.text }),
            Err(e) => warnings.push(format!("dropped {:?}: {e}", frag.text)),
        }
    }
    project.file.fragments = fragments.clone();
    project.save()?;
    Ok(SuggestResponse { annotated_paragraph: result.annotated_paragraph, fragments, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InterpretOptions {
    #[serde(default = "yes")]
    pub share_target: bool,
    #[serde(default = "yes")]
    pub share_paragraph_value: bool,
    #[serde(default)]
    pub max_retries: Option<u32>,
}

fn yes() -> bool {
    true
}

impl Default for InterpretOptions {
    fn default() -> Self {
        Self { share_target: true, share_paragraph_value: true, max_retries: None }
    }
}

/// Selects a fragment, synthesizes an expression for it and feeds the
/// outcome to the session. `persisted` sees the project after each save.
pub fn interpret(
    project: &mut Project,
    gateway: &Gateway,
    clock: &dyn Clock,
    selection: Selection,
    options: InterpretOptions,
    mut persisted: impl FnMut(&Project),
) -> Result<SynthesisOutcome, ServiceError> {
    let frag = resolve(project, selection)?;
    let sharing = Sharing { target: options.share_target, paragraph_value: options.share_paragraph_value };
    let mut task = SynthesisTask::from_document(project.head(), &frag, sharing)
        .map_err(|e| ServiceError::InvalidSelection(e.to_string()))?;
    if sharing.paragraph_value && project.file.paragraph_value.is_some() {
        task.paragraph_value = project.file.paragraph_value.clone();
    }
    project.session.select(frag, clock)?;
    project.save()?;
    persisted(project);

    let mut config = SynthesisConfig::default();
    if let Some(n) = options.max_retries {
        config.max_retries = n;
    }
    let outcome = match synthesize(gateway, &task, config) {
        Ok(outcome) => outcome,
        Err(e) => {
            // Nothing came back to decide on, so leave the session where
            // the author can try again.
            project.session.cancel(clock)?;
            project.save()?;
            persisted(project);
            return Err(e.into());
        }
    };
    project.session.on_outcome(outcome.clone(), clock)?;
    project.save()?;
    persisted(project);
    Ok(outcome)
}

/// A parameterless authoring decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Approve,
    Reject,
    ReviseGoal,
    Cancel,
}

pub fn decide(project: &mut Project, clock: &dyn Clock, decision: Decision) -> Result<(), ServiceError> {
    let session = &mut project.session;
    match decision {
        Decision::Approve => session.approve(clock)?,
        Decision::Reject => session.reject(clock)?,
        Decision::ReviseGoal => session.revise_goal(clock)?,
        Decision::Cancel => session.cancel(clock)?,
    }
    project.save()?;
    Ok(())
}

/// Cells behind one fragment of the head revision, and the fragments that
/// share data with it.
pub fn provenance(project: &Project, id: u64) -> Result<ProvenanceResponse, ServiceError> {
    let fid = FragmentId(id);
    project.head().hole(fid).ok_or(ServiceError::UnknownFragment(id))?;
    let rendered = render_document(project.head())?;
    let frag = rendered.fragment(fid).ok_or(ServiceError::UnknownFragment(id))?;
    Ok(ProvenanceResponse {
        fragment_id: fid,
        cells: frag.provenance.clone().into_vec(),
        linked_fragments: linked(&rendered.groups, fid),
    })
}
