//! The authoring session: select a fragment, synthesize, then approve,
//! reject or adopt the string the expression actually produces.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use transdoc_core::doc::{expr_source, Document, DocError, FragmentId, TargetFragment, TextSpan};
use transdoc_core::eval::Sources;
use transdoc_core::expr::Expr;

use crate::synthesis::SynthesisOutcome;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "state")]
pub enum SessionState {
    AwaitingSelection,
    Synthesizing {
        fragment: TargetFragment,
    },
    AwaitingValidation {
        fragment: TargetFragment,
        #[serde(with = "expr_source")]
        expr: Expr,
        /// The head with the fragment replaced by a hole holding `expr`.
        tentative: Document,
        hole: FragmentId,
    },
    MismatchDecision {
        fragment: TargetFragment,
        #[serde(with = "expr_source")]
        expr: Expr,
        s_prime: String,
    },
}

impl SessionState {
    pub fn name(&self) -> &'static str {
        match self {
            SessionState::AwaitingSelection => "AwaitingSelection",
            SessionState::Synthesizing { .. } => "Synthesizing",
            SessionState::AwaitingValidation { .. } => "AwaitingValidation",
            SessionState::MismatchDecision { .. } => "MismatchDecision",
        }
    }
}

impl fmt::Display for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RevisionAction {
    Init,
    Approve,
    ReviseGoal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Revision {
    pub id: u64,
    pub parent: Option<u64>,
    pub action: RevisionAction,
    pub timestamp: String,
    pub document: Document,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Select(TargetFragment),
    Outcome(SynthesisOutcome),
    Approve,
    Reject,
    ReviseGoal,
    /// Abandons an in-flight synthesis, e.g. after a gateway failure.
    Cancel,
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self {
            Event::Select(_) => "select",
            Event::Outcome(_) => "outcome",
            Event::Approve => "approve",
            Event::Reject => "reject",
            Event::ReviseGoal => "revise-goal",
            Event::Cancel => "cancel",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorkflowError {
    #[error("{event} is not allowed in state {state}")]
    WrongState { event: &'static str, state: &'static str },
    #[error("invalid fragment: {0}")]
    InvalidFragment(#[from] DocError),
    #[error("mismatch outcome reproduces the selected text {0:?}")]
    DegenerateMismatch(String),
}

pub trait Clock: Send + Sync {
    fn now(&self) -> String;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> String {
        chrono::Utc::now().to_rfc3339()
    }
}

/// Always reports the same instant.
#[derive(Debug, Clone)]
pub struct FixedClock(pub String);

impl Clock for FixedClock {
    fn now(&self) -> String {
        self.0.clone()
    }
}

/// Current state plus the linear revision history; the last revision is
/// the head document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Session {
    pub state: SessionState,
    pub history: Vec<Revision>,
}

impl Session {
    pub fn new(document: Document, clock: &dyn Clock) -> Self {
        let init = Revision { id: 0, parent: None, action: RevisionAction::Init, timestamp: clock.now(), document };
        Self { state: SessionState::AwaitingSelection, history: vec![init] }
    }

    pub fn head(&self) -> &Document {
        &self.history.last().expect("history starts with init").document
    }

    /// Reattaches the program context after deserialization.
    pub fn attach_sources(&mut self, sources: Arc<Sources>) {
        for r in &mut self.history {
            r.document.sources = sources.clone();
        }
        if let SessionState::AwaitingValidation { tentative, .. } = &mut self.state {
            tentative.sources = sources;
        }
    }

    fn push_revision(&mut self, action: RevisionAction, document: Document, clock: &dyn Clock) {
        let parent = self.history.last().map(|r| r.id);
        let id = parent.map_or(0, |p| p + 1);
        self.history.push(Revision { id, parent, action, timestamp: clock.now(), document });
    }

    /// Applies one event. A rejected event leaves the session untouched.
    pub fn apply(&mut self, event: Event, clock: &dyn Clock) -> Result<(), WorkflowError> {
        let wrong = |state: &SessionState, event: &Event| WorkflowError::WrongState { event: event.name(), state: state.name() };
        let next = match (&self.state, &event) {
            (SessionState::AwaitingSelection, Event::Select(frag)) => {
                self.head().check_fragment(frag)?;
                SessionState::Synthesizing { fragment: frag.clone() }
            }
            (SessionState::Synthesizing { fragment }, Event::Outcome(outcome)) => match outcome {
                SynthesisOutcome::Success { expr, .. } => {
                    let (tentative, hole) = self.head().splice(fragment, expr.clone())?;
                    SessionState::AwaitingValidation { fragment: fragment.clone(), expr: expr.clone(), tentative, hole }
                }
                SynthesisOutcome::FailNoExpression { .. } => SessionState::AwaitingSelection,
                SynthesisOutcome::Mismatch { expr, s_prime, .. } => {
                    if *s_prime == fragment.text {
                        return Err(WorkflowError::DegenerateMismatch(s_prime.clone()));
                    }
                    SessionState::MismatchDecision { fragment: fragment.clone(), expr: expr.clone(), s_prime: s_prime.clone() }
                }
            },
            (SessionState::Synthesizing { .. }, Event::Cancel) => SessionState::AwaitingSelection,
            (SessionState::AwaitingValidation { tentative, .. }, Event::Approve) => {
                let doc = tentative.clone();
                self.push_revision(RevisionAction::Approve, doc, clock);
                SessionState::AwaitingSelection
            }
            (SessionState::AwaitingValidation { .. } | SessionState::MismatchDecision { .. }, Event::Reject) => {
                SessionState::AwaitingSelection
            }
            (SessionState::MismatchDecision { fragment, expr, s_prime }, Event::ReviseGoal) => {
                let revised = self.head().revise_paragraph(fragment, s_prime)?;
                let start = fragment.span.start;
                let new_frag = TargetFragment {
                    span: TextSpan::new(start, start + s_prime.chars().count()),
                    text: s_prime.clone(),
                };
                let (tentative, hole) = revised.splice(&new_frag, expr.clone())?;
                let expr = expr.clone();
                self.push_revision(RevisionAction::ReviseGoal, revised, clock);
                SessionState::AwaitingValidation { fragment: new_frag, expr, tentative, hole }
            }
            (state, event) => return Err(wrong(state, event)),
        };
        self.state = next;
        Ok(())
    }

    pub fn select(&mut self, frag: TargetFragment, clock: &dyn Clock) -> Result<(), WorkflowError> {
        self.apply(Event::Select(frag), clock)
    }

    pub fn on_outcome(&mut self, outcome: SynthesisOutcome, clock: &dyn Clock) -> Result<(), WorkflowError> {
        self.apply(Event::Outcome(outcome), clock)
    }

    pub fn approve(&mut self, clock: &dyn Clock) -> Result<(), WorkflowError> {
        self.apply(Event::Approve, clock)
    }

    pub fn reject(&mut self, clock: &dyn Clock) -> Result<(), WorkflowError> {
        self.apply(Event::Reject, clock)
    }

    pub fn revise_goal(&mut self, clock: &dyn Clock) -> Result<(), WorkflowError> {
        self.apply(Event::ReviseGoal, clock)
    }

    pub fn cancel(&mut self, clock: &dyn Clock) -> Result<(), WorkflowError> {
        self.apply(Event::Cancel, clock)
    }
}
