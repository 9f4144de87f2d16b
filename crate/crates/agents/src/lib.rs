//! Language-model agents that annotate and interpret paragraphs, and the
//! human-in-the-loop session that applies their results to a document.

pub mod gateway;
pub mod prompts;
pub mod suggest;
pub mod synthesis;
pub mod task;
pub mod workflow;

pub use gateway::{
    strip_fences, ChatBackend, ChatMessage, CompletionRequest, Gateway, GatewayConfig, GatewayError, MockBackend,
    MockReply, ReplayBackend, Role, TranscriptEntry,
};
pub use suggest::{suggest, SuggestError, SuggestionResult};
pub use synthesis::{revalidate, synthesize, SynthesisConfig, SynthesisError, SynthesisOutcome};
pub use task::{build_interpretation_prompt, Sharing, SynthesisTask, TaskError};
pub use workflow::{Clock, Event, FixedClock, Revision, RevisionAction, Session, SessionState, SystemClock, WorkflowError};
