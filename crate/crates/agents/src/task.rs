use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use transdoc_core::doc::{parse_replace_tags, Document, DocError, TargetFragment};
use transdoc_core::eval::{Dataset, Sources};

use crate::gateway::ChatMessage;
use crate::prompts::INTERPRETATION_SYSTEM_PROMPT;

const TAG_OPEN: &str = "[REPLACE";

/// Everything the interpretation agent sees for one fragment, plus the
/// string the expression has to produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SynthesisTask {
    pub datasets: IndexMap<String, Dataset>,
    pub imports: Vec<String>,
    pub code: String,
    /// Paragraph with exactly one `[REPLACE ...]` tag.
    pub paragraph: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paragraph_value: Option<String>,
    /// The selected text `s` that a correct expression renders to.
    pub target: String,
    pub share_target: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TaskError {
    #[error("paragraph must contain exactly one [REPLACE] tag, found {0}")]
    TagCount(usize),
    #[error("tag value {found:?} differs from the target {expected:?}")]
    TargetMismatch { expected: String, found: String },
    #[error("tag must carry the target value when it is shared")]
    MissingValue,
    #[error("tag must not carry a value when the target is withheld")]
    UnexpectedValue,
    #[error(transparent)]
    Fragment(#[from] DocError),
}

/// Which parts of the ground truth reach the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sharing {
    pub target: bool,
    pub paragraph_value: bool,
}

impl Default for Sharing {
    fn default() -> Self {
        Self { target: true, paragraph_value: true }
    }
}

impl SynthesisTask {
    /// Builds the task for `frag` of the document's current text.
    pub fn from_document(doc: &Document, frag: &TargetFragment, sharing: Sharing) -> Result<Self, TaskError> {
        doc.check_fragment(frag)?;
        let sources: &Sources = &doc.sources;
        Ok(Self {
            datasets: sources.datasets.clone(),
            imports: sources.imports.clone(),
            code: sources.code.clone(),
            paragraph: doc.annotated_text(frag, sharing.target),
            paragraph_value: sharing.paragraph_value.then(|| doc.text()),
            target: frag.text.clone(),
            share_target: sharing.target,
        })
    }

    pub fn sources(&self) -> Sources {
        Sources { datasets: self.datasets.clone(), imports: self.imports.clone(), code: self.code.clone() }
    }

    pub fn validate(&self) -> Result<(), TaskError> {
        let count = self.paragraph.matches(TAG_OPEN).count();
        if count != 1 {
            return Err(TaskError::TagCount(count));
        }
        match parse_replace_tags(&self.paragraph) {
            Ok((_, tags)) if self.share_target => {
                let found = &tags[0].fragment.text;
                if *found != self.target {
                    return Err(TaskError::TargetMismatch { expected: self.target.clone(), found: found.clone() });
                }
            }
            Ok(_) => return Err(TaskError::UnexpectedValue),
            Err(_) if self.share_target => return Err(TaskError::MissingValue),
            Err(_) => {}
        }
        Ok(())
    }

    /// The object sent as the user message, with the field names the
    /// system prompt describes.
    pub fn prompt_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert("datasets".into(), serde_json::to_value(&self.datasets).expect("datasets serialize"));
        obj.insert("imports".into(), self.imports.clone().into());
        obj.insert("code".into(), self.code.clone().into());
        obj.insert("paragraph".into(), self.paragraph.clone().into());
        if let Some(v) = &self.paragraph_value {
            obj.insert("paragraphValue".into(), v.clone().into());
        }
        serde_json::Value::Object(obj)
    }
}

/// System prompt followed by the serialized task.
pub fn build_interpretation_prompt(task: &SynthesisTask) -> Vec<ChatMessage> {
    let user = serde_json::to_string_pretty(&task.prompt_json()).expect("task serializes");
    vec![ChatMessage::system(INTERPRETATION_SYSTEM_PROMPT), ChatMessage::user(user)]
}
