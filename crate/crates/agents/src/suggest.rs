//! The suggestion agent: asks the model to tag computable fragments, then
//! maps the tags back onto the original paragraph.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use transdoc_core::doc::{annotate, char_slice, parse_replace_tags, replace_tag, ReplaceTag, TargetFragment, TextSpan};
use transdoc_core::eval::Dataset;

use crate::gateway::{strip_fences, ChatMessage, Gateway, GatewayError};
use crate::prompts::SUGGESTION_SYSTEM_PROMPT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuggestionResult {
    /// The original paragraph with a tag over each fragment.
    pub annotated_paragraph: String,
    pub fragments: Vec<TargetFragment>,
    /// Tags dropped while repairing the model output.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SuggestError {
    #[error("empty paragraph")]
    EmptyParagraph,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

/// The user message: the paragraph, then the data as JSON. A single table
/// is sent as its rows, several as an object keyed by name.
pub fn suggestion_user_message(paragraph: &str, datasets: &IndexMap<String, Dataset>) -> String {
    let data = if datasets.len() == 1 {
        serde_json::to_string_pretty(&datasets[0])
    } else {
        serde_json::to_string_pretty(datasets)
    }
    .expect("datasets serialize");
    format!("Paragraph:\n{paragraph}\n\nData:\n{data}")
}

pub fn build_suggestion_prompt(paragraph: &str, datasets: &IndexMap<String, Dataset>) -> Vec<ChatMessage> {
    vec![ChatMessage::system(SUGGESTION_SYSTEM_PROMPT), ChatMessage::user(suggestion_user_message(paragraph, datasets))]
}

pub fn suggest(
    gateway: &Gateway,
    paragraph: &str,
    datasets: &IndexMap<String, Dataset>,
) -> Result<SuggestionResult, SuggestError> {
    if paragraph.trim().is_empty() {
        return Err(SuggestError::EmptyParagraph);
    }
    let req = gateway.request(build_suggestion_prompt(paragraph, datasets));
    let response = gateway.complete(&req)?;
    Ok(align_suggestions(paragraph, &strip_fences(&response)))
}

/// Reads the tags out of model output and places their values, in order,
/// onto the original paragraph. The model may reword untagged text, so only
/// the values are trusted. Malformed tags and values that do not occur in
/// the paragraph are dropped with a warning.
pub fn align_suggestions(paragraph: &str, output: &str) -> SuggestionResult {
    let mut warnings = Vec::new();
    let values = lenient_tag_values(output, &mut warnings);
    let mut taken: Vec<(TextSpan, bool)> = Vec::new();
    let mut cursor = 0;
    for (value, quoted) in values {
        if value.is_empty() {
            warnings.push("dropped a tag with an empty value".to_string());
            continue;
        }
        let span = find_free(paragraph, &value, cursor, &taken).or_else(|| find_free(paragraph, &value, 0, &taken));
        match span {
            Some(span) => {
                cursor = span.end;
                taken.push((span, quoted));
            }
            None => warnings.push(format!("dropped tag {value:?}: value does not occur in the paragraph")),
        }
    }
    taken.sort_by_key(|(span, _)| span.start);
    let tags: Vec<ReplaceTag> = taken
        .into_iter()
        .map(|(span, quoted)| {
            let text = char_slice(paragraph, span).to_string();
            ReplaceTag { raw: replace_tag(&text, quoted), fragment: TargetFragment { span, text }, quoted }
        })
        .collect();
    SuggestionResult {
        annotated_paragraph: annotate(paragraph, &tags),
        fragments: tags.into_iter().map(|t| t.fragment).collect(),
        warnings,
    }
}

/// First occurrence of `value` at or after `from` that overlaps no taken span.
fn find_free(paragraph: &str, value: &str, from: usize, taken: &[(TextSpan, bool)]) -> Option<TextSpan> {
    let chars: Vec<char> = paragraph.chars().collect();
    let needle: Vec<char> = value.chars().collect();
    let len = needle.len();
    (from..=chars.len().saturating_sub(len)).find_map(|start| {
        let span = TextSpan::new(start, start + len);
        let free = taken.iter().all(|(t, _)| span.end <= t.start || t.end <= span.start);
        (chars.get(start..start + len) == Some(&needle[..]) && free).then_some(span)
    })
}

/// Tag values in order. A malformed tag is defused by dropping its opening
/// bracket and parsing again.
fn lenient_tag_values(output: &str, warnings: &mut Vec<String>) -> Vec<(String, bool)> {
    let mut text: Vec<char> = output.chars().collect();
    loop {
        let s: String = text.iter().collect();
        match parse_replace_tags(&s) {
            Ok((_, tags)) => {
                return tags.into_iter().map(|t| (t.fragment.text, t.quoted)).collect();
            }
            Err(e) => {
                warnings.push(format!("dropped {e}"));
                text.remove(e.offset);
            }
        }
    }
}
