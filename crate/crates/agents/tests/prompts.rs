mod common;

use std::path::PathBuf;

use common::{fixture, sources, times};
use transdoc_agents::prompts::{INTERPRETATION_SYSTEM_PROMPT, SUGGESTION_SYSTEM_PROMPT};
use transdoc_agents::{build_interpretation_prompt, Role, Sharing, SynthesisTask, TaskError};
use transdoc_core::doc::{Document, TargetFragment, TextSpan};

/// The two verbatim blocks of the source manuscript, read straight from it.
fn verbatim_blocks() -> Vec<String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../paper.md");
    let text = std::fs::read_to_string(path).unwrap();
    let open = "\\begin{Verbatim}[fontsize=\\small]\n";
    let close = "\n\\end{Verbatim}";
    text.split(open).skip(1).map(|rest| rest[..rest.find(close).unwrap()].to_string()).collect()
}

#[test]
fn system_prompts_are_byte_identical_to_the_manuscript() {
    let blocks = verbatim_blocks();
    assert_eq!(blocks.len(), 2);
    assert_eq!(INTERPRETATION_SYSTEM_PROMPT.as_bytes(), blocks[0].as_bytes());
    assert_eq!(SUGGESTION_SYSTEM_PROMPT.as_bytes(), blocks[1].as_bytes());
    assert!(INTERPRETATION_SYSTEM_PROMPT.starts_with("You are a specialized language model"));
    assert!(SUGGESTION_SYSTEM_PROMPT.starts_with("You are an expression detector"));
}

const PARAGRAPH: &str = "LSTM takes 67 seconds per epoch.";

fn doc() -> Document {
    Document::new(PARAGRAPH, sources(times(), ""))
}

fn frag() -> TargetFragment {
    TargetFragment::at(PARAGRAPH, TextSpan::new(11, 13)).unwrap()
}

#[test]
fn interpretation_prompt_matches_golden_file() {
    let task = SynthesisTask::from_document(&doc(), &frag(), Sharing::default()).unwrap();
    task.validate().unwrap();
    let messages = build_interpretation_prompt(&task);
    assert_eq!(messages.len(), 2);
    assert_eq!(messages[0].role, Role::System);
    assert_eq!(messages[0].content, INTERPRETATION_SYSTEM_PROMPT);
    let golden = std::fs::read_to_string(fixture("interpretation_prompt.golden.json")).unwrap();
    assert_eq!(messages[1].content, golden.trim_end());
}

#[test]
fn prompt_fields_follow_the_described_vocabulary() {
    let task = SynthesisTask::from_document(&doc(), &frag(), Sharing::default()).unwrap();
    let json: serde_json::Value = serde_json::from_str(&build_interpretation_prompt(&task)[1].content).unwrap();
    let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["datasets", "imports", "code", "paragraph", "paragraphValue"]);
    assert_eq!(json["paragraph"], "LSTM takes [REPLACE value=\"67\"] seconds per epoch.");
    assert_eq!(json["paragraphValue"], PARAGRAPH);
}

#[test]
fn withheld_target_drops_the_value_attribute() {
    let sharing = Sharing { target: false, paragraph_value: true };
    let task = SynthesisTask::from_document(&doc(), &frag(), sharing).unwrap();
    task.validate().unwrap();
    assert_eq!(task.paragraph, "LSTM takes [REPLACE] seconds per epoch.");
    assert!(!build_interpretation_prompt(&task)[1].content.contains("value="));

    let bare = Sharing { target: false, paragraph_value: false };
    let task = SynthesisTask::from_document(&doc(), &frag(), bare).unwrap();
    let json: serde_json::Value = serde_json::from_str(&build_interpretation_prompt(&task)[1].content).unwrap();
    assert!(json.get("paragraphValue").is_none());
}

#[test]
fn task_invariants_are_checked() {
    let mut task = SynthesisTask::from_document(&doc(), &frag(), Sharing::default()).unwrap();
    task.paragraph = format!("{} {}", task.paragraph, task.paragraph);
    assert_eq!(task.validate(), Err(TaskError::TagCount(2)));
    task.paragraph = "no tag".into();
    assert_eq!(task.validate(), Err(TaskError::TagCount(0)));
    task.paragraph = "took [REPLACE value=\"68\"]".into();
    assert!(matches!(task.validate(), Err(TaskError::TargetMismatch { .. })));
    task.share_target = false;
    assert_eq!(task.validate(), Err(TaskError::UnexpectedValue));
    let bad = TargetFragment { span: TextSpan::new(0, 4), text: "GRU!".into() };
    assert!(matches!(SynthesisTask::from_document(&doc(), &bad, Sharing::default()), Err(TaskError::Fragment(_))));
}
