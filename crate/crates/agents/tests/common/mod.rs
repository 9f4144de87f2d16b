#![allow(dead_code)]

use std::path::PathBuf;

use serde_json::json;

use transdoc_agents::{FixedClock, Gateway, MockBackend};
use transdoc_core::eval::{dataset_from_json, Dataset, Sources, TABLE_DATA};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn times() -> Dataset {
    dataset_from_json(&json!([
        { "model": "LSTM", "time_s": 67, "acc": 82.71 },
        { "model": "BiLSTM", "time_s": 106, "acc": 82.85 },
        { "model": "CNN", "time_s": 48, "acc": 81.46 },
        { "model": "S-LSTM", "time_s": 65, "acc": 84.06 }
    ]))
    .unwrap()
}

pub fn ner() -> Dataset {
    let text = std::fs::read_to_string(fixture("ner.json")).unwrap();
    dataset_from_json(&serde_json::from_str(&text).unwrap()).unwrap()
}

/// Phrase helper for the stacking claim; the paragraph's wording is not
/// one of the shipped helpers.
pub const IMPROVES_CODE: &str = r#"let improves EQ = "does not further improve";
    improves LT = "does not further improve";
    improves GT = "further improves";"#;

pub fn sources(ds: Dataset, code: &str) -> Sources {
    let mut s = Sources::default();
    s.datasets.insert(TABLE_DATA.to_string(), ds);
    s.code = code.to_string();
    s
}

pub fn mock<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> (Gateway, std::sync::Arc<MockBackend>) {
    let backend = std::sync::Arc::new(MockBackend::texts(replies));
    (Gateway::new(backend.clone(), "mock"), backend)
}

pub fn clock() -> FixedClock {
    FixedClock("2025-01-01T00:00:00+00:00".into())
}
