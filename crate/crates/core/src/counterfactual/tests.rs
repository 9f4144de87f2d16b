use indexmap::IndexMap;
use serde_json::json;

use super::*;
use crate::eval::{dataset_from_json, Cell, Dataset, TABLE_DATA};

fn times() -> Dataset {
    dataset_from_json(&json!([
        { "model": "LSTM", "time_s": 67 },
        { "model": "BiLSTM", "time_s": 106 },
        { "model": "LSTM2", "time_s": 67 }
    ]))
    .unwrap()
}

fn ner() -> Dataset {
    dataset_from_json(&json!([
        { "model": "BiLSTM", "f1": 90.96 },
        { "model": "2 stacked BiLSTM", "f1": 91.02 },
        { "model": "3 stacked BiLSTM", "f1": 91.06 },
        { "model": "S-LSTM", "f1": 91.57 },
        { "model": "yang2017transfer", "f1": 91.26 }
    ]))
    .unwrap()
}

fn context(ds: Dataset) -> Sources {
    let mut s = Sources::default();
    s.datasets.insert(TABLE_DATA.to_string(), ds);
    s
}

fn case(v: serde_json::Value) -> CounterfactualCase {
    serde_json::from_value(v).unwrap()
}

fn e(src: &str) -> Expr {
    parse_expr(src).unwrap()
}

const GOLD: &str = r#"(findWithKey_ "model" "LSTM" tableData).time_s"#;
const WRONG: &str = r#"(findWithKey_ "model" "LSTM2" tableData).time_s"#;

fn set_lstm_time() -> serde_json::Value {
    json!({ "op": "set", "where": { "model": "LSTM" }, "field": "time_s", "value": 250 })
}

#[test]
fn set_mutation_substitutes_value() {
    let mut map = IndexMap::new();
    map.insert(TABLE_DATA.to_string(), times());
    let m: Mutation = serde_json::from_value(set_lstm_time()).unwrap();
    let out = apply_mutations(&map, &[m]).unwrap();
    assert_eq!(out[TABLE_DATA].rows[0]["time_s"], Cell::num(250.0));
    assert_eq!(out[TABLE_DATA].rows[1]["time_s"], Cell::num(106.0));
    assert_eq!(map[TABLE_DATA].rows[0]["time_s"], Cell::num(67.0), "input untouched");
}

#[test]
fn delete_mutation_removes_rows() {
    let mut map = IndexMap::new();
    map.insert(TABLE_DATA.to_string(), ner());
    let m: Mutation = serde_json::from_value(json!({ "op": "delete", "where": { "model": "S-LSTM" } })).unwrap();
    assert_eq!(apply_mutations(&map, &[m]).unwrap()[TABLE_DATA].rows.len(), 4);
}

#[test]
fn mutation_errors() {
    let mut map = IndexMap::new();
    map.insert(TABLE_DATA.to_string(), times());
    let unmatched: Mutation = serde_json::from_value(json!({ "op": "delete", "where": { "model": "GRU" } })).unwrap();
    assert!(matches!(apply_mutations(&map, &[unmatched]), Err(MutationError::Unmatched { .. })));
    let bad_field: Mutation =
        serde_json::from_value(json!({ "op": "set", "where": { "model": "LSTM" }, "field": "nope", "value": 1 }))
            .unwrap();
    assert!(matches!(apply_mutations(&map, &[bad_field]), Err(MutationError::UnknownField { .. })));
    let ragged: Mutation = serde_json::from_value(json!({ "op": "insert", "row": { "model": "X" } })).unwrap();
    assert!(matches!(apply_mutations(&map, &[ragged]), Err(MutationError::Dataset { .. })));
    let other: Mutation =
        serde_json::from_value(json!({ "op": "delete", "dataset": "other", "where": { "model": "LSTM" } })).unwrap();
    assert!(matches!(apply_mutations(&map, &[other]), Err(MutationError::UnknownDataset(_))));
}

#[test]
fn stale_lookup_is_a_counterfactual_error() {
    let c = case(json!({
        "id": "lstm-time", "category": "Data retrieval", "gold": GOLD, "candidate": WRONG,
        "mutations": [set_lstm_time()], "expectation": "matchGold"
    }));
    let v = run_case(&e(GOLD), &e(WRONG), &c, &context(times()));
    assert_eq!(v.verdict, Verdict::CounterfactualError);
    assert_eq!(v.gold_output, Output::Text("250".into()));
    assert_eq!(v.candidate_output, Output::Text("67".into()));
}

#[test]
fn missing_row_is_a_counterfactual_error() {
    let c = case(json!({
        "id": "x", "category": "Data retrieval", "gold": GOLD, "candidate": WRONG,
        "mutations": [{ "op": "delete", "where": { "model": "LSTM2" } }], "expectation": "matchGold"
    }));
    let v = run_case(&e(GOLD), &e(WRONG), &c, &context(times()));
    assert_eq!(v.verdict, Verdict::CounterfactualError);
    assert!(matches!(v.candidate_output, Output::Error(ref m) if m.contains("key not found")));
}

#[test]
fn identical_candidate_passes() {
    let c = case(json!({
        "id": "x", "category": "Data retrieval", "gold": GOLD, "candidate": GOLD,
        "mutations": [set_lstm_time()], "expectation": "matchGold"
    }));
    assert_eq!(run_case(&e(GOLD), &e(GOLD), &c, &context(times())).verdict, Verdict::Pass);
}

#[test]
fn both_error_when_looked_up_row_is_deleted() {
    let c = case(json!({
        "id": "x", "category": "Data retrieval", "gold": GOLD, "candidate": WRONG,
        "mutations": [{ "op": "delete", "where": { "time_s": 67 } }], "expectation": { "expectString": "67" }
    }));
    let v = run_case(&e(GOLD), &e(WRONG), &c, &context(times()));
    assert_eq!(v.verdict, Verdict::BothError);
    assert!(v.gold_output.text().is_none() && v.candidate_output.text().is_none());
}

#[test]
fn complexity_counts_kinds() {
    assert_eq!(complexity(&e(r#"(model_ "LSTM").time_s"#)), 1);
    let ratio = r#"(getByCategory "Energy Sector" year).emissions / sum (map (fun x -> x.emissions) (getByYear year)) * 100"#;
    assert_eq!(
        query_kinds(&e(ratio)).into_iter().collect::<Vec<_>>(),
        vec![QueryKind::Retrieval, QueryKind::Aggregation, QueryKind::Arithmetic]
    );
    assert_eq!(complexity(&e(r#"rankLabel "lowest" (findIndex "model" "CNN" (sort cmpTime tableData))"#)), 2);
    assert_eq!(complexity(&e("1")), 0);
}

fn suite(cases: serde_json::Value) -> Suite {
    Suite { name: "t".into(), context: context(times()), cases: serde_json::from_value(cases).unwrap() }
}

#[test]
fn suite_totals() {
    let s = suite(json!([
        { "id": "a", "category": "Data retrieval", "gold": GOLD, "candidate": GOLD,
          "mutations": [set_lstm_time()], "expectation": "matchGold" },
        { "id": "b", "category": "Data retrieval", "gold": GOLD, "candidate": WRONG,
          "mutations": [set_lstm_time()], "expectation": "matchGold" },
        { "id": "c", "category": "Comparison", "complexity": 3,
          "gold": r#"trendWord (model_ "BiLSTM").time_s (model_ "LSTM").time_s growShrink"#,
          "candidate": r#""growing""#,
          "mutations": [{ "op": "set", "where": { "model": "BiLSTM" }, "field": "time_s", "value": 67 }],
          "expectation": { "expectString": "unchanging" } }
    ]));
    let r = run_suite(&s).unwrap();
    assert_eq!(r.totals.executions, 3);
    assert_eq!(r.totals.cases_with_error, 2);
    assert_eq!(r.totals.counterfactual_errors, 2);
    assert_eq!(r.totals.errors_per_case_mean, 1.0);
    // "b" and "c" both produce the gold text on the unmodified table.
    assert_eq!(r.totals.succeeded_despite_error, 2);
    assert_eq!(r.totals.passed, 1);
    let dr = r.by_category.iter().find(|row| row.key == "Data retrieval").unwrap();
    assert_eq!((dr.executions, dr.successes, dr.robust), (2, 2, 1));
    assert!(r.definitions.contains_key("succeededDespiteError"));
}

#[test]
fn task_groups_form_one_execution() {
    let s = suite(json!([
        { "id": "a1", "task": "t1", "category": "Data retrieval", "gold": GOLD, "candidate": WRONG,
          "mutations": [set_lstm_time()], "expectation": "matchGold" },
        { "id": "a2", "task": "t1", "category": "Data retrieval", "gold": GOLD, "candidate": WRONG,
          "mutations": [{ "op": "delete", "where": { "model": "LSTM2" } }], "expectation": "matchGold" },
        { "id": "a3", "task": "t1", "category": "Data retrieval", "gold": GOLD, "candidate": WRONG,
          "mutations": [{ "op": "set", "where": { "model": "BiLSTM" }, "field": "time_s", "value": 1 }],
          "expectation": "matchGold" }
    ]));
    let r = run_suite(&s).unwrap();
    assert_eq!(r.totals.executions, 1);
    assert_eq!(r.totals.cases_with_error, 1);
    assert_eq!(r.totals.errors_per_case_mean, 2.0);
}

#[test]
fn suite_validation() {
    let bad_expect = suite(json!([
        { "id": "a", "category": "Data retrieval", "gold": GOLD, "candidate": GOLD,
          "mutations": [set_lstm_time()], "expectation": { "expectString": "67" } }
    ]));
    assert!(matches!(run_suite(&bad_expect), Err(SuiteError::Invalid { .. })));
    let no_mut = suite(json!([
        { "id": "a", "category": "Data retrieval", "gold": GOLD, "candidate": GOLD, "mutations": [], "expectation": "matchGold" }
    ]));
    assert!(run_suite(&no_mut).is_err());
    let wrong_complexity = suite(json!([
        { "id": "a", "category": "Data retrieval", "complexity": 2, "gold": GOLD, "candidate": GOLD,
          "mutations": [set_lstm_time()], "expectation": "matchGold" }
    ]));
    assert!(run_suite(&wrong_complexity).unwrap_err().to_string().contains("complexity"));
    let dup = suite(json!([
        { "id": "a", "category": "Sum", "gold": GOLD, "candidate": GOLD, "mutations": [set_lstm_time()], "expectation": "matchGold" },
        { "id": "a", "category": "Sum", "gold": GOLD, "candidate": GOLD, "mutations": [set_lstm_time()], "expectation": "matchGold" }
    ]));
    assert!(matches!(run_suite(&dup), Err(SuiteError::DuplicateId(_))));
    assert!(serde_json::from_value::<CounterfactualCase>(json!({
        "id": "a", "category": "Vibes", "gold": GOLD, "mutations": [], "expectation": "matchGold"
    }))
    .is_err());
}

#[test]
fn report_is_deterministic() {
    let s = suite(json!([
        { "id": "b", "category": "Data retrieval", "gold": GOLD, "candidate": WRONG,
          "mutations": [set_lstm_time()], "expectation": "matchGold" }
    ]));
    assert_eq!(run_suite(&s).unwrap(), run_suite(&s).unwrap());
}
