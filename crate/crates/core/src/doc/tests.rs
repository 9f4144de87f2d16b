use serde_json::json;

use super::*;
use crate::eval::{dataset_from_json, Sources, TABLE_DATA};
use crate::expr::parse_expr;

fn sources() -> Sources {
    let mut s = Sources::default();
    s.datasets.insert(
        TABLE_DATA.to_string(),
        dataset_from_json(&json!([
            { "model": "LSTM", "time_s": 67 },
            { "model": "BiLSTM", "time_s": 106 }
        ]))
        .unwrap(),
    );
    s
}

fn frag(doc: &Document, needle: &str) -> TargetFragment {
    let text = doc.text();
    let byte = text.find(needle).unwrap();
    let start = text[..byte].chars().count();
    TargetFragment::at(&text, TextSpan::new(start, start + needle.chars().count())).unwrap()
}

fn e(src: &str) -> Expr {
    parse_expr(src).unwrap()
}

#[test]
fn splice_splits_literal() {
    let doc = Document::new("time growing from 67 s", sources());
    let (doc, id) = doc.splice(&frag(&doc, "67"), e(r#"(model_ "LSTM" tableData).time_s"#)).unwrap();
    assert_eq!(id, FragmentId(0));
    assert_eq!(doc.next_hole_id, 1);
    assert_eq!(doc.segments.len(), 3);
    assert_eq!(doc.segments[0], Segment::Literal { text: "time growing from ".into() });
    assert!(matches!(&doc.segments[1], Segment::Hole { id: FragmentId(0), text, .. } if text == "67"));
    assert_eq!(doc.segments[2], Segment::Literal { text: " s".into() });
}

#[test]
fn splice_whole_segment() {
    let doc = Document::new("67", sources());
    let (doc, _) = doc.splice(&frag(&doc, "67"), e("67")).unwrap();
    assert_eq!(doc.segments.len(), 1);
    assert!(matches!(doc.segments[0], Segment::Hole { .. }));
}

#[test]
fn splice_over_hole_fails() {
    let doc = Document::new("from 67 to 106 s", sources());
    let (doc, id) = doc.splice(&frag(&doc, "67"), e("67")).unwrap();
    let err = doc.splice(&frag(&doc, "67 to"), e("1")).unwrap_err();
    assert_eq!(err, DocError::CrossesHole { span: TextSpan::new(5, 10), hole: id });
    let err = doc.splice(&frag(&doc, "6"), e("1")).unwrap_err();
    assert!(matches!(err, DocError::CrossesHole { .. }));
}

#[test]
fn splice_checks_text_and_range() {
    let doc = Document::new("abc", sources());
    let bad = TargetFragment { span: TextSpan::new(0, 2), text: "xy".into() };
    assert!(matches!(doc.splice(&bad, e("1")), Err(DocError::TextMismatch { .. })));
    let bad = TargetFragment { span: TextSpan::new(2, 9), text: "c".into() };
    assert!(matches!(doc.splice(&bad, e("1")), Err(DocError::OutOfRange { .. })));
}

#[test]
fn render_links_fragments_to_cells() {
    let doc = Document::new("time growing from 67 s", sources());
    let src = r#"trendWord (model_ "BiLSTM" tableData).time_s (model_ "LSTM" tableData).time_s growShrink"#;
    let (doc, id) = doc.splice(&frag(&doc, "growing"), e(src)).unwrap();
    let r = render(&doc, &doc.env().unwrap()).unwrap();
    assert_eq!(r.text, "time growing from 67 s");
    let f = r.fragment(id).unwrap();
    assert_eq!(f.text, "growing");
    assert_eq!(f.span, TextSpan::new(5, 12));
    let cells: Vec<String> = f.provenance.iter().map(|a| a.to_string()).collect();
    assert_eq!(cells, vec!["tableData[0].time_s", "tableData[1].time_s"]);
    assert!(r.groups.is_empty());
}

#[test]
fn shared_cells_group_fragments() {
    let doc = Document::new("a 67 b 67 c 106", sources());
    let lstm = r#"(model_ "LSTM").time_s"#;
    let (doc, a) = doc.splice(&TargetFragment { span: TextSpan::new(2, 4), text: "67".into() }, e(lstm)).unwrap();
    let (doc, b) = doc.splice(&TargetFragment { span: TextSpan::new(7, 9), text: "67".into() }, e(lstm)).unwrap();
    let (doc, _c) = doc.splice(&frag(&doc, "106"), e(r#"(model_ "BiLSTM").time_s"#)).unwrap();
    let r = render(&doc, &doc.env().unwrap()).unwrap();
    assert_eq!(r.groups, vec![vec![a, b]]);
}

#[test]
fn literal_only_document() {
    let doc = Document::new("plain", sources());
    let r = render(&doc, &doc.env().unwrap()).unwrap();
    assert_eq!(r.text, "plain");
    assert!(r.fragments.is_empty() && r.groups.is_empty());
}

#[test]
fn render_error_names_hole() {
    let doc = Document::new("x 1", sources());
    let (doc, id) = doc.splice(&frag(&doc, "1"), e("1 / 0")).unwrap();
    let err = render(&doc, &doc.env().unwrap()).unwrap_err();
    assert_eq!(err.hole, id);
    assert_eq!(err.error.kind, crate::eval::EvalErrorKind::DivisionByZero);
}

#[test]
fn revise_paragraph_replaces_literal_text() {
    let doc = Document::new("the model does not further improve here", sources());
    let revised = doc.revise_paragraph(&frag(&doc, "does not further improve"), "further improves").unwrap();
    assert_eq!(revised.text(), "the model further improves here");
    let same = doc.revise_paragraph(&frag(&doc, "model"), "model").unwrap();
    assert_eq!(same, doc);
}

#[test]
fn revise_shifts_later_holes() {
    let doc = Document::new("aa bb 67", sources());
    let (doc, id) = doc.splice(&frag(&doc, "67"), e(r#"(model_ "LSTM").time_s"#)).unwrap();
    let doc = doc.revise_paragraph(&frag(&doc, "aa"), "a much longer text").unwrap();
    let r = render(&doc, &doc.env().unwrap()).unwrap();
    let f = r.fragment(id).unwrap();
    assert_eq!(char_slice(&r.text, f.span), "67");
    assert!(doc.revise_paragraph(&frag(&doc, "67"), "x").is_err());
}

#[test]
fn segments_serialize_hole_source() {
    let doc = Document::new("from 67 s", sources());
    let (doc, _) = doc.splice(&frag(&doc, "67"), e(r#"(model_ "LSTM").time_s"#)).unwrap();
    let json = serde_json::to_value(&doc.segments).unwrap();
    assert_eq!(json[1]["kind"], "hole");
    assert_eq!(json[1]["expr"], r#"(model_ "LSTM").time_s"#);
    let back: Vec<Segment> = serde_json::from_value(json).unwrap();
    assert_eq!(back, doc.segments);
}

#[test]
fn annotated_text_inserts_tag() {
    let doc = Document::new("gives 91.57 here", sources());
    let f = frag(&doc, "91.57");
    assert_eq!(doc.annotated_text(&f, true), "gives [REPLACE value=\"91.57\"] here");
    assert_eq!(doc.annotated_text(&f, false), "gives [REPLACE] here");
}

#[test]
fn groups_are_maximal_cliques() {
    use crate::eval::{CellAddress, Provenance};
    let c = |f: &str| CellAddress::new("t", 0, f);
    let p1: Provenance = [c("a"), c("b")].into_iter().collect();
    let p2: Provenance = [c("b"), c("c")].into_iter().collect();
    let p3: Provenance = [c("c")].into_iter().collect();
    let p4: Provenance = [c("z")].into_iter().collect();
    let groups = compute_groups([(FragmentId(1), &p1), (FragmentId(2), &p2), (FragmentId(3), &p3), (FragmentId(4), &p4)]);
    assert_eq!(groups, vec![vec![FragmentId(1), FragmentId(2)], vec![FragmentId(2), FragmentId(3)]]);
}
