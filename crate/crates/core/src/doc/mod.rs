//! Documents as interpolated strings: literal text interleaved with
//! expression holes whose rendered values are linked to data.

mod render;
mod tags;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eval::{EnvError, Sources};
use crate::expr::Expr;

pub use render::{compute_groups, render, RenderError, RenderedDocument, RenderedFragment};
pub use tags::{annotate, parse_replace_tags, replace_tag, ReplaceTag, TagError};

/// Character range in paragraph text, end exclusive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TextSpan {
    pub start: usize,
    pub end: usize,
}

impl TextSpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for TextSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// A selected piece of paragraph text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetFragment {
    pub span: TextSpan,
    pub text: String,
}

impl TargetFragment {
    /// The fragment of `text` covered by `span`, if in range.
    pub fn at(text: &str, span: TextSpan) -> Option<Self> {
        if span.start > span.end || span.end > text.chars().count() {
            return None;
        }
        Some(Self { span, text: char_slice(text, span).to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FragmentId(pub u64);

impl fmt::Display for FragmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Segment {
    Literal {
        text: String,
    },
    Hole {
        id: FragmentId,
        #[serde(with = "expr_source")]
        expr: Expr,
        /// Text the hole rendered to when it was inserted.
        text: String,
    },
}

impl Segment {
    pub fn text(&self) -> &str {
        match self {
            Segment::Literal { text } | Segment::Hole { text, .. } => text,
        }
    }
}

/// Serde adapter storing an expression as its pretty-printed source, so
/// persisted files stay readable.
pub mod expr_source {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::expr::{parse_expr, pretty, Expr};

    pub fn serialize<S: Serializer>(e: &Expr, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&pretty(e))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Expr, D::Error> {
        let src = String::deserialize(d)?;
        parse_expr(&src).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DocError {
    #[error("span {span} is outside the paragraph (length {len})")]
    OutOfRange { span: TextSpan, len: usize },
    #[error("span {span} overlaps computed fragment {hole}")]
    CrossesHole { span: TextSpan, hole: FragmentId },
    #[error("span {span} holds {found:?}, not {expected:?}")]
    TextMismatch { span: TextSpan, expected: String, found: String },
    #[error("span {0} does not lie within literal text")]
    NotInLiteral(TextSpan),
    #[error("no fragment with id {0}")]
    UnknownFragment(FragmentId),
}

/// A paragraph plus the program context its holes are evaluated in.
/// Every edit returns a new document. Serialization covers the paragraph
/// only; the sources are shared context reattached after loading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Document {
    pub segments: Vec<Segment>,
    pub next_hole_id: u64,
    #[serde(skip)]
    pub sources: Arc<Sources>,
}

impl Document {
    pub fn new(paragraph: &str, sources: Sources) -> Self {
        let segments = if paragraph.is_empty() {
            Vec::new()
        } else {
            vec![Segment::Literal { text: paragraph.to_string() }]
        };
        Self { segments, next_hole_id: 0, sources: Arc::new(sources) }
    }

    /// Current paragraph text, with holes shown as their last rendered text.
    pub fn text(&self) -> String {
        self.segments.iter().map(Segment::text).collect()
    }

    pub fn holes(&self) -> impl Iterator<Item = (FragmentId, &Expr)> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Hole { id, expr, .. } => Some((*id, expr)),
            Segment::Literal { .. } => None,
        })
    }

    pub fn hole(&self, id: FragmentId) -> Option<&Expr> {
        self.holes().find(|(h, _)| *h == id).map(|(_, e)| e)
    }

    /// Spans of all segments in order.
    pub fn segment_spans(&self) -> Vec<TextSpan> {
        let mut pos = 0;
        self.segments
            .iter()
            .map(|s| {
                let len = s.text().chars().count();
                let span = TextSpan::new(pos, pos + len);
                pos += len;
                span
            })
            .collect()
    }

    pub fn env(&self) -> Result<crate::eval::Env, EnvError> {
        self.sources.env()
    }

    pub fn with_sources(self, sources: Arc<Sources>) -> Self {
        Self { sources, ..self }
    }

    /// Checks that `frag` names literal text of this document.
    pub fn check_fragment(&self, frag: &TargetFragment) -> Result<(), DocError> {
        self.locate(frag).map(|_| ())
    }

    /// Index of the literal segment wholly containing `frag`, after checking
    /// that the fragment's text is what the document holds there.
    fn locate(&self, frag: &TargetFragment) -> Result<usize, DocError> {
        let span = frag.span;
        let spans = self.segment_spans();
        let len = spans.last().map_or(0, |s| s.end);
        if span.start > span.end || span.end > len {
            return Err(DocError::OutOfRange { span, len });
        }
        for (seg, s) in self.segments.iter().zip(&spans) {
            let overlaps = span.start < s.end && s.start < span.end;
            if let Segment::Hole { id, .. } = seg {
                if overlaps || (span.is_empty() && s.start < span.start && span.start < s.end) {
                    return Err(DocError::CrossesHole { span, hole: *id });
                }
            }
        }
        let found = spans.iter().zip(&self.segments).position(|(s, seg)| {
            matches!(seg, Segment::Literal { .. }) && s.start <= span.start && span.end <= s.end
        });
        let Some(i) = found else { return Err(DocError::NotInLiteral(span)) };
        let local = TextSpan::new(span.start - spans[i].start, span.end - spans[i].start);
        let found = char_slice(self.segments[i].text(), local);
        if found != frag.text {
            return Err(DocError::TextMismatch { span, expected: frag.text.clone(), found: found.to_string() });
        }
        Ok(i)
    }

    /// Replaces the fragment's text with a new hole holding `e`. The hole
    /// initially displays the fragment text.
    pub fn splice(&self, frag: &TargetFragment, e: Expr) -> Result<(Document, FragmentId), DocError> {
        let id = FragmentId(self.next_hole_id);
        let hole = Segment::Hole { id, expr: e, text: frag.text.clone() };
        let doc = self.replace_in_literal(frag, Some(hole), "")?;
        Ok((Document { next_hole_id: self.next_hole_id + 1, ..doc }, id))
    }

    /// Replaces the fragment's literal text with `s_prime`.
    pub fn revise_paragraph(&self, frag: &TargetFragment, s_prime: &str) -> Result<Document, DocError> {
        self.replace_in_literal(frag, None, s_prime)
    }

    fn replace_in_literal(&self, frag: &TargetFragment, hole: Option<Segment>, text: &str) -> Result<Document, DocError> {
        let i = self.locate(frag)?;
        let start = self.segment_spans()[i].start;
        let lit = self.segments[i].text();
        let n = lit.chars().count();
        let before = char_slice(lit, TextSpan::new(0, frag.span.start - start));
        let after = char_slice(lit, TextSpan::new(frag.span.end - start, n));

        let mut replacement = Vec::new();
        match hole {
            Some(h) => {
                push_literal(&mut replacement, before.to_string());
                replacement.push(h);
                push_literal(&mut replacement, after.to_string());
            }
            None => push_literal(&mut replacement, format!("{before}{text}{after}")),
        }
        let mut segments = self.segments[..i].to_vec();
        segments.extend(replacement);
        segments.extend_from_slice(&self.segments[i + 1..]);
        Ok(Document { segments, next_hole_id: self.next_hole_id, sources: self.sources.clone() })
    }

    /// Sets the displayed text of an existing hole.
    pub fn with_hole_text(&self, id: FragmentId, new_text: &str) -> Result<Document, DocError> {
        let mut doc = self.clone();
        let seg = doc
            .segments
            .iter_mut()
            .find(|s| matches!(s, Segment::Hole { id: h, .. } if *h == id))
            .ok_or(DocError::UnknownFragment(id))?;
        if let Segment::Hole { text, .. } = seg {
            *text = new_text.to_string();
        }
        Ok(doc)
    }

    /// The paragraph with the given fragment replaced by a `[REPLACE ...]` tag.
    pub fn annotated_text(&self, frag: &TargetFragment, share_target: bool) -> String {
        let text = self.text();
        let n = text.chars().count();
        let tag = if share_target { replace_tag(&frag.text, true) } else { "[REPLACE]".to_string() };
        format!(
            "{}{}{}",
            char_slice(&text, TextSpan::new(0, frag.span.start.min(n))),
            tag,
            char_slice(&text, TextSpan::new(frag.span.end.min(n), n))
        )
    }
}

fn push_literal(out: &mut Vec<Segment>, text: String) {
    if !text.is_empty() {
        out.push(Segment::Literal { text });
    }
}

/// Substring by character offsets; out-of-range ends are clamped.
pub fn char_slice(text: &str, span: TextSpan) -> &str {
    let byte = |c: usize| text.char_indices().nth(c).map_or(text.len(), |(b, _)| b);
    let (s, e) = (byte(span.start), byte(span.end));
    if s >= e {
        ""
    } else {
        &text[s..e]
    }
}

#[cfg(test)]
mod tests;
