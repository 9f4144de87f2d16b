//! The versioned format the viewer consumes, and a static page embedding it.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use transdoc_agents::{RevisionAction, SessionState};
use transdoc_core::doc::{render, Document, FragmentId, RenderError, RenderedDocument, Segment, TextSpan};
use transdoc_core::eval::{CellAddress, Dataset, EnvError};
use transdoc_core::expr::pretty;

use crate::project::{Project, RegisteredFragment};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum WireSegment {
    Literal { text: String },
    Fragment { id: FragmentId, text: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WireFragment {
    pub id: FragmentId,
    pub span: TextSpan,
    pub text: String,
    pub expr: String,
    pub cells: Vec<CellAddress>,
    pub linked_fragments: Vec<FragmentId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WireDocument {
    pub format_version: u32,
    /// Id of the head revision.
    pub revision: u64,
    pub session_state: String,
    pub text: String,
    pub segments: Vec<WireSegment>,
    pub fragments: Vec<WireFragment>,
    /// Sets of fragments whose provenance pairwise overlaps.
    pub groups: Vec<Vec<FragmentId>>,
    pub suggestions: Vec<RegisteredFragment>,
    pub datasets: IndexMap<String, Dataset>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProvenanceResponse {
    pub fragment_id: FragmentId,
    pub cells: Vec<CellAddress>,
    pub linked_fragments: Vec<FragmentId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RevisionSummary {
    pub id: u64,
    pub parent: Option<u64>,
    pub action: RevisionAction,
    pub timestamp: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionView {
    pub format_version: u32,
    pub state: SessionState,
    pub history: Vec<RevisionSummary>,
    /// Rendered text of the proposed document while awaiting validation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tentative_text: Option<String>,
}

/// Fragments sharing a group with `id`, excluding `id` itself.
pub fn linked(groups: &[Vec<FragmentId>], id: FragmentId) -> Vec<FragmentId> {
    let mut out: Vec<FragmentId> = groups.iter().filter(|g| g.contains(&id)).flatten().copied().filter(|f| *f != id).collect();
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderFailure {
    #[error(transparent)]
    Hole(#[from] RenderError),
    #[error(transparent)]
    Context(#[from] EnvError),
}

pub fn render_document(doc: &Document) -> Result<RenderedDocument, RenderFailure> {
    Ok(render(doc, &doc.env()?)?)
}

pub fn wire_document(project: &Project) -> Result<WireDocument, RenderFailure> {
    let doc = project.head();
    let rendered = render_document(doc)?;
    let mut segments = Vec::new();
    for seg in &doc.segments {
        segments.push(match seg {
            Segment::Literal { text } => WireSegment::Literal { text: text.clone() },
            Segment::Hole { id, .. } => {
                let text = rendered.fragment(*id).map(|f| f.text.clone()).unwrap_or_default();
                WireSegment::Fragment { id: *id, text }
            }
        });
    }
    let fragments = rendered
        .fragments
        .iter()
        .map(|f| WireFragment {
            id: f.id,
            span: f.span,
            text: f.text.clone(),
            expr: doc.hole(f.id).map(pretty).unwrap_or_default(),
            cells: f.provenance.clone().into_vec(),
            linked_fragments: linked(&rendered.groups, f.id),
        })
        .collect();
    Ok(WireDocument {
        format_version: FORMAT_VERSION,
        revision: project.session.history.last().map_or(0, |r| r.id),
        session_state: project.session.state.name().to_string(),
        text: rendered.text.clone(),
        segments,
        fragments,
        groups: rendered.groups.clone(),
        suggestions: project.file.fragments.clone(),
        datasets: project.sources.datasets.clone(),
    })
}

pub fn session_view(project: &Project) -> SessionView {
    let tentative_text = match &project.session.state {
        SessionState::AwaitingValidation { tentative, .. } => {
            Some(render_document(tentative).map(|r| r.text).unwrap_or_else(|_| tentative.text()))
        }
        _ => None,
    };
    SessionView {
        format_version: FORMAT_VERSION,
        state: project.session.state.clone(),
        history: project
            .session
            .history
            .iter()
            .map(|r| RevisionSummary {
                id: r.id,
                parent: r.parent,
                action: r.action,
                timestamp: r.timestamp.clone(),
                text: r.document.text(),
            })
            .collect(),
        tentative_text,
    }
}

fn escape_html(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const PAGE_SCRIPT: &str = r#"
const wire = JSON.parse(document.getElementById("transdoc-wire").textContent);
const byId = new Map(wire.fragments.map(f => [String(f.id), f]));
function clear() {
  document.querySelectorAll(".hl, .linked").forEach(n => n.classList.remove("hl", "linked"));
}
document.querySelectorAll("[data-fragment]").forEach(span => {
  span.addEventListener("mouseenter", () => {
    const f = byId.get(span.dataset.fragment);
    if (!f) return;
    f.cells.forEach(c => {
      const cell = document.querySelector(`[data-cell="${c.dataset}|${c.row}|${c.field}"]`);
      if (cell) cell.classList.add("hl");
    });
    f.linkedFragments.forEach(id => {
      const other = document.querySelector(`[data-fragment="${id}"]`);
      if (other) other.classList.add("linked");
    });
    span.classList.add("hl");
  });
  span.addEventListener("mouseleave", clear);
});
"#;

/// A self-contained page: the paragraph, its tables, the wire document
/// embedded as JSON and a small hover script.
pub fn page(wire: &WireDocument) -> String {
    let mut body = String::new();
    body.push_str("<p class=\"paragraph\">");
    for seg in &wire.segments {
        match seg {
            WireSegment::Literal { text } => body.push_str(&escape_html(text)),
            WireSegment::Fragment { id, text } => {
                body.push_str(&format!("<span class=\"fragment\" data-fragment=\"{id}\">{}</span>", escape_html(text)))
            }
        }
    }
    body.push_str("</p>\n");
    for (name, ds) in &wire.datasets {
        body.push_str(&format!("<table data-dataset=\"{}\">\n<caption>{}</caption>\n", escape_html(name), escape_html(name)));
        if let Some(first) = ds.rows.first() {
            body.push_str("<tr>");
            for k in first.keys() {
                body.push_str(&format!("<th>{}</th>", escape_html(k)));
            }
            body.push_str("</tr>\n");
        }
        for (i, row) in ds.rows.iter().enumerate() {
            body.push_str("<tr>");
            for (k, v) in row {
                let key = escape_html(&format!("{name}|{i}|{k}"));
                body.push_str(&format!("<td data-cell=\"{key}\">{}</td>", escape_html(&v.to_string())));
            }
            body.push_str("</tr>\n");
        }
        body.push_str("</table>\n");
    }
    let json = serde_json::to_string(wire).expect("wire serializes").replace("</", "<\\/");
    format!(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Transparent document</title>\n<style>\n\
         .fragment {{ border-bottom: 1px dotted #555; cursor: help; }}\n.hl {{ background: #ffe08a; }}\n\
         .linked {{ background: #cde4ff; }}\ntable {{ border-collapse: collapse; margin-top: 1em; }}\n\
         td, th {{ border: 1px solid #ccc; padding: 2px 6px; }}\n</style>\n</head>\n<body>\n{body}\
         <script type=\"application/json\" id=\"transdoc-wire\">{json}</script>\n<script>{PAGE_SCRIPT}</script>\n</body>\n</html>\n"
    )
}
