use serde::Serialize;

use crate::eval::{coerce_to_string, evaluate, Env, EvalError, Provenance};

use super::{Document, FragmentId, Segment, TextSpan};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderedFragment {
    pub id: FragmentId,
    pub span: TextSpan,
    pub text: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderedDocument {
    pub text: String,
    pub fragments: Vec<RenderedFragment>,
    /// Sets of fragments that share data; see [`compute_groups`].
    pub groups: Vec<Vec<FragmentId>>,
}

impl RenderedDocument {
    pub fn fragment(&self, id: FragmentId) -> Option<&RenderedFragment> {
        self.fragments.iter().find(|f| f.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("fragment {hole}: {error}")]
pub struct RenderError {
    pub hole: FragmentId,
    pub error: EvalError,
}

/// Evaluates every hole and links the results to the cells they came from.
pub fn render(doc: &Document, env: &Env) -> Result<RenderedDocument, RenderError> {
    let mut text = String::new();
    let mut pos = 0;
    let mut fragments = Vec::new();
    for seg in &doc.segments {
        match seg {
            Segment::Literal { text: t } => {
                text.push_str(t);
                pos += t.chars().count();
            }
            Segment::Hole { id, expr, .. } => {
                let (t, provenance) = evaluate(expr, env)
                    .and_then(|v| coerce_to_string(&v).map_err(|e| EvalError { span: expr.span, ..e }))
                    .map_err(|error| RenderError { hole: *id, error })?;
                let len = t.chars().count();
                text.push_str(&t);
                fragments.push(RenderedFragment { id: *id, span: TextSpan::new(pos, pos + len), text: t, provenance });
                pos += len;
            }
        }
    }
    let groups = compute_groups(fragments.iter().map(|f| (f.id, &f.provenance)));
    Ok(RenderedDocument { text, fragments, groups })
}

/// Groups are the maximal sets of two or more fragments whose provenance
/// sets pairwise intersect. So two fragments appear together in some group
/// exactly when they share a cell. Groups are sorted, as are their members.
pub fn compute_groups<'a>(frags: impl IntoIterator<Item = (FragmentId, &'a Provenance)>) -> Vec<Vec<FragmentId>> {
    let mut frags: Vec<(FragmentId, &Provenance)> = frags.into_iter().collect();
    frags.sort_by_key(|(id, _)| *id);
    let n = frags.len();
    let adjacent: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i != j && frags[i].1.intersects(frags[j].1)).collect())
        .collect();

    let mut cliques = Vec::new();
    bron_kerbosch(&adjacent, Vec::new(), (0..n).collect(), Vec::new(), &mut cliques);
    let mut groups: Vec<Vec<FragmentId>> = cliques
        .into_iter()
        .filter(|c| c.len() >= 2)
        .map(|mut c| {
            c.sort_unstable();
            c.into_iter().map(|i| frags[i].0).collect()
        })
        .collect();
    groups.sort();
    groups
}

fn bron_kerbosch(adj: &[Vec<bool>], r: Vec<usize>, mut p: Vec<usize>, mut x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if p.is_empty() && x.is_empty() {
        out.push(r);
        return;
    }
    while let Some(v) = p.pop() {
        let mut r2 = r.clone();
        r2.push(v);
        let p2 = p.iter().copied().filter(|&u| adj[v][u]).collect();
        let x2 = x.iter().copied().filter(|&u| adj[v][u]).collect();
        bron_kerbosch(adj, r2, p2, x2, out);
        x.push(v);
    }
}
