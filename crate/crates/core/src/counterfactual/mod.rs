//! Counterfactual testing: re-run gold and candidate expressions over
//! hand-written table mutations and compare what they produce.

mod complexity;
mod mutation;
mod report;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::eval::{coerce_to_string, evaluate, Sources};
use crate::expr::{parse_expr, Expr};

pub use complexity::{complexity, query_kinds, QueryKind};
pub use mutation::{apply_mutations, Mutation, MutationError, RowSelector};
pub use report::{run_suite, RateRow, SuiteError, SuiteReport, Totals, DEFINITIONS};

/// The linguistic categories cases are filed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "Data retrieval")]
    DataRetrieval,
    Ratio,
    Average,
    #[serde(rename = "Min/Max")]
    MinMax,
    Rank,
    Sum,
    Comparison,
    #[serde(rename = "Generalised quantifiers")]
    GeneralisedQuantifiers,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::DataRetrieval,
        Category::Ratio,
        Category::Average,
        Category::MinMax,
        Category::Rank,
        Category::Sum,
        Category::Comparison,
        Category::GeneralisedQuantifiers,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::DataRetrieval => "Data retrieval",
            Category::Ratio => "Ratio",
            Category::Average => "Average",
            Category::MinMax => "Min/Max",
            Category::Rank => "Rank",
            Category::Sum => "Sum",
            Category::Comparison => "Comparison",
            Category::GeneralisedQuantifiers => "Generalised quantifiers",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Expectation {
    /// Candidate must produce whatever gold produces on the mutated table.
    MatchGold,
    ExpectString(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CounterfactualCase {
    pub id: String,
    pub category: Category,
    /// Declared complexity; must agree with the computed one when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complexity: Option<usize>,
    /// Cases sharing a task form one test execution. Defaults to the case id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    pub gold: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<String>,
    /// Take the candidate from this hole of an accompanying document.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hole: Option<u64>,
    pub mutations: Vec<Mutation>,
    pub expectation: Expectation,
}

impl CounterfactualCase {
    pub fn task(&self) -> &str {
        self.task.as_deref().unwrap_or(&self.id)
    }
}

/// A suite of cases over one program context.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Suite {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub context: Sources,
    pub cases: Vec<CounterfactualCase>,
}

/// What an expression produced: its text, or the error it raised.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Output {
    Text(String),
    Error(String),
}

impl Output {
    pub fn text(&self) -> Option<&str> {
        match self {
            Output::Text(t) => Some(t),
            Output::Error(_) => None,
        }
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Output::Text(t) => write!(f, "{t:?}"),
            Output::Error(e) => write!(f, "error: {e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Verdict {
    Pass,
    CounterfactualError,
    BothError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CaseVerdict {
    pub id: String,
    pub task: String,
    pub category: Category,
    pub complexity: usize,
    pub gold_output: Output,
    pub candidate_output: Output,
    pub verdict: Verdict,
}

/// Evaluates `e` in the context and coerces the result to text.
pub fn run_expr(e: &Expr, sources: &Sources) -> Output {
    let env = match sources.env() {
        Ok(env) => env,
        Err(err) => return Output::Error(err.to_string()),
    };
    match evaluate(e, &env).and_then(|v| coerce_to_string(&v)) {
        Ok((text, _)) => Output::Text(text),
        Err(err) => Output::Error(err.to_string()),
    }
}

/// Runs one case over the mutated context. Evaluation failures become part
/// of the verdict.
pub fn run_case(gold: &Expr, candidate: &Expr, case: &CounterfactualCase, base: &Sources) -> CaseVerdict {
    let (gold_output, candidate_output) = match mutated_sources(base, &case.mutations) {
        Ok(sources) => (run_expr(gold, &sources), run_expr(candidate, &sources)),
        Err(e) => (Output::Error(e.to_string()), Output::Error(e.to_string())),
    };
    let expected = match &case.expectation {
        Expectation::MatchGold => gold_output.text().map(str::to_string),
        Expectation::ExpectString(s) => Some(s.clone()),
    };
    let meets = |o: &Output| expected.is_some() && o.text() == expected.as_deref();
    let verdict = if meets(&candidate_output) {
        Verdict::Pass
    } else if meets(&gold_output) {
        Verdict::CounterfactualError
    } else {
        Verdict::BothError
    };
    CaseVerdict {
        id: case.id.clone(),
        task: case.task().to_string(),
        category: case.category,
        complexity: complexity(gold),
        gold_output,
        candidate_output,
        verdict,
    }
}

/// The context with each mutation applied to its dataset.
pub fn mutated_sources(base: &Sources, mutations: &[Mutation]) -> Result<Sources, MutationError> {
    let mut out = base.clone();
    out.datasets = apply_mutations(&base.datasets, mutations)?;
    Ok(out)
}

pub(crate) fn parse_source(what: &str, id: &str, src: &str) -> Result<Expr, SuiteError> {
    parse_expr(src).map_err(|e| SuiteError::Invalid { case: id.to_string(), message: format!("{what}: {e}") })
}

#[cfg(test)]
mod tests;
