use std::collections::{BTreeMap, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::eval::EnvError;
use crate::expr::Expr;

use super::{
    complexity, mutated_sources, parse_source, run_case, run_expr, CaseVerdict, Category, Expectation, Output, Suite,
    Verdict,
};

/// Meaning of the report's aggregate fields, written into every report.
pub const DEFINITIONS: [(&str, &str); 6] = [
    ("execution", "all cases sharing a task: one candidate expression tested against one gold expression"),
    (
        "counterfactualError",
        "a case where gold meets the expectation on the mutated tables and the candidate does not",
    ),
    ("casesWithError", "executions with at least one counterfactual error"),
    ("errorsPerCaseMean", "mean number of counterfactual errors over executions counted in casesWithError"),
    (
        "succeededDespiteError",
        "executions counted in casesWithError whose candidate still produces the gold output on the unmodified tables",
    ),
    (
        "successRate / robustRate",
        "share of executions whose candidate matches gold on the unmodified tables / that also pass every case",
    ),
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SuiteError {
    #[error("case `{case}`: {message}")]
    Invalid { case: String, message: String },
    #[error("duplicate case id `{0}`")]
    DuplicateId(String),
    #[error("suite context: {0}")]
    Context(EnvError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExecutionSummary {
    pub task: String,
    pub category: Category,
    pub complexity: usize,
    /// Candidate output equals gold output on the unmodified tables.
    pub base_success: bool,
    pub cases: usize,
    pub counterfactual_errors: usize,
    pub both_errors: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Totals {
    pub executions: usize,
    pub cases: usize,
    pub passed: usize,
    pub counterfactual_errors: usize,
    pub both_errors: usize,
    pub cases_with_error: usize,
    pub errors_per_case_mean: f64,
    pub succeeded_despite_error: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RateRow {
    pub key: String,
    pub executions: usize,
    pub successes: usize,
    pub robust: usize,
    pub success_rate: f64,
    pub robust_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteReport {
    pub name: String,
    pub definitions: IndexMap<String, String>,
    pub verdicts: Vec<CaseVerdict>,
    pub executions: Vec<ExecutionSummary>,
    pub totals: Totals,
    pub by_category: Vec<RateRow>,
    pub by_complexity: Vec<RateRow>,
}

impl SuiteReport {
    /// Builds the aggregate fields from verdicts and per-execution base results.
    pub fn from_verdicts(name: &str, verdicts: Vec<CaseVerdict>, base_success: &BTreeMap<String, bool>) -> Self {
        let mut executions: Vec<ExecutionSummary> = Vec::new();
        for v in &verdicts {
            let i = match executions.iter().position(|e| e.task == v.task) {
                Some(i) => i,
                None => {
                    executions.push(ExecutionSummary {
                        task: v.task.clone(),
                        category: v.category,
                        complexity: v.complexity,
                        base_success: base_success.get(&v.task).copied().unwrap_or(false),
                        cases: 0,
                        counterfactual_errors: 0,
                        both_errors: 0,
                    });
                    executions.len() - 1
                }
            };
            let e = &mut executions[i];
            e.cases += 1;
            match v.verdict {
                Verdict::Pass => {}
                Verdict::CounterfactualError => e.counterfactual_errors += 1,
                Verdict::BothError => e.both_errors += 1,
            }
        }

        let with_error: Vec<&ExecutionSummary> = executions.iter().filter(|e| e.counterfactual_errors > 0).collect();
        let cf_total: usize = with_error.iter().map(|e| e.counterfactual_errors).sum();
        let totals = Totals {
            executions: executions.len(),
            cases: verdicts.len(),
            passed: verdicts.iter().filter(|v| v.verdict == Verdict::Pass).count(),
            counterfactual_errors: cf_total,
            both_errors: verdicts.iter().filter(|v| v.verdict == Verdict::BothError).count(),
            cases_with_error: with_error.len(),
            errors_per_case_mean: if with_error.is_empty() { 0.0 } else { cf_total as f64 / with_error.len() as f64 },
            succeeded_despite_error: with_error.iter().filter(|e| e.base_success).count(),
        };

        let by_category = rate_rows(&executions, |e| (e.category as usize, e.category.label().to_string()));
        let by_complexity = rate_rows(&executions, |e| (e.complexity, e.complexity.to_string()));
        SuiteReport {
            name: name.to_string(),
            definitions: DEFINITIONS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            verdicts,
            executions,
            totals,
            by_category,
            by_complexity,
        }
    }
}

fn rate_rows(executions: &[ExecutionSummary], key: impl Fn(&ExecutionSummary) -> (usize, String)) -> Vec<RateRow> {
    let mut rows: BTreeMap<usize, RateRow> = BTreeMap::new();
    for e in executions {
        let (order, label) = key(e);
        let row = rows.entry(order).or_insert_with(|| RateRow {
            key: label,
            executions: 0,
            successes: 0,
            robust: 0,
            success_rate: 0.0,
            robust_rate: 0.0,
        });
        row.executions += 1;
        if e.base_success {
            row.successes += 1;
            if e.counterfactual_errors == 0 && e.both_errors == 0 {
                row.robust += 1;
            }
        }
    }
    rows.into_values()
        .map(|mut r| {
            r.success_rate = r.successes as f64 / r.executions as f64;
            r.robust_rate = r.robust as f64 / r.executions as f64;
            r
        })
        .collect()
}

struct Prepared {
    gold: Expr,
    candidate: Expr,
}

/// Validates the suite, then runs every case.
///
/// Validation rejects unparsable expressions, missing candidates, cases
/// without mutations, mutations that do not apply to the base tables,
/// declared complexities that disagree with the gold expression, task groups
/// whose cases disagree on gold, candidate or category, and gold expressions
/// that fail their own expectation.
pub fn run_suite(suite: &Suite) -> Result<SuiteReport, SuiteError> {
    suite.context.env().map_err(SuiteError::Context)?;
    let mut seen = HashSet::new();
    let mut prepared = Vec::new();
    let mut groups: BTreeMap<&str, (&str, &str, Category)> = BTreeMap::new();
    for case in &suite.cases {
        let invalid = |message: String| SuiteError::Invalid { case: case.id.clone(), message };
        if !seen.insert(case.id.as_str()) {
            return Err(SuiteError::DuplicateId(case.id.clone()));
        }
        let gold = parse_source("gold", &case.id, &case.gold)?;
        let cand_src = case.candidate.as_deref().ok_or_else(|| invalid("no candidate expression".into()))?;
        let candidate = parse_source("candidate", &case.id, cand_src)?;
        if case.mutations.is_empty() {
            return Err(invalid("at least one mutation is required".into()));
        }
        let computed = complexity(&gold);
        if computed == 0 {
            return Err(invalid("gold expression contains no query sub-expression".into()));
        }
        if let Some(declared) = case.complexity {
            if declared != computed {
                return Err(invalid(format!("declared complexity {declared} but gold has {computed}")));
            }
        }
        let mutated = mutated_sources(&suite.context, &case.mutations).map_err(|e| invalid(e.to_string()))?;
        let gold_out = run_expr(&gold, &mutated);
        match (&case.expectation, &gold_out) {
            (_, Output::Error(e)) => return Err(invalid(format!("gold fails on the mutated tables: {e}"))),
            (Expectation::ExpectString(s), Output::Text(t)) if s != t => {
                return Err(invalid(format!("gold produces {t:?}, not the expected {s:?}")))
            }
            _ => {}
        }
        let entry = groups.entry(case.task()).or_insert((&case.gold, cand_src, case.category));
        if *entry != (case.gold.as_str(), cand_src, case.category) {
            return Err(invalid(format!("cases of task `{}` disagree on gold, candidate or category", case.task())));
        }
        prepared.push(Prepared { gold, candidate });
    }

    let mut base_success = BTreeMap::new();
    let mut verdicts = Vec::new();
    for (case, p) in suite.cases.iter().zip(&prepared) {
        base_success.entry(case.task().to_string()).or_insert_with(|| {
            let g = run_expr(&p.gold, &suite.context);
            g.text().is_some() && g == run_expr(&p.candidate, &suite.context)
        });
        verdicts.push(run_case(&p.gold, &p.candidate, case, &suite.context));
    }
    Ok(SuiteReport::from_verdicts(&suite.name, verdicts, &base_success))
}
