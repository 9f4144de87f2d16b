//! The interpretation agent's closed loop: ask for an expression, check it,
//! feed any failure back and ask again.

use serde::{Deserialize, Serialize};

use transdoc_core::doc::expr_source;
use transdoc_core::eval::{coerce_to_string, evaluate, Env, EnvError, EvalError};
use transdoc_core::expr::{parse_expr, Expr, ParseError};

use crate::gateway::{strip_fences, ChatMessage, Gateway, GatewayError};
use crate::task::{build_interpretation_prompt, SynthesisTask, TaskError};

pub const DEFAULT_MAX_RETRIES: u32 = 5;
pub const DEFAULT_TRANSPORT_BUDGET: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthesisConfig {
    /// Model answers checked before giving up.
    pub max_retries: u32,
    /// Transport failures tolerated over the whole loop.
    pub transport_budget: u32,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self { max_retries: DEFAULT_MAX_RETRIES, transport_budget: DEFAULT_TRANSPORT_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum SynthesisOutcome {
    Success {
        #[serde(with = "expr_source")]
        expr: Expr,
        attempts: u32,
    },
    FailNoExpression {
        last_error: String,
        attempts: u32,
    },
    Mismatch {
        #[serde(with = "expr_source")]
        expr: Expr,
        s_prime: String,
        attempts: u32,
    },
}

impl SynthesisOutcome {
    pub fn attempts(&self) -> u32 {
        match self {
            SynthesisOutcome::Success { attempts, .. }
            | SynthesisOutcome::FailNoExpression { attempts, .. }
            | SynthesisOutcome::Mismatch { attempts, .. } => *attempts,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SynthesisOutcome::Success { .. } => "success",
            SynthesisOutcome::FailNoExpression { .. } => "failNoExpression",
            SynthesisOutcome::Mismatch { .. } => "mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthesisError {
    #[error("invalid task: {0}")]
    Task(#[from] TaskError),
    #[error("program context: {0}")]
    Context(#[from] EnvError),
    #[error("retries must be at least 1")]
    NoRetries,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

/// Why one candidate was not accepted.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckFailure {
    Parse(ParseError),
    Eval(EvalError),
    Coerce(EvalError),
    Mismatch { expr: Expr, s_prime: String },
}

impl CheckFailure {
    fn feedback(&self, task: &SynthesisTask) -> String {
        match self {
            CheckFailure::Parse(e) => format!("Parse error: {e}"),
            CheckFailure::Eval(e) => format!("Evaluation error: {e}"),
            CheckFailure::Coerce(e) => format!("Result is not a string: {e}"),
            CheckFailure::Mismatch { s_prime, .. } if task.share_target => {
                format!("Wrong value: expected {:?} but the expression evaluates to {:?}", task.target, s_prime)
            }
            CheckFailure::Mismatch { s_prime, .. } => {
                format!("Wrong value: the expression evaluates to {s_prime:?}, which does not fit the paragraph")
            }
        }
    }
}

/// Parses, evaluates and coerces `text`, then compares with `target`.
pub fn check_candidate(text: &str, env: &Env, target: &str) -> Result<Expr, CheckFailure> {
    let expr = parse_expr(text).map_err(CheckFailure::Parse)?;
    let value = evaluate(&expr, env).map_err(CheckFailure::Eval)?;
    let (s, _) = coerce_to_string(&value).map_err(CheckFailure::Coerce)?;
    if s == target {
        Ok(expr)
    } else {
        Err(CheckFailure::Mismatch { expr, s_prime: s })
    }
}

/// Independent re-check of a success: `expr` renders exactly the target.
pub fn revalidate(expr: &Expr, task: &SynthesisTask) -> bool {
    let Ok(env) = task.sources().env() else { return false };
    evaluate(expr, &env).and_then(|v| coerce_to_string(&v)).is_ok_and(|(s, _)| s == task.target)
}

/// Runs the retry loop. The conversation keeps every earlier answer and its
/// feedback.
pub fn synthesize(gateway: &Gateway, task: &SynthesisTask, config: SynthesisConfig) -> Result<SynthesisOutcome, SynthesisError> {
    if config.max_retries == 0 {
        return Err(SynthesisError::NoRetries);
    }
    task.validate()?;
    let env = task.sources().env()?;
    let mut messages = build_interpretation_prompt(task);
    let mut transport_failures = 0;
    let mut last = None;
    let mut attempts = 0;
    while attempts < config.max_retries {
        let req = gateway.request(messages.clone());
        let response = match gateway.complete(&req) {
            Ok(r) => r,
            Err(e) if e.is_retryable() && transport_failures < config.transport_budget => {
                transport_failures += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        attempts += 1;
        match check_candidate(&strip_fences(&response), &env, &task.target) {
            Ok(expr) => return Ok(SynthesisOutcome::Success { expr, attempts }),
            Err(failure) => {
                messages.push(ChatMessage::assistant(response));
                messages.push(ChatMessage::user(failure.feedback(task)));
                last = Some(failure);
            }
        }
    }
    Ok(match last.expect("at least one attempt") {
        CheckFailure::Mismatch { expr, s_prime } => SynthesisOutcome::Mismatch { expr, s_prime, attempts },
        CheckFailure::Parse(e) => SynthesisOutcome::FailNoExpression { last_error: e.to_string(), attempts },
        CheckFailure::Eval(e) | CheckFailure::Coerce(e) => {
            SynthesisOutcome::FailNoExpression { last_error: e.to_string(), attempts }
        }
    })
}
