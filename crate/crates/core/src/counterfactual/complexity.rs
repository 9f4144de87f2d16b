use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::expr::{BinOp, Expr, ExprKind};

/// Kinds of query sub-expression counted by [`complexity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum QueryKind {
    Retrieval,
    Aggregation,
    Arithmetic,
    Comparison,
    Ranking,
    Formatting,
}

fn kind_of_name(name: &str) -> Option<QueryKind> {
    Some(match name {
        "findWithKey_" | "model_" | "getByYear" | "getByCategory" | "filter" | "get" | "head" => QueryKind::Retrieval,
        "sum" | "length" | "overallComparison" => QueryKind::Aggregation,
        "compare" | "trendWord" | "compareCols" | "cmpTime" => QueryKind::Comparison,
        "maximumBy" | "minimumBy" | "sort" | "sortBy" | "findIndex" | "rankLabel" | "ordinal" => QueryKind::Ranking,
        "formatNum" | "numToStr" | "growShrink" | "smallerHigher" | "improvements" | "betterWorse"
        | "unusuallyHighLow" => QueryKind::Formatting,
        _ => return None,
    })
}

/// The distinct query kinds occurring in `e`, read off its syntax.
pub fn query_kinds(e: &Expr) -> BTreeSet<QueryKind> {
    let mut kinds = BTreeSet::new();
    e.walk(&mut |node| match &node.kind {
        ExprKind::Var(name) => kinds.extend(kind_of_name(name)),
        ExprKind::Field { .. } => {
            kinds.insert(QueryKind::Retrieval);
        }
        ExprKind::BinOp { op, .. } => {
            kinds.insert(match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => QueryKind::Arithmetic,
                BinOp::Concat => QueryKind::Formatting,
                BinOp::Eq | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => QueryKind::Comparison,
                BinOp::And | BinOp::Or => return,
            });
        }
        ExprKind::Interp(_) => {
            kinds.insert(QueryKind::Formatting);
        }
        _ => {}
    });
    kinds
}

/// Number of distinct query kinds in `e`.
pub fn complexity(e: &Expr) -> usize {
    query_kinds(e).len()
}
