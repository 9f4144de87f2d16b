//! Core of a transparent-document toolkit: an expression language with
//! provenance-tracking evaluation, interpolated documents whose holes are
//! expressions, and counterfactual testing of those expressions.

pub mod counterfactual;
pub mod doc;
pub mod eval;
pub mod expr;
