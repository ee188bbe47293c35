//! Instance readers and writers: the line-based native format, the ASP
//! fact format, and the comparison normalization pass.

mod facts;
mod native;
mod normalize;
mod term;

pub use facts::{emit_facts, parse_facts};
pub(crate) use facts::{arg_list_term, mul_term, prefix_term};
pub use native::parse_native;
pub use normalize::normalize_comparisons;
pub use term::{parse_term_document, Term};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: {source}")]
    Model {
        line: usize,
        #[source]
        source: ModelError,
    },
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error("comparison `{0}` is not normalized to <=")]
    NotNormalized(String),
    #[error("unknown predicate or functor `{0}`")]
    UnknownPredicate(String),
    #[error("reference to undeclared relation `{0}`")]
    DanglingRelation(String),
    #[error("malformed argument list: {0}")]
    MalformedArgs(String),
    #[error("relation `{rel}`: {msg}")]
    ArityMismatch { rel: String, msg: String },
    #[error("malformed fact: {0}")]
    MalformedFact(String),
}

/// Identifiers usable both in the native format and as ASP constants.
pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && s != "nil"
}
