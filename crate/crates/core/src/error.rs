//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input text (formulas, structure files, polynomials, cost
    /// models). Positions are 1-based.
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("unknown semiring `{0}`")]
    UnknownSemiring(String),

    /// The semiring does not provide the requested operation.
    #[error("the {semiring} semiring does not support {op}")]
    Unsupported { semiring: String, op: &'static str },

    /// A value does not belong to the carrier of the semiring that was asked
    /// to operate on it.
    #[error("value {value} is not a {semiring} element: {reason}")]
    Carrier {
        semiring: String,
        value: String,
        reason: String,
    },

    #[error("polynomial tag mismatch: {left} vs {right}")]
    TagMismatch { left: String, right: String },

    #[error("expansion exceeded the cap of {cap} monomials")]
    CapExceeded { cap: usize },

    #[error("proof-tree enumeration exceeded the limit of {limit} trees")]
    TreeLimitExceeded { limit: usize },

    /// An assignment used by a homomorphism maps some complementary token
    /// pair to values whose product is not zero.
    #[error("assignment is not dual-consistent: {pos} and {neg} multiply to a nonzero value")]
    DualAssignment { pos: String, neg: String },

    #[error("assignment misses a value for {0}")]
    MissingAssignment(String),

    #[error("formula uses `{construct}`, which requires extended mode")]
    ExtendedOnly { construct: &'static str },

    #[error("variable `{0}` is free; sentences must bind every variable")]
    FreeVariable(String),

    #[error("formula does not fit the interpretation: {0}")]
    VocabularyMismatch(String),

    #[error("interpretation is not model-defining: {0}")]
    NotModelDefining(String),

    #[error("interpretation is not model-compatible: {0}")]
    NotModelCompatible(String),

    #[error("interpretation does not track provenance: {0}")]
    NotProvenanceTracking(String),

    #[error("structure is not compatible with the interpretation: it falsifies {literal}, which carries a nonzero annotation")]
    IncompatibleStructure { literal: String },

    /// `explanations` was asked about a sentence that fails in the structure.
    #[error("the sentence evaluates to 0 here; run why-not analysis to explain the failure")]
    SentenceFalse,

    /// `why_not` was asked about a sentence that holds in the structure.
    #[error("the sentence already holds here; why-not analysis explains failures only")]
    SentenceTrue,

    #[error("invalid update: {0}")]
    InvalidUpdate(String),

    #[error("no repair within the allowed insertions and deletions can satisfy the sentence")]
    NoRepair,

    #[error("internal invariant violated: {0}")]
    Internal(String),
}
