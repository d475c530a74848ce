//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// An argument is outside the operation's domain (e.g. `j > n` in a
    /// binomial, a non-positive family parameter, a zero weight).
    #[error("domain error: {0}")]
    Domain(String),

    /// A lattice parameter makes a required factor vanish (root-of-unity-like
    /// degeneracies in q-Pochhammer products or q-integers).
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    /// A moment source was queried past the degree it can produce.
    #[error("insufficient moments: needed degree {needed}, available up to {available}")]
    InsufficientMoments { needed: usize, available: i64 },

    /// A Hankel determinant vanished before the requested level.
    #[error("functional is not regular at level {first_bad}: Hankel determinant vanishes")]
    NonRegular { first_bad: usize },

    /// A leading principal minor of a Gram matrix failed to be positive.
    #[error("bilinear form not positive definite at index {index}")]
    NotPositiveDefinite { index: usize },

    /// Coefficient data does not cover the indices an operation needs.
    #[error("incomplete data: {0}")]
    IncompleteData(String),

    /// A linear system that must be uniquely solvable was singular.
    #[error("singular system while solving for index {index}")]
    SingularSystem { index: usize },

    /// A verified-input precondition failed (signals a broken caller contract).
    #[error("inconsistency: {0}")]
    Inconsistency(String),

    /// The hypothesis of a converse construction does not hold for the data.
    #[error("converse hypothesis violation: {0}")]
    ConverseHypothesis(String),

    /// Malformed textual input (rationals, JSON functional specs).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
