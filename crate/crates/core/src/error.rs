//! Crate-wide error type.

use thiserror::Error;

/// Summary of a failed multidimensional recovery run, kept small so it can
/// live inside [`Error`] without being generic over the scalar type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AttemptSummary {
    /// Total directions drawn.
    pub attempts: usize,
    /// Directions accepted before giving up.
    pub accepted: usize,
    /// Rejected because the projected ACF had collisions.
    pub rejected_collision: usize,
    /// Rejected because the projected problem was ambiguous (counterexample family).
    pub rejected_ambiguous: usize,
    /// Rejected because the direction was linearly dependent on accepted ones.
    pub rejected_dependent: usize,
    /// Rejected for any other reason (duplicate draw, 1-D solver failure).
    pub rejected_other: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(&'static str),
    #[error("invalid ACF: {0}")]
    InvalidAcf(&'static str),
    #[error("invalid difference multiset: {0}")]
    InvalidDiffs(&'static str),
    #[error("difference multiset has {0} entries, not of the form n(n-1)/2")]
    InvalidCardinality(usize),
    #[error("parameter yields a degenerate six-point support")]
    DegenerateParameter,
    #[error("singular matrix while recovering coefficients")]
    SingularSystem,
    #[error("ACF is inconsistent with the candidate support: {0}")]
    InconsistentAcf(&'static str),
    #[error("coefficient has no exact rational value; rerun in floating mode")]
    IrrationalCoefficient,
    #[error("no point set realizes the difference multiset")]
    NoSolution,
    #[error("enumeration bound is smaller than the largest difference")]
    InvalidBound,
    #[error("instance too large for exhaustive search")]
    TooLarge,
    #[error("gave up after {} direction attempts ({} accepted, {} collision, {} ambiguous)",
            .0.attempts, .0.accepted, .0.rejected_collision, .0.rejected_ambiguous)]
    GaveUp(AttemptSummary),
    #[error("invalid options: {0}")]
    BadOptions(&'static str),
    #[error("internal invariant violated: {0}")]
    InvariantViolated(&'static str),
}
