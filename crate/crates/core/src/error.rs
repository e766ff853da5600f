use thiserror::Error;

use crate::groebner::Ideal;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime (or exceeds 2^31)")]
    NotPrime(u64),

    #[error("value {value} out of range: {reason}")]
    Range { value: String, reason: String },

    #[error("{0} is outside the interval (0, 1]")]
    Domain(String),

    #[error("digit sequence is not periodic with preperiod {preperiod} and period {period}")]
    InconsistentPeriod { preperiod: usize, period: usize },

    #[error("periodic part is all zeros; expansions must have infinitely many nonzero digits")]
    TerminatingExpansion,

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown variable `{name}` at position {position}")]
    UnknownVariable { name: String, position: usize },

    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("polynomials belong to different rings")]
    RingMismatch,

    #[error("total degree {degree} exceeds the configured maximum {limit}")]
    DegreeOverflow { degree: u64, limit: u64 },

    #[error("Gröbner basis computation exceeded its budget of {budget} S-pair reductions")]
    ResourceLimit { budget: usize },

    #[error("the hypersurface equation is zero")]
    ZeroHypersurface,

    #[error("the Cartier structure twist must be nonzero")]
    ZeroTwist,

    #[error("the Cartier module is not F-pure")]
    NotFPure,

    #[error("F-regularity has not been checked or assumed")]
    FRegularityUnchecked,

    #[error("ascending chain did not stabilize by level {e_max}")]
    NonStabilized {
        e_max: u32,
        last: Box<Ideal>,
        previous: Option<Box<Ideal>>,
    },

    #[error("jumping numbers unresolved: {} open interval(s) remain at level {}", .0.unresolved.len(), .0.e_reached)]
    Unresolved(Box<crate::testmodule::JumpingNumberReport>),

    #[error("t must be a p-adic rational a/p^s, got {0}")]
    NotPAdic(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("truncation overflow: t-degree {degree} does not fit below bound {bound}")]
    TruncationOverflow { degree: u64, bound: u64 },

    #[error("operator normalization exceeded its step budget of {0}")]
    NormalizationBudget(usize),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
