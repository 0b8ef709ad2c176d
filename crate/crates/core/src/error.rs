use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is neither 2 nor prime")]
    CompositeModulus(u64),
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("expected {expected} bytes for a field element, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },
    #[error("field of size {modulus} is too small for {n} agents (need modulus > n)")]
    FieldTooSmall { modulus: u64, n: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("transition for state {state} on symbol `{symbol}` is missing")]
    PartialTransition { state: usize, symbol: String },
    #[error("transition for state {state} on symbol `{symbol}` is defined twice")]
    DuplicateTransition { state: usize, symbol: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("state index {index} out of range 1..={max}")]
    StateOutOfRange { index: usize, max: usize },

    #[error("duplicate x coordinate in interpolation points")]
    DuplicateX,
    #[error("agent {agent} is not a member of group {group}")]
    AgentNotInGroup { agent: usize, group: String },
    #[error("group has {actual} members, expected {expected}")]
    BadGroupSize { expected: usize, actual: usize },
    #[error("(n,n) reconstruction needs all {expected} shares, got {actual}")]
    MissingShares { expected: usize, actual: usize },
    #[error("threshold reconstruction needs {needed} shares, got {actual}")]
    NotEnoughShares { needed: usize, actual: usize },
    #[error("threshold scheme requires n > 2t and t >= 1 (n = {n}, t = {t})")]
    ThresholdViolation { n: usize, t: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("reconstructed secrets are not one-hot: {0:?}")]
    InvalidOneHot(Vec<u64>),
    #[error("shares do not lie on a polynomial of degree <= {0}")]
    OffPolynomial(usize),
    #[error("no fully available subset of {0} responders")]
    NoFullSubset(usize),

    #[error("corruption at tick {tick} is beyond the horizon {horizon}")]
    TickOutOfRange { tick: u64, horizon: u64 },
    #[error("invalid corruption timeline: {0}")]
    InvalidTimeline(String),
    #[error("need at least {needed} samples, got {actual}")]
    InsufficientSamples { needed: usize, actual: usize },
    #[error("randomness of {bits} bits is too large to enumerate (limit {limit})")]
    TooLargeToEnumerate { bits: usize, limit: usize },

    #[error("corrupt state file: {0}")]
    StateFileCorrupt(String),
}
