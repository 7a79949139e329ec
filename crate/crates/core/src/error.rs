use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid operand: {0}")]
    InvalidOperand(&'static str),
    #[error("operands belong to different fields or curves")]
    ParamsMismatch,
    #[error("modulus {0} is not an odd prime")]
    NotPrime(u64),
    #[error("invalid curve parameters: {0}")]
    InvalidCurve(String),
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("no generator of the order-{0} subgroup found")]
    GeneratorSearchFailed(u64),
    #[error("point is not in the order-r subgroup")]
    NotInSubgroup,
    #[error("Miller loop hit a degenerate line evaluation")]
    MillerDegenerate,
    #[error("threshold is invalid: {0}")]
    InvalidThreshold(String),
    #[error("x = 0 is reserved, evaluating there reveals the secret")]
    ReservedEvaluationPoint,
    #[error("duplicate share x value {0}")]
    DuplicateShareX(u64),
    #[error("need at least {needed} shares, have {have}")]
    InsufficientShares { needed: usize, have: usize },
    #[error("authentication tag mismatch")]
    AuthenticationFailed,
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error("unknown message kind {0:?}")]
    UnknownMessageKind(String),
    #[error("x range of group {0} exhausted")]
    CapacityExceeded(u32),
    #[error("credential epoch {credential} is stale, group epoch is {current}")]
    StaleCredential { credential: u64, current: u64 },
    #[error("unknown member {0}")]
    UnknownMember(String),
    #[error("recovered secret does not match the published digest")]
    KeyAgreementFailed,
    #[error("no roaming agreement with group {0}")]
    NoRoamingAgreement(u32),
    #[error("hand-over rejected")]
    HandoverRejected,
    #[error("member has no group key")]
    MissingGroupKey,
    #[error("no session key with {0}")]
    MissingSessionKey(String),
    #[error("invalid member id {0:?}")]
    InvalidMemberId(String),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
