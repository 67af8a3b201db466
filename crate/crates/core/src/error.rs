use thiserror::Error;

pub type Result<T, E = MechError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechError {
    #[error("invalid signal space: {0}")]
    InvalidSpace(String),

    #[error("signal space has {count} profiles, above the cap of {cap}")]
    ProfileCapExceeded { count: u128, cap: u64 },

    #[error("signal space is too large to enumerate; use a per-profile evaluator instead")]
    NotEnumerable,

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("bidder {} out of range for {n} bidders", .bidder + 1)]
    BidderOutOfRange { bidder: usize, n: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "valuations are not monotone: v_{} decreases when the signal of bidder {} rises to profile {profile:?}",
        .bidder + 1,
        .direction + 1
    )]
    NonMonotone {
        bidder: usize,
        direction: usize,
        profile: Vec<usize>,
    },

    #[error("invalid valuation data: {0}")]
    InvalidValuation(String),

    #[error("mechanism not applicable: {0}")]
    NotApplicable(String),

    #[error(
        "propagation conflict at profile {profile:?}: bidders {} and {} both forced",
        .first + 1,
        .second + 1
    )]
    PropagationConflict {
        profile: Vec<usize>,
        first: usize,
        second: usize,
    },

    #[error("enumeration cap exceeded: {0}")]
    EnumerationCap(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("reserve price undefined: {0}")]
    UndefinedReserve(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl MechError {
    /// Stable snake_case name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            MechError::InvalidSpace(_) => "invalid_space",
            MechError::ProfileCapExceeded { .. } => "profile_cap_exceeded",
            MechError::NotEnumerable => "not_enumerable",
            MechError::InvalidProfile(_) => "invalid_profile",
            MechError::BidderOutOfRange { .. } => "bidder_out_of_range",
            MechError::Precondition(_) => "precondition",
            MechError::NonMonotone { .. } => "non_monotone",
            MechError::InvalidValuation(_) => "invalid_valuation",
            MechError::NotApplicable(_) => "not_applicable",
            MechError::PropagationConflict { .. } => "propagation_conflict",
            MechError::EnumerationCap(_) => "enumeration_cap",
            MechError::InvalidPrior(_) => "invalid_prior",
            MechError::UndefinedReserve(_) => "undefined_reserve",
            MechError::UnknownGenerator(_) => "unknown_generator",
            MechError::InvalidParameter(_) => "invalid_parameter",
            MechError::Parse(_) => "parse",
        }
    }
}
