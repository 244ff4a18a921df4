use thiserror::Error;

/// Errors raised across the crate. Variant names double as the
/// machine-readable error names reported by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("weights must be non-increasing (w{at} < w{next})", next = .at + 1)]
    WeightOrder { at: usize },

    #[error("degenerate rule: first and last weight are equal")]
    DegenerateRule,

    #[error("unknown rule `{0}` (expected plurality, borda or antiplurality)")]
    UnknownRule(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("unifying alternative A{0} is the same as the reference alternative")]
    SameAlternative(usize),

    #[error("initial arrangement is tied between {0:?}")]
    TiedArrangement(Vec<(usize, usize)>),

    #[error("not applicable: A{0} is the current winner")]
    NotApplicable(usize),

    #[error("selection out of bounds: {0}")]
    SelectionBounds(String),

    #[error("profile is not manipulable by the coalition of A{0}")]
    NotManipulable(usize),

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error("witness mass {actual} differs from coalition mass {expected}")]
    MassMismatch { expected: String, actual: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("epsilon {0} violates the construction bounds")]
    Epsilon(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable name used in structured CLI output.
    pub fn name(&self) -> &'static str {
        match self {
            Error::WeightOrder { .. } => "WeightOrderError",
            Error::DegenerateRule => "DegenerateRuleError",
            Error::UnknownRule(_) => "UnknownRuleError",
            Error::SizeLimit(_) => "SizeLimitError",
            Error::DimensionMismatch { .. } => "DimensionMismatchError",
            Error::InvalidProfile(_) => "InvalidProfileError",
            Error::SameAlternative(_) => "SameAlternativeError",
            Error::TiedArrangement(_) => "TiedArrangementError",
            Error::NotApplicable(_) => "NotApplicableError",
            Error::SelectionBounds(_) => "SelectionBoundsError",
            Error::NotManipulable(_) => "NotManipulableError",
            Error::InternalInvariant(_) => "InternalInvariantError",
            Error::MassMismatch { .. } => "MassMismatchError",
            Error::Infeasible(_) => "InfeasibleError",
            Error::Epsilon(_) => "EpsilonError",
            Error::Parse(_) => "ParseError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
