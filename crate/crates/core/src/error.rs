use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("operation requires {expected}, got {found}")]
    WrongFamily {
        expected: &'static str,
        found: &'static str,
    },

    #[error("branch {branch} out of range for degree {degree}")]
    BranchOutOfRange { branch: u32, degree: u32 },

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("negative index {0} requested on a one-sided sequence")]
    NegativeIndexOnOneSided(i64),

    #[error("phase spaces differ")]
    IncompatiblePhaseSpaces,

    #[error("sequence has no declared limit map")]
    NoDeclaredLimit,

    #[error("pseudo-orbit defect too large at index {index}: {detail}")]
    DefectTooLarge { index: usize, detail: String },

    #[error("orbit of length {len} is shorter than the truncation depth {depth} needed for tol")]
    TruncationDominates { len: usize, depth: usize },

    #[error("no separation within {cap} steps")]
    NoSeparationWithinCap { cap: usize },

    #[error("|||F - G||| = {distance} exceeds the stability threshold {threshold}")]
    StabilityThresholdExceeded { distance: f64, threshold: f64 },

    #[error("shadowing failed at {} grid points (first: {:?})", .locations.len(), .locations.first())]
    ShadowFailure { locations: Vec<usize> },

    #[error("admissibility violated: {0}")]
    AdmissibilityViolated(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("orbit hits a branch boundary at step {step}")]
    BoundaryItinerary { step: usize },

    #[error("empty list")]
    EmptyList,

    #[error("observable has equal averages on both periodic orbits")]
    DegenerateObservable,

    #[error("candidate grid spacing {spacing} is not below epsilon/4 = {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("separated-count inequality violated at n = {n}: {lhs} < {rhs}")]
    InequalityViolated { n: usize, lhs: usize, rhs: usize },

    #[error("observable is not mean zero: mean {mean} (standard error {std_error})")]
    NotMeanZero { mean: f64, std_error: f64 },

    #[error("cone condition fails: {0}")]
    ConeConditionFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
