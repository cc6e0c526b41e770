use thiserror::Error;

#[derive(Debug, Error)]
pub enum MobsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("plane index {index} out of range for k = {k}")]
    PlaneIndexOutOfRange { index: usize, k: usize },
    #[error("enumeration of all {n}x{n} Boolean matrices refused: n must be in 1..=5")]
    EnumerationTooLarge { n: usize },
    #[error("cannot assemble a matrix from an empty plane sequence")]
    EmptyPlaneSequence,
    #[error("cycle specification invalid: {0}")]
    InvalidCycles(String),
    #[error("primes {primes:?} sum to {sum}, expected k = {k}")]
    PrimeSumMismatch {
        primes: Vec<usize>,
        sum: usize,
        k: usize,
    },
    #[error("k = {k} is not a sum of the first few primes")]
    NotAPrimePrefixSum { k: usize },
    #[error("exponent must be at least 1")]
    ZeroExponent,
    #[error("CRT moduli are not pairwise coprime: {0} and {1}")]
    NonCoprimeModuli(u128, u128),
    #[error("no admissible residue for cycle starting at position {cycle_start}: input is not a genuine transcript")]
    InconsistentResidues { cycle_start: usize },
    #[error("transcript is missing private fields required for this operation")]
    MissingPrivateFields,
    #[error("Spearman's coefficient undefined: {0}")]
    SpearmanUndefined(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MobsError>;
