use thiserror::Error;

/// Errors produced by label algebra, protocol evaluation and search.
#[derive(Debug, Error)]
pub enum Error {
    #[error("probability entry {value} at index {index} is negative")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1 within {tol}")]
    ProbabilitySum { sum: f64, tol: f64 },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("all entries are zero")]
    AllZero,
    #[error("pair index {index} out of range for {pairs} pairs")]
    PairOutOfRange { index: usize, pairs: usize },
    #[error("source and target pair must differ")]
    SourceEqualsTarget,
    #[error("fidelity {0} outside (1/4, 1]")]
    FidelityRange(f64),
    #[error("pair count mismatch: {left} vs {right}")]
    PairCountMismatch { left: usize, right: usize },
    #[error("parity mask must be nonzero")]
    ZeroMask,
    #[error("matrix is not invertible over GF(2)")]
    NotInvertible,
    #[error("matrix does not preserve the symplectic form")]
    NotSymplectic,
    #[error("label maps are only enumerated for 1..=3 pairs, got {0}")]
    UnsupportedPairCount(usize),
    #[error("invalid protocol tree: {0}")]
    InvalidTree(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("measurement outcome has zero success probability")]
    DegenerateSpectrum,
    #[error("block of {pairs} pairs exceeds configured limit of {limit}")]
    BlockTooLarge { pairs: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
