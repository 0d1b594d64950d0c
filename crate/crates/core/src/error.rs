use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chain needs at least 2 sites, got {0}")]
    TooFewSites(usize),

    #[error("chain of {0} sites exceeds the supported maximum of {max}", max = crate::basis::MAX_SITES)]
    TooManySites(usize),

    #[error("unsupported excitation sector k={k} for {n_sites} sites (k must be 0, 1 or 2 and at most N)")]
    UnsupportedSector { n_sites: usize, k: usize },

    #[error("configuration {0} is not part of the basis")]
    UnknownConfiguration(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("sector mismatch: expected (N={expected_sites}, k={expected_k}), got (N={actual_sites}, k={actual_k})")]
    SectorMismatch {
        expected_sites: usize,
        expected_k: usize,
        actual_sites: usize,
        actual_k: usize,
    },

    #[error("matrix is not Hermitian (max |H - H^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("impurity site {site} outside [2, {max}]")]
    ImpuritySite { site: usize, max: usize },

    #[error("invalid impurity ratios: {0}")]
    ImpurityRatio(String),

    #[error("coupling profile has {actual} {kind} bonds, expected {expected}")]
    BondCount {
        kind: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("kick interval must be positive and finite, got {0}")]
    NonPositiveTau(f64),

    #[error("amplitude modulus {0} exceeds 1")]
    AmplitudeTooLarge(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("sender and receiver pairs overlap: need at least 4 sites, got {0}")]
    ChainTooShortForPairs(usize),

    #[error("omega0 is a single-qubit input, not a two-qubit family")]
    NotTwoQubitFamily,

    #[error("series too short for a periodogram: need at least 4 samples, got {0}")]
    SeriesTooShort(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("sweep failed at grid index {index}: {source}")]
    SweepPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
