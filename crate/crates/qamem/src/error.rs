use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },

    #[error("layout has no blocks")]
    EmptyLayout,

    #[error("block '{0}' has zero dimension")]
    ZeroDimBlock(String),

    #[error("duplicate block name '{0}'")]
    DuplicateBlock(String),

    #[error("unknown block '{0}'")]
    UnknownBlock(String),

    #[error("not a state: {0}")]
    NotAState(String),

    #[error("not CPTP: {0}")]
    NotCptp(String),

    #[error("empty Kraus set")]
    EmptyKrausSet,

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("singular measurement frame: eigenvalue {value:.3e} below cutoff {cutoff:.3e}")]
    SingularFrame { value: f64, cutoff: f64 },

    #[error("not a pattern: {0}")]
    NotAPattern(String),

    #[error("duplicate pattern '{0}'")]
    DuplicatePattern(String),

    #[error("not a ±1 spin vector")]
    NotSpinVector,

    #[error("basin '{0}' has zero decaying dimension")]
    ZeroBasin(String),

    #[error("association rate {0} outside (0, 1]")]
    RateOutOfRange(f64),

    #[error("pattern set does not fit: needs {needed} dimensions, space has {available}")]
    SpaceOverfull { needed: usize, available: usize },

    #[error("Hamiltonian is not Hermitian (residual {0:.3e})")]
    NonHermitianHamiltonian(f64),

    #[error("negative jump rate {0}")]
    NegativeRate(f64),

    #[error("no spectral gap above threshold {0}")]
    NoGapFound(f64),

    #[error("degenerate steady state ({0} zero modes); pick a phase instead")]
    DegenerateSteadyState(usize),

    #[error("trajectory step too large: jump probability {p:.3} at dt={dt:.3e} after {halvings} halvings")]
    StepTooLarge { p: f64, dt: f64, halvings: u32 },

    #[error("Fock truncation too small: tail weight {tail:.3e} at dim {dim}")]
    TruncationTooSmall { dim: usize, tail: f64 },

    #[error("quadrature grid too coarse: identity residual {0:.3e}")]
    GridTooCoarse(f64),

    #[error("bad bit string '{0}'")]
    BadBitString(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
