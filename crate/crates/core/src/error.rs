use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("symbol {0} has no admissible successor or predecessor")]
    DeadSymbol(usize),

    #[error("transition matrix is not aperiodic (no positive power up to {0})")]
    NotAperiodic(usize),

    #[error("word {0:?} is not admissible")]
    InadmissibleWord(Vec<u8>),

    #[error("potential table is missing a value for word {0:?}")]
    IncompleteTable(Vec<u8>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("Perron vector has vanishing entries (reducible matrix)")]
    Reducible,

    #[error("word graph has a positive cycle (maximal ergodic average {0} > 0)")]
    PositiveCycle(f64),

    #[error("critical graph is empty; the potential is not normalized")]
    EmptyAubrySet,

    #[error("matrix has no finite cycle, hence no max-plus eigenvalue")]
    NoEigenvalue,

    #[error("attained branches give inconsistent eigenvector offsets {0} and {1}")]
    InconsistentTie(f64, f64),

    #[error("pressure excess P - h is not positive at beta = {0}")]
    NonPositiveExcess(f64),

    #[error("pressure root not bracketed in [{lo}, {hi}] (log scale)")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("series diverges: perturbation {a_beta} >= pressure {pressure}")]
    DivergentSeries { a_beta: f64, pressure: f64 },
}
