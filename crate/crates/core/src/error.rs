use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("matrix is not Hermitian (max |rho - rho^dag| = {0:.3e})")]
    NotHermitian(f64),

    #[error("trace is {0}, expected 1")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.6e})")]
    NotPositive(f64),

    #[error("Pauli index {0} out of range 0..=3")]
    PauliIndex(usize),

    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),

    #[error("expectation value has imaginary part {0:.3e}")]
    ImaginaryResidue(f64),

    #[error("invalid mode index {mode} for {modes} modes")]
    InvalidMode { mode: usize, modes: usize },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("invalid measurement graph: {0}")]
    InvalidGraph(String),

    #[error("negative radicand {0:.3e} in {1}")]
    NegativeRadicand(f64, &'static str),

    #[error("ill-conditioned moments: root imaginary part {0:.3e}")]
    IllConditionedMoments(f64),

    #[error("route disagreement in {what}: {a} vs {b}")]
    RouteMismatch { what: String, a: f64, b: f64 },

    #[error("plan does not cover required graphs: {0:?}")]
    MissingGraphs(Vec<String>),

    #[error("no representation of {target}: held-out residual {residual:.3e}")]
    Residual { target: String, residual: f64 },

    #[error("estimation setup failed: {0}")]
    Setup(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
