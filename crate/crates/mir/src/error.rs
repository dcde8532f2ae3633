use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter {name}={value}: {reason}")]
    BadParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// An autoregressive polynomial has a root on or inside the unit circle.
    #[error("autoregressive polynomial is not causal (root of modulus {modulus:.6} <= 1)")]
    UnstableFilter { modulus: f64 },

    /// The input series is too short for the requested operation.
    #[error("series of length {n} is too short: need at least {needed}")]
    SeriesTooShort { n: usize, needed: usize },

    /// No admissible window length exists for this series length and scale count.
    #[error("no feasible window for n={n}, p={p}: need n - 3*p*m >= {min_terms}")]
    InfeasibleWindow { n: usize, p: usize, min_terms: usize },

    /// A matrix that must be positive definite failed its Cholesky factorization.
    #[error("{what} is not positive definite")]
    NotPositiveDefinite { what: &'static str },

    /// Circulant embedding produced eigenvalues too negative to clip away.
    #[error("circulant embedding failed: min eigenvalue {min_eig:.3e} below -{tol:.3e} at size {size}")]
    EmbeddingFailed { min_eig: f64, tol: f64, size: usize },

    /// A coefficient table file does not conform to the expected layout.
    #[error("table format error at line {line}: {msg}")]
    TableFormat { line: usize, msg: String },

    /// Evaluation requested outside the tabulated range.
    #[error("d={d} outside tabulated range [{lo}, {hi}]")]
    TableDomain { d: f64, lo: f64, hi: f64 },

    /// Text that should parse as a model, number, or config did not.
    #[error("parse error: {0}")]
    Parse(String),

    /// A numerical routine failed to reach its target accuracy.
    #[error("numerical failure in {what}: {detail}")]
    Numeric { what: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable identifier used in front-end error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::BadParameter { .. } => "bad-parameter",
            Error::UnstableFilter { .. } => "unstable-filter",
            Error::SeriesTooShort { .. } => "series-too-short",
            Error::InfeasibleWindow { .. } => "infeasible-window",
            Error::NotPositiveDefinite { .. } => "not-positive-definite",
            Error::EmbeddingFailed { .. } => "embedding-failed",
            Error::TableFormat { .. } => "table-format",
            Error::TableDomain { .. } => "table-domain",
            Error::Parse(_) => "parse",
            Error::Numeric { .. } => "numeric",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
