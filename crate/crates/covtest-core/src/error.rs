use alloc::string::String;
use core::fmt;

/// Everything that can go wrong while building profiles, evaluating
/// statistics, or factoring covariance matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its mathematical domain.
    Domain(String),
    /// The weight band came out below 2, so no off-diagonal weight exists;
    /// the separation radius is too large for the smoothness class.
    DegenerateBand { band: usize },
    /// Two inputs disagree on the dimension p.
    DimensionMismatch { expected: usize, got: usize },
    /// The brute-force evaluator refuses inputs this large.
    SizeGuard { n: usize, p: usize },
    /// A matrix that must be a correlation matrix has a diagonal entry away
    /// from 1 by more than 1e-12. `index` is the offending row.
    NotCorrelation { index: usize },
    /// Cholesky factorization hit a nonpositive pivot, so the matrix is not
    /// positive definite. `pivot` is the failing column (0-based).
    NotPositiveDefinite { pivot: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DegenerateBand { band } => write!(
                f,
                "weight band T = {band} is below 2: no off-diagonal weight exists \
                 (separation radius too large)"
            ),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected p = {expected}, got p = {got}")
            }
            Error::SizeGuard { n, p } => write!(
                f,
                "input too large for the brute-force evaluator: n = {n}, p = {p} \
                 (limits: n <= 50, p <= 100)"
            ),
            Error::NotCorrelation { index } => write!(
                f,
                "not a correlation matrix: diagonal entry {index} deviates from 1 \
                 by more than 1e-12"
            ),
            Error::NotPositiveDefinite { pivot } => write!(
                f,
                "matrix is not positive definite: nonpositive pivot at column {pivot}"
            ),
        }
    }
}

impl core::error::Error for Error {}
