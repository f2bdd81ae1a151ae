use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the analyzer can report.
///
/// Variants are grouped by the layer that raises them; callers generally match
/// on a handful and surface the rest through `Display`.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    // polynomial layer
    #[error("operation is undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("eigenvalue solve did not converge for a degree-{degree} polynomial")]
    RootSolveFailed { degree: usize },

    // transfer functions
    #[error("transfer function is improper: {zeros} zeros but only {poles} poles")]
    Improper { zeros: usize, poles: usize },
    #[error("root list is not conjugate-closed: {root} has no conjugate partner")]
    NotConjugateClosed { root: Complex64 },
    #[error("non-finite {what} in transfer function")]
    NonFinite { what: &'static str },
    #[error("frequency {freq} lies on a pole")]
    PoleEvaluation { freq: f64 },
    #[error("transfer functions live in different time domains")]
    DomainMismatch,

    // system assembly
    #[error("{which} has a root {root} on the stability boundary")]
    BoundaryRoot { which: String, root: Complex64 },
    #[error("G_x is the zero function; it is not right-invertible")]
    ZeroGx,
    #[error("system failed validation: {0}")]
    NotValidated(String),

    // closed-form evaluation
    #[error("shared unstable pole {pole} is not a root of G_x - F G_y numerator")]
    SharedPoleNotCancelled { pole: Complex64 },
    #[error("numerator of G_x - F G_y collapsed to degree {actual}, expected {expected}")]
    DegreeCollapse { expected: usize, actual: usize },
    #[error("{which} has a root at the origin; the 1/w^2-weighted integral is undefined")]
    OriginRoot { which: String },
    #[error("K = K_x makes log|(K_x - K)/K_x| singular{}", direct_value.map(|v| format!(" (collapsed-degree direct evaluation gives {v:.6} bits)")).unwrap_or_default())]
    DegenerateGain { direct_value: Option<f64> },
    #[error("K = 0: log|M| is identically -inf")]
    ZeroGain,
    #[error("precondition not met: {0}")]
    PreconditionUnmet(String),
    #[error("operation needs a {expected} system")]
    WrongDomain { expected: &'static str },

    // quadrature
    #[error("quadrature did not converge within {evaluations} evaluations (error estimate {error_estimate:e})")]
    NotConverged { evaluations: usize, error_estimate: f64 },
    #[error("divergence probe inconclusive: increments {increments:?}")]
    Inconclusive { increments: Vec<f64> },

    // documents
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },
}
