//! Crate error type.

use thiserror::Error;

/// Everything that can go wrong when constructing or combining the domain
/// types. Validation failures carry the observed deviation so callers can
/// tell a genuine mistake from a marginal tolerance miss.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max |m - m†| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue = {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("trace is {trace:.12} but must be 1")]
    TraceNotOne { trace: f64 },

    #[error("state vector norm is {norm:.12} but must be 1")]
    NotNormalized { norm: f64 },

    #[error("probabilities must be nonnegative and sum to 1 (sum = {sum:.12})")]
    InvalidDistribution { sum: f64 },

    #[error("supplied vectors are not an orthonormal basis (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("Kraus operators are not trace preserving (max |ΣK†K - I| = {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("measurement effects do not sum to identity (max deviation {deviation:.3e})")]
    IncompleteMeasurement { deviation: f64 },

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("Alice marginal p(a={a}|x={x}) = {value:.3e} is too small to condition on")]
    ZeroMarginal { a: usize, x: usize, value: f64 },

    #[error("operation requires total dimension ≤ 6, got {0}")]
    UnsupportedDimension(usize),

    #[error("state is entangled; operation is defined for separable inputs")]
    EntangledInput,

    #[error("state is not Bell diagonal (|a| = {a_norm:.3e}, |b| = {b_norm:.3e})")]
    NotBellDiagonal { a_norm: f64, b_norm: f64 },

    #[error("reference vector is not entangled")]
    NotEntangled,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("search produced no finite objective value")]
    SearchFailed,

    #[error("malformed input: {0}")]
    Schema(String),
}
