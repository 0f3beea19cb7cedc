//! Numerical tolerances, centralised so every validation site agrees on what
//! "equal", "positive" and "nonzero" mean.

/// Hermiticity check: max entrywise deviation between `m` and `m†`.
pub const HERMITIAN: f64 = 1e-10;

/// Positive semidefiniteness: eigenvalues may undershoot zero by this much.
pub const PSD: f64 = 1e-9;

/// Singular values below this do not count towards an operator Schmidt rank.
pub const RANK: f64 = 1e-7;

/// Unit-trace check for density operators.
pub const TRACE: f64 = 1e-10;

/// Norm check for pure state vectors.
pub const PURE_NORM: f64 = 1e-12;

/// Kraus completeness and measurement completeness: `Σ K†K = I`, `Σ M = I`.
pub const COMPLETENESS: f64 = 1e-10;

/// Box entries may undershoot zero by this much.
pub const BOX_ENTRY: f64 = 1e-12;

/// Per-setting box normalisation.
pub const BOX_NORM: f64 = 1e-10;

/// No-signaling marginal consistency across the other party's settings.
pub const NO_SIGNALING: f64 = 1e-9;

/// Alice marginals below this cannot be conditioned on.
pub const ZERO_MARGINAL: f64 = 1e-12;

/// Eigenvalues below this contribute zero to an entropy.
pub const ENTROPY_SUPPORT: f64 = 1e-12;

/// Witness values above this are treated as certifying (nonzero).
pub const WITNESS: f64 = 1e-6;

/// Fit residuals at or below this mean "model found".
pub const FIT_RESIDUAL: f64 = 1e-6;

/// Discord below this many bits is treated as zero when classifying.
pub const DISCORD_ZERO: f64 = 1e-6;

/// Local polytope membership distance.
pub const POLYTOPE: f64 = 1e-9;

/// Bell-diagonal validation: local Bloch vectors must be this small.
pub const BELL_DIAGONAL: f64 = 1e-8;
