//! Numerical tolerances shared by every module.
//!
//! Kept in one place so that validation, tests and experiment metadata all
//! agree on what "equal", "Hermitian" and "positive" mean.

/// Entry-wise Hermiticity slack for density matrices.
pub const HERMITICITY: f64 = 1e-12;

/// Allowed deviation of the trace from one.
pub const TRACE: f64 = 1e-12;

/// Eigenvalues down to `-PSD_SLACK` are accepted as zero.
pub const PSD_SLACK: f64 = 1e-10;

/// Allowed asymmetry `|F(a, b) - F(b, a)|` of the Uhlmann fidelity.
pub const FIDELITY_SYMMETRY: f64 = 1e-10;

/// Unit-norm slack for state vectors.
pub const NORM: f64 = 1e-12;

/// Default magnitude above which an off-diagonal entry counts as a present mode.
pub const MODE_THRESHOLD: f64 = 1e-14;

/// Smallest eigenvalue a state must exceed to be called full rank.
pub const FULL_RANK: f64 = 1e-12;

/// Eigenvalues below this are dropped when a state is split into a pure ensemble.
pub const ENSEMBLE_CUTOFF: f64 = 1e-15;

/// Equality tolerance between the dense and ensemble / closed-form paths.
pub const PATH_AGREEMENT: f64 = 1e-12;

/// Covariance defect below which a circuit is considered exactly energy conserving.
pub const COVARIANCE: f64 = 1e-12;
