//! Validation and grouping tolerances used across the toolkit.
//!
//! Every threshold lives here so that the same rule is applied everywhere
//! it is meant to apply. Values are `f64` and are embedded into the working
//! scalar at the call site.

/// Hermiticity defects up to this size are repaired by symmetrizing
/// `(M + M^H)/2`; anything larger is rejected as a user error.
pub const HERMITICITY_REPAIR: f64 = 1e-9;

/// Maximum Hermiticity defect of a validated matrix.
pub const HERMITICITY: f64 = 1e-12;

/// Eigenvalues of a state may dip this far below zero before the matrix is
/// rejected as not positive semidefinite.
pub const PSD_MIN_EIGENVALUE: f64 = -1e-12;

/// Allowed deviation of the trace of a normalized state from one.
pub const TRACE_ONE: f64 = 1e-12;

/// Energy levels closer than `1e-8 * max(1, ||H||)` are grouped into one
/// degenerate level.
pub const LEVEL_GROUPING_REL: f64 = 1e-8;

/// Singular values below `1e-8 * sigma_max` count as zero in every rank
/// computation (derivation spaces, kernels, null spaces).
pub const RANK_CUT_REL: f64 = 1e-8;

/// Commutator norm below which a pair of observables counts as commuting.
pub const COMMUTATOR: f64 = 1e-10;

/// Kernel-membership residual for robustness preconditions.
pub const KERNEL_RESIDUAL: f64 = 1e-10;

/// Equality threshold on functional values in the redundancy quotient.
pub const FUNCTIONAL_EQUALITY: f64 = 1e-10;

/// Equality threshold on moment-map images: ensembles with
/// `||nu1 - nu2||_F` below this are equivalent.
pub const NU_EQUALITY: f64 = 1e-10;

/// Worst allowed violation of spectrum constraints on orbit points and of
/// the majorization check on moment-map images.
pub const ORBIT_SPECTRUM: f64 = 1e-9;

/// Minimal eigenvalue gap below which an adiabatic family is rejected for
/// branch crossing.
pub const BRANCH_CROSSING_GAP: f64 = 1e-6;

/// Leibniz-rule residual (relative to `||D||_F`) below which a matrix is
/// accepted as a derivation.
pub const DERIVATION_RESIDUAL: f64 = 1e-8;

/// Minimal eigenvalue above which a Jordan element counts as a cone member.
pub const CONE_MEMBER_MIN_EIGENVALUE: f64 = -1e-10;

/// Absolute gap under which a Lie-algebra element is treated as having a
/// degenerate spectrum (regular-case operations reject it).
pub const SIMPLE_SPECTRUM_GAP: f64 = 1e-8;
