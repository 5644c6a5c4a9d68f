//! Shared numerical thresholds and protocol defaults.
//!
//! Tolerances are centralized so that every module rejects degenerate input
//! at the same scale, and so the companion crate can surface identical
//! defaults in its configuration format.

/// Squared-overlap threshold below which pre/post selection counts as
/// orthogonal and weak values are refused.
pub const OVERLAP_EPSILON: f64 = 1e-10;

/// Squared-norm threshold below which a pointer field is treated as vanished.
pub const NORM_EPSILON: f64 = 1e-14;

/// Gaussian centers closer than this (in units of sigma) merge into one term
/// after post-selection.
pub const CENTER_MERGE_TOL: f64 = 1e-12;

/// Residual above which a matrix is rejected as non-Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Coupling-to-spread ratio g/sigma above which the first-order readout
/// formulas are no longer trustworthy. Exceeding it is legitimate (the exact
/// simulation stays valid), so callers warn rather than fail.
pub const WEAKNESS_WARN_RATIO: f64 = 0.5;

/// Default coupling-to-spread ratio for both axes.
pub const DEFAULT_COUPLING_RATIO: f64 = 0.15;

/// Default pointer spread; lengths elsewhere are in these units.
pub const DEFAULT_SIGMA: f64 = 1.0;

/// Default number of pixels per detector axis.
pub const DEFAULT_N_PIXELS: usize = 32;

/// Default pixel pitch as a fraction of sigma.
pub const DEFAULT_PITCH_FRACTION: f64 = 0.25;

/// Default number of detection frames per sweep point.
pub const DEFAULT_N_FRAMES: usize = 50;

/// Default detected signal photons per frame. Together with
/// [`DEFAULT_N_FRAMES`] this budgets 10^6 detected photons per sweep point.
pub const DEFAULT_PHOTONS_PER_FRAME: u64 = 20_000;

/// Default number of measurement-angle grid points on [0, pi].
pub const DEFAULT_THETA_POINTS: usize = 33;

/// Default bootstrap resample count for moment standard errors.
pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 1000;
