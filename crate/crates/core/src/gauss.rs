//! One-dimensional Gaussian overlap algebra.
//!
//! Pointer wavepackets are transform-limited Gaussians whose *detection
//! density* has standard deviation sigma, i.e. the amplitude profile is
//! g(z - c) with g(z) = (2 pi sigma^2)^(-1/4) exp(-z^2 / (4 sigma^2)).
//! Products of two such amplitudes reduce to a normal density at the midpoint
//! of the two centers times a displacement-dependent overlap factor, which is
//! all the closed-form moment and pixel integrals need.

/// Overlap integral of two unit-norm amplitudes centered at `u` and `v`:
/// exp(-(u - v)^2 / (8 sigma^2)). Equals 1 at u == v.
pub(crate) fn overlap(u: f64, v: f64, sigma: f64) -> f64 {
    let d = u - v;
    libm::exp(-d * d / (8.0 * sigma * sigma))
}

/// Center of the product of two amplitudes centered at `u` and `v`.
pub(crate) fn product_center(u: f64, v: f64) -> f64 {
    0.5 * (u + v)
}

/// Mass of a normal density with mean `mu` and std `sigma` on [lo, hi].
pub(crate) fn interval_mass(lo: f64, hi: f64, mu: f64, sigma: f64) -> f64 {
    const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
    let a = (lo - mu) / sigma * FRAC_1_SQRT_2;
    let b = (hi - mu) / sigma * FRAC_1_SQRT_2;
    0.5 * (libm::erf(b) - libm::erf(a))
}
