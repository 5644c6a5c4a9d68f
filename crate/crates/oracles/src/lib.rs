//! Independent numerical oracles for validating the simulator crates.
//!
//! Everything in here is deliberately written from first principles —
//! adaptive Gauss–Kronrod quadrature, plain rejection sampling, textbook
//! chi-square statistics — and shares no code with the crates under test.
//! Test suites compare simulator output against these slower but
//! straightforward references.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// One Gaussian term of a two-dimensional pointer field, described by raw
/// numbers so this crate stays independent of the simulator's types.
#[derive(Debug, Clone, Copy)]
pub struct OracleTerm {
    pub amp_re: f64,
    pub amp_im: f64,
    pub center_x: f64,
    pub center_y: f64,
}

/// Normalized one-dimensional Gaussian *amplitude* centered at zero:
/// `(2 pi sigma^2)^(-1/4) * exp(-z^2 / (4 sigma^2))`, so that the squared
/// modulus integrates to one and has standard deviation `sigma`.
pub fn gaussian_amplitude(z: f64, sigma: f64) -> f64 {
    let norm = (2.0 * core::f64::consts::PI * sigma * sigma).powf(-0.25);
    norm * (-z * z / (4.0 * sigma * sigma)).exp()
}

/// Probability density `|sum_k c_k G(x - a_k) G(y - b_k)|^2` of the field,
/// evaluated pointwise without any algebraic simplification.
pub fn field_density(terms: &[OracleTerm], sigma: f64, x: f64, y: f64) -> f64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for t in terms {
        let g =
            gaussian_amplitude(x - t.center_x, sigma) * gaussian_amplitude(y - t.center_y, sigma);
        re += t.amp_re * g;
        im += t.amp_im * g;
    }
    re * re + im * im
}

// ---------------------------------------------------------------------------
// Adaptive Gauss–Kronrod quadrature
// ---------------------------------------------------------------------------

// 15-point Kronrod nodes (absolute values; the rule is symmetric about the
// interval midpoint) and the matching weights, plus the weights of the
// embedded 7-point Gauss rule. Standard published values.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
// Gauss weights pair with the even-indexed entries of `XGK` (indices 1, 3, 5)
// and the midpoint.
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss–Kronrod panel on `[a, b]` for a vector-valued integrand.
/// Returns the 15-point estimate and the componentwise-max difference from
/// the embedded 7-point estimate (the error indicator).
fn gk15_panel<const N: usize>(
    f: &mut impl FnMut(f64) -> [f64; N],
    a: f64,
    b: f64,
) -> ([f64; N], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    for (i, &x) in XGK.iter().enumerate() {
        let (lo, hi);
        if x == 0.0 {
            lo = f(c);
            hi = [0.0; N];
        } else {
            lo = f(c - h * x);
            hi = f(c + h * x);
        }
        for j in 0..N {
            let pair = lo[j] + hi[j];
            kronrod[j] += WGK[i] * pair;
            // Odd indices of XGK (plus the midpoint at i == 7) are the
            // embedded Gauss nodes.
            if i % 2 == 1 {
                gauss[j] += WG[i / 2] * pair;
            } else if i == 7 {
                gauss[j] += WG[3] * pair;
            }
        }
    }
    let mut err: f64 = 0.0;
    for j in 0..N {
        kronrod[j] *= h;
        gauss[j] *= h;
        err = err.max((kronrod[j] - gauss[j]).abs());
    }
    (kronrod, err)
}

fn adaptive_inner<const N: usize>(
    f: &mut impl FnMut(f64) -> [f64; N],
    a: f64,
    b: f64,
    tol: f64,
    err_floor: f64,
    depth: u32,
) -> [f64; N] {
    let (value, err) = gk15_panel(f, a, b);
    let width_floor = 1e-13 * (a.abs() + b.abs() + 1.0);
    // `err_floor` is the roundoff limit of the error indicator; below it,
    // further bisection only multiplies panels without gaining accuracy
    // (halving `tol` forever while the indicator sits at machine noise would
    // make the recursion tree explode).
    if err <= tol.max(err_floor) || (b - a) < width_floor || depth >= 18 {
        return value;
    }
    let mid = 0.5 * (a + b);
    let left = adaptive_inner(f, a, mid, 0.5 * tol, err_floor, depth + 1);
    let right = adaptive_inner(f, mid, b, 0.5 * tol, err_floor, depth + 1);
    let mut out = [0.0; N];
    for j in 0..N {
        out[j] = left[j] + right[j];
    }
    out
}

/// Adaptive Gauss–Kronrod 15(7) quadrature of a vector-valued integrand over
/// `[a, b]` to absolute tolerance `tol` (componentwise, distributed across
/// subdivisions, floored at the roundoff level of the integral's own scale).
pub fn adaptive_gk15<const N: usize>(
    mut f: impl FnMut(f64) -> [f64; N],
    a: f64,
    b: f64,
    tol: f64,
) -> [f64; N] {
    // Probe the whole interval once to learn the magnitude scale; the error
    // indicator cannot resolve below ~1e-15 of that.
    let (probe, _) = gk15_panel(&mut f, a, b);
    let mut scale = 0.0f64;
    for v in probe {
        scale = scale.max(v.abs());
    }
    let err_floor = 1e-15 * (scale + 1.0);
    adaptive_inner(&mut f, a, b, tol, err_floor, 0)
}

/// Scalar convenience wrapper around [`adaptive_gk15`].
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    adaptive_gk15(|x| [f(x)], a, b, tol)[0]
}

/// Raw moment integrals of a two-dimensional Gaussian-mixture density,
/// computed by nested adaptive quadrature with no use of the closed-form
/// pair-overlap algebra the simulator relies on.
///
/// Returns `[mass, integral of x*rho, integral of y*rho, integral of xy*rho]`
/// (unnormalized; divide by `mass` for expectation values).
pub fn field_moment_integrals(terms: &[OracleTerm], sigma: f64, tol: f64) -> [f64; 4] {
    assert!(!terms.is_empty(), "oracle needs at least one term");
    let pad = 10.0 * sigma;
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in terms {
        xmin = xmin.min(t.center_x - pad);
        xmax = xmax.max(t.center_x + pad);
        ymin = ymin.min(t.center_y - pad);
        ymax = ymax.max(t.center_y + pad);
    }
    let inner_tol = tol * 0.05;
    adaptive_gk15::<4>(
        |x| {
            // For fixed x the x-dependent amplitude factors are constants of
            // the inner integral; precompute them per term.
            let gx: Vec<f64> = terms
                .iter()
                .map(|t| gaussian_amplitude(x - t.center_x, sigma))
                .collect();
            let inner = adaptive_gk15::<2>(
                |y| {
                    let mut re = 0.0;
                    let mut im = 0.0;
                    for (t, &gxk) in terms.iter().zip(&gx) {
                        let g = gxk * gaussian_amplitude(y - t.center_y, sigma);
                        re += t.amp_re * g;
                        im += t.amp_im * g;
                    }
                    let d = re * re + im * im;
                    [d, y * d]
                },
                ymin,
                ymax,
                inner_tol,
            );
            [inner[0], x * inner[0], inner[1], x * inner[1]]
        },
        xmin,
        xmax,
        tol,
    )
}

// ---------------------------------------------------------------------------
// Rejection sampling
// ---------------------------------------------------------------------------

/// Pixel-grid geometry for histogramming accepted rejection-sampler draws.
/// Mirrors the detector layout using plain numbers: pixel `(ix, iy)` covers
/// `[origin + i*pitch, origin + (i+1)*pitch)` on each axis and the histogram
/// is row-major (`iy * n_pixels + ix`).
#[derive(Debug, Clone, Copy)]
pub struct SamplerGrid {
    pub n_pixels: usize,
    pub pixel_pitch: f64,
    pub origin_x: f64,
    pub origin_y: f64,
}

/// Result of rejection-sampling a field density inside a bounding box.
#[derive(Debug, Clone)]
pub struct RejectionHistogram {
    /// Accepted draws per pixel, row-major.
    pub pixel_counts: Vec<u64>,
    /// Accepted draws that landed inside the box but outside the pixel grid.
    pub outside_grid: u64,
    /// Total accepted draws (`sum(pixel_counts) + outside_grid`).
    pub accepted: u64,
    /// Total proposal draws, accepted or not.
    pub trials: u64,
}

/// Draw `n_accept` samples from the field density restricted to the box
/// `[box_lo.0, box_hi.0] x [box_lo.1, box_hi.1]` by plain rejection sampling
/// against a constant envelope, and histogram them on `grid`.
///
/// The envelope is the densest value found on a fine scan of the box, padded
/// by 15%; every accepted-or-rejected draw asserts the density never exceeds
/// it, so a bad envelope fails loudly instead of biasing the histogram.
pub fn rejection_histogram(
    terms: &[OracleTerm],
    sigma: f64,
    box_lo: (f64, f64),
    box_hi: (f64, f64),
    n_accept: u64,
    seed: u64,
    grid: &SamplerGrid,
) -> RejectionHistogram {
    assert!(
        box_hi.0 > box_lo.0 && box_hi.1 > box_lo.1,
        "empty sampling box"
    );
    // Envelope scan. 1024 steps per axis resolves features of width sigma
    // comfortably for any box a test will ask for.
    let steps = 1024;
    let mut m = 0.0f64;
    for i in 0..=steps {
        let x = box_lo.0 + (box_hi.0 - box_lo.0) * (i as f64) / (steps as f64);
        for j in 0..=steps {
            let y = box_lo.1 + (box_hi.1 - box_lo.1) * (j as f64) / (steps as f64);
            m = m.max(field_density(terms, sigma, x, y));
        }
    }
    assert!(m > 0.0, "density vanishes on the whole box");
    let envelope = 1.15 * m;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n_pixels;
    let mut pixel_counts = vec![0u64; n * n];
    let mut outside_grid = 0u64;
    let mut accepted = 0u64;
    let mut trials = 0u64;
    while accepted < n_accept {
        trials += 1;
        let x = box_lo.0 + (box_hi.0 - box_lo.0) * rng.random::<f64>();
        let y = box_lo.1 + (box_hi.1 - box_lo.1) * rng.random::<f64>();
        let rho = field_density(terms, sigma, x, y);
        assert!(
            rho <= envelope,
            "rejection envelope violated: {rho} > {envelope}"
        );
        if rng.random::<f64>() * envelope < rho {
            accepted += 1;
            let fx = (x - grid.origin_x) / grid.pixel_pitch;
            let fy = (y - grid.origin_y) / grid.pixel_pitch;
            if fx >= 0.0 && fy >= 0.0 && (fx as usize) < n && (fy as usize) < n {
                pixel_counts[(fy as usize) * n + (fx as usize)] += 1;
            } else {
                outside_grid += 1;
            }
        }
    }
    RejectionHistogram {
        pixel_counts,
        outside_grid,
        accepted,
        trials,
    }
}

// ---------------------------------------------------------------------------
// Chi-square goodness of fit
// ---------------------------------------------------------------------------

/// Outcome of a pooled chi-square goodness-of-fit test.
#[derive(Debug, Clone, Copy)]
pub struct ChiSquareOutcome {
    /// The chi-square statistic over the pooled bins.
    pub statistic: f64,
    /// Degrees of freedom (pooled bin count minus one).
    pub dof: f64,
    /// Upper-tail p-value.
    pub p_value: f64,
    /// Number of bins after pooling.
    pub pooled_bins: usize,
}

/// Upper-tail chi-square p-value: probability that a chi-square variable with
/// `dof` degrees of freedom exceeds `statistic`.
pub fn chi_square_p_value(statistic: f64, dof: f64) -> f64 {
    let dist = ChiSquared::new(dof).expect("positive degrees of freedom");
    1.0 - dist.cdf(statistic)
}

/// Pearson chi-square test of observed counts against expected counts.
///
/// Bins with expectation below `min_expected` are pooled into a single
/// remainder bin (the usual validity condition for the chi-square
/// approximation). Panics if fewer than two pooled bins remain.
pub fn chi_square_test(observed: &[u64], expected: &[f64], min_expected: f64) -> ChiSquareOutcome {
    assert_eq!(observed.len(), expected.len(), "bin count mismatch");
    let mut statistic = 0.0;
    let mut pooled_bins = 0usize;
    let mut pool_obs = 0.0f64;
    let mut pool_exp = 0.0f64;
    for (&o, &e) in observed.iter().zip(expected) {
        assert!(e >= 0.0, "negative expected count");
        if e < min_expected {
            pool_obs += o as f64;
            pool_exp += e;
        } else {
            let d = o as f64 - e;
            statistic += d * d / e;
            pooled_bins += 1;
        }
    }
    if pool_exp > 0.0 {
        let d = pool_obs - pool_exp;
        statistic += d * d / pool_exp;
        pooled_bins += 1;
    }
    assert!(
        pooled_bins >= 2,
        "chi-square test needs at least two pooled bins"
    );
    let dof = (pooled_bins - 1) as f64;
    ChiSquareOutcome {
        statistic,
        dof,
        p_value: chi_square_p_value(statistic, dof),
        pooled_bins,
    }
}
