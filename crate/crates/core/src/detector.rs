//! Pixelated detection of the pointer density and moment estimation.
//!
//! A square grid of `n_pixels` x `n_pixels` pixels with pitch `pixel_pitch`
//! samples the post-selected pointer density. Pixel masses are exact
//! closed-form integrals (differences of the Gaussian cumulative function),
//! photon shot noise is multinomial over pixels plus an out-of-aperture bin
//! whose photons are discarded, and every pixel adds dark counts gated
//! binomially over `n_gates` exposures. Moments are estimated from
//! background-corrected counts at pixel centers, frame by frame, with the
//! spread over frames providing the standard error.
//!
//! Sampling is deterministic per (seed, stream): signal and dark counts draw
//! from independent ChaCha streams derived from the config seed, so frames
//! can be generated in any order or in parallel and reproduce bit-for-bit,
//! and switching dark counts on does not perturb the signal draw.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::defaults::NORM_EPSILON;
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::gauss::{interval_mass, overlap, product_center};
use crate::pointer::PointerField;

/// XOR salt separating the dark-count RNG stream from the signal stream.
const DARK_STREAM_SALT: u64 = 0x9e37_79b9_97f4_a7c5;

/// Detector geometry, noise model, and RNG seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorConfig {
    /// Pixels per axis; the grid is square.
    pub n_pixels: usize,
    /// Pixel side length, in the pointer length units.
    pub pixel_pitch: f64,
    /// Pointer coordinates of the low-x, low-y corner of the grid.
    pub origin_offset: (f64, f64),
    /// Probability of a dark count per pixel per gate.
    pub dark_count_prob: f64,
    /// Gated exposures accumulated into one frame.
    pub n_gates: u64,
    /// Master seed; per-frame streams split off it.
    pub seed: u64,
}

impl DetectorConfig {
    /// A grid of `n_pixels` x `n_pixels` centered on the origin, without
    /// dark counts.
    pub fn centered(n_pixels: usize, pixel_pitch: f64, seed: u64) -> Self {
        let half = 0.5 * pixel_pitch * n_pixels as f64;
        Self {
            n_pixels,
            pixel_pitch,
            origin_offset: (-half, -half),
            dark_count_prob: 0.0,
            n_gates: 0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pixels == 0 {
            return Err(Error::NonPositive { what: "n_pixels" });
        }
        ensure_positive(self.pixel_pitch, "pixel_pitch")?;
        ensure_finite(self.origin_offset.0, "origin_offset.x")?;
        ensure_finite(self.origin_offset.1, "origin_offset.y")?;
        if !self.dark_count_prob.is_finite() || !(0.0..=1.0).contains(&self.dark_count_prob) {
            return Err(Error::InvalidProbability {
                value: self.dark_count_prob,
            });
        }
        Ok(())
    }

    /// Center of pixel (ix, iy) in pointer coordinates.
    pub fn pixel_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin_offset.0 + (ix as f64 + 0.5) * self.pixel_pitch,
            self.origin_offset.1 + (iy as f64 + 0.5) * self.pixel_pitch,
        )
    }

    /// Expected dark counts per pixel per frame.
    pub fn dark_expectation(&self) -> f64 {
        self.dark_count_prob * self.n_gates as f64
    }

    fn same_geometry_and_noise(&self, other: &Self) -> bool {
        self.n_pixels == other.n_pixels
            && self.pixel_pitch == other.pixel_pitch
            && self.origin_offset == other.origin_offset
            && self.dark_count_prob == other.dark_count_prob
            && self.n_gates == other.n_gates
    }
}

/// Exact per-pixel detection probabilities for one pointer field, plus the
/// mass falling outside the grid.
#[derive(Clone, Debug)]
pub struct PixelProbabilities {
    n_pixels: usize,
    values: Vec<f64>,
    out_of_aperture: f64,
}

impl PixelProbabilities {
    pub fn n_pixels(&self) -> usize {
        self.n_pixels
    }

    /// Row-major probabilities: index `iy * n_pixels + ix`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.n_pixels + ix]
    }

    /// Probability mass the grid misses; those photons are discarded.
    pub fn out_of_aperture(&self) -> f64 {
        self.out_of_aperture
    }

    pub fn in_aperture(&self) -> f64 {
        1.0 - self.out_of_aperture
    }
}

/// Integrates the normalized detection density over every pixel, in closed
/// form. Each pairwise product of field terms contributes a separable
/// Gaussian, so a pixel's mass is a weighted sum of products of cumulative
/// differences along the two axes.
pub fn pixel_probabilities(
    field: &PointerField,
    config: &DetectorConfig,
) -> Result<PixelProbabilities> {
    config.validate()?;
    let norm = field.norm_squared();
    if norm < NORM_EPSILON {
        return Err(Error::VanishingPostselection { norm });
    }
    let n = config.n_pixels;
    let sigma = field.sigma();
    let mut values = vec![0.0f64; n * n];
    let mut mass_x = vec![0.0f64; n];
    let mut mass_y = vec![0.0f64; n];
    for j in field.terms() {
        for k in field.terms() {
            let w = (j.amplitude.conj() * k.amplitude).re
                * overlap(j.center_x, k.center_x, sigma)
                * overlap(j.center_y, k.center_y, sigma)
                / norm;
            if w == 0.0 {
                continue;
            }
            let mx = product_center(j.center_x, k.center_x);
            let my = product_center(j.center_y, k.center_y);
            for i in 0..n {
                let x_lo = config.origin_offset.0 + i as f64 * config.pixel_pitch;
                let y_lo = config.origin_offset.1 + i as f64 * config.pixel_pitch;
                mass_x[i] = interval_mass(x_lo, x_lo + config.pixel_pitch, mx, sigma);
                mass_y[i] = interval_mass(y_lo, y_lo + config.pixel_pitch, my, sigma);
            }
            for iy in 0..n {
                let row = &mut values[iy * n..(iy + 1) * n];
                let wy = w * mass_y[iy];
                for (v, mx_cell) in row.iter_mut().zip(&mass_x) {
                    *v += wy * mx_cell;
                }
            }
        }
    }
    // Pixels with essentially zero mass can round a hair below zero when
    // cross terms cancel; clamp without disturbing anything measurable.
    let mut total = 0.0;
    for v in &mut values {
        if *v < 0.0 {
            debug_assert!(*v > -1e-12, "pixel mass {v} below rounding tolerance");
            *v = 0.0;
        }
        total += *v;
    }
    Ok(PixelProbabilities {
        n_pixels: n,
        values,
        out_of_aperture: libm::fmax(1.0 - total, 0.0),
    })
}

/// One detector readout: raw counts per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionFrame {
    pub config: DetectorConfig,
    counts: Vec<u64>,
    /// Ground-truth photon budget when simulated; `None` for ingested data.
    pub n_signal_photons: Option<u64>,
}

impl DetectionFrame {
    pub fn new(
        config: DetectorConfig,
        counts: Vec<u64>,
        n_signal_photons: Option<u64>,
    ) -> Result<Self> {
        config.validate()?;
        if counts.len() != config.n_pixels * config.n_pixels {
            return Err(Error::InconsistentFrames);
        }
        Ok(Self {
            config,
            counts,
            n_signal_photons,
        })
    }

    /// Row-major counts: index `iy * n_pixels + ix`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, ix: usize, iy: usize) -> u64 {
        self.counts[iy * self.config.n_pixels + ix]
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Simulates one frame: a multinomial draw of `n_signal_photons` over the
/// pixel probabilities (photons missing the aperture are discarded) plus
/// binomial dark counts per pixel.
///
/// `stream` selects an independent ChaCha stream for this frame, so callers
/// can assign frame indices (or any injective labeling) and generate frames
/// concurrently with bit-exact reproducibility.
pub fn sample_frame(
    field: &PointerField,
    config: &DetectorConfig,
    n_signal_photons: u64,
    stream: u64,
) -> Result<DetectionFrame> {
    let probs = pixel_probabilities(field, config)?;
    let mut signal_rng = ChaCha8Rng::seed_from_u64(config.seed);
    signal_rng.set_stream(stream);
    let mut dark_rng = ChaCha8Rng::seed_from_u64(config.seed ^ DARK_STREAM_SALT);
    dark_rng.set_stream(stream);

    // Conditional-binomial multinomial sampling over pixels; the leftover
    // probability is the out-of-aperture bin, so photons still unassigned
    // after the last pixel simply escape.
    let mut counts = vec![0u64; probs.values().len()];
    let mut remaining = n_signal_photons;
    let mut p_rem = 1.0f64;
    for (c, &p) in counts.iter_mut().zip(probs.values()) {
        if remaining == 0 {
            break;
        }
        let cond = if p_rem > 0.0 {
            (p / p_rem).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let draw = Binomial::new(remaining, cond)
            .expect("conditional probability is clamped to [0, 1]")
            .sample(&mut signal_rng);
        *c = draw;
        remaining -= draw;
        p_rem -= p;
    }

    if config.dark_count_prob > 0.0 && config.n_gates > 0 {
        let dark = Binomial::new(config.n_gates, config.dark_count_prob)
            .expect("dark_count_prob validated to [0, 1]");
        for c in &mut counts {
            *c += dark.sample(&mut dark_rng);
        }
    }

    Ok(DetectionFrame {
        config: *config,
        counts,
        n_signal_photons: Some(n_signal_photons),
    })
}

/// Which pixels of the array are alive. Real photon-counting arrays have
/// dead or hot pixels that get masked out of the analysis; the default is
/// all-alive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    n_pixels: usize,
    alive: Vec<bool>,
}

impl PixelMask {
    /// A mask with every pixel alive.
    pub fn all_alive(n_pixels: usize) -> Self {
        Self {
            n_pixels,
            alive: vec![true; n_pixels * n_pixels],
        }
    }

    /// A mask with the listed `(ix, iy)` pixels marked dead.
    pub fn with_dead(n_pixels: usize, dead: &[(usize, usize)]) -> Result<Self> {
        let mut mask = Self::all_alive(n_pixels);
        for &(ix, iy) in dead {
            if ix >= n_pixels || iy >= n_pixels {
                return Err(Error::InconsistentFrames);
            }
            mask.alive[iy * n_pixels + ix] = false;
        }
        Ok(mask)
    }

    /// Whether pixel `(ix, iy)` records counts.
    pub fn is_alive(&self, ix: usize, iy: usize) -> bool {
        self.alive[iy * self.n_pixels + ix]
    }

    /// Number of pixels per axis this mask covers.
    pub fn n_pixels(&self) -> usize {
        self.n_pixels
    }
}

/// [`sample_frame`] with an optional dead-pixel mask: photons that land on a
/// dead pixel are absorbed without being recorded, and dead pixels produce no
/// dark counts. The random-number streams are consumed identically with or
/// without a mask, so masked and unmasked frames from the same seed share
/// their underlying draws.
pub fn sample_frame_masked(
    field: &PointerField,
    config: &DetectorConfig,
    mask: Option<&PixelMask>,
    n_signal_photons: u64,
    stream: u64,
) -> Result<DetectionFrame> {
    let mut frame = sample_frame(field, config, n_signal_photons, stream)?;
    if let Some(mask) = mask {
        if mask.n_pixels != config.n_pixels {
            return Err(Error::InconsistentFrames);
        }
        for (c, &alive) in frame.counts.iter_mut().zip(&mask.alive) {
            if !alive {
                *c = 0;
            }
        }
    }
    Ok(frame)
}

/// Subtracts the expected dark level `dark_count_prob * n_gates` from every
/// pixel. Deliberately no clamping at zero: clipping negative fluctuations
/// would bias the moments upward in low-count pixels.
pub fn subtract_background(frame: &DetectionFrame) -> Vec<f64> {
    let pedestal = frame.config.dark_expectation();
    frame.counts.iter().map(|&c| c as f64 - pedestal).collect()
}

/// Count-weighted pixel-center moments of one background-corrected frame:
/// (⟨X⟩, ⟨Y⟩, ⟨XY⟩).
///
/// Errors with [`Error::NoSignal`] when the corrected counts sum to zero or
/// below, since the weighted average is then undefined.
pub fn frame_moments(frame: &DetectionFrame) -> Result<[f64; 3]> {
    let corrected = subtract_background(frame);
    let total: f64 = corrected.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::NoSignal);
    }
    let n = frame.config.n_pixels;
    let (mut sx, mut sy, mut sxy) = (0.0, 0.0, 0.0);
    for iy in 0..n {
        for ix in 0..n {
            let w = corrected[iy * n + ix];
            if w == 0.0 {
                continue;
            }
            let (x, y) = frame.config.pixel_center(ix, iy);
            sx += w * x;
            sy += w * y;
            sxy += w * x * y;
        }
    }
    Ok([sx / total, sy / total, sxy / total])
}

/// Per-frame moments for a consistent set of frames, in order.
pub fn per_frame_moments(frames: &[DetectionFrame]) -> Result<Vec<[f64; 3]>> {
    let first = frames.first().ok_or(Error::Empty { what: "frames" })?;
    for f in frames {
        if !f.config.same_geometry_and_noise(&first.config) {
            return Err(Error::InconsistentFrames);
        }
    }
    frames.iter().map(frame_moments).collect()
}

/// Moment estimates pooled over frames, with standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub mean_x: f64,
    pub se_mean_x: f64,
    pub mean_y: f64,
    pub se_mean_y: f64,
    pub raw_xy: f64,
    pub se_raw_xy: f64,
    /// Total raw counts across all frames.
    pub n_events: u64,
    pub n_frames: usize,
}

fn column_mean(rows: &[[f64; 3]]) -> [f64; 3] {
    let n = rows.len() as f64;
    let mut m = [0.0; 3];
    for r in rows {
        for (mi, ri) in m.iter_mut().zip(r) {
            *mi += ri;
        }
    }
    for mi in &mut m {
        *mi /= n;
    }
    m
}

fn column_se(rows: &[[f64; 3]], mean: &[f64; 3]) -> [f64; 3] {
    let n = rows.len();
    if n < 2 {
        return [0.0; 3];
    }
    let mut var = [0.0; 3];
    for r in rows {
        for i in 0..3 {
            let d = r[i] - mean[i];
            var[i] += d * d;
        }
    }
    let scale = 1.0 / ((n - 1) as f64 * n as f64);
    [
        libm::sqrt(var[0] * scale),
        libm::sqrt(var[1] * scale),
        libm::sqrt(var[2] * scale),
    ]
}

/// Pools per-frame moments into point estimates with standard errors of the
/// mean (spread over frames divided by sqrt(n_frames)).
pub fn estimate_moments(frames: &[DetectionFrame]) -> Result<MomentEstimate> {
    let rows = per_frame_moments(frames)?;
    let mean = column_mean(&rows);
    let se = column_se(&rows, &mean);
    Ok(MomentEstimate {
        mean_x: mean[0],
        se_mean_x: se[0],
        mean_y: mean[1],
        se_mean_y: se[1],
        raw_xy: mean[2],
        se_raw_xy: se[2],
        n_events: frames.iter().map(DetectionFrame::total_counts).sum(),
        n_frames: frames.len(),
    })
}

/// Covariance matrix of the pooled moment means across frames (the sample
/// covariance divided by n_frames), for propagating uncertainty through the
/// weak-value inversion with cross-correlations kept.
pub fn mean_moment_covariance(frames: &[DetectionFrame]) -> Result<[[f64; 3]; 3]> {
    let rows = per_frame_moments(frames)?;
    let n = rows.len();
    let mean = column_mean(&rows);
    let mut cov = [[0.0; 3]; 3];
    if n < 2 {
        return Ok(cov);
    }
    for r in rows {
        for a in 0..3 {
            for b in 0..3 {
                cov[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]);
            }
        }
    }
    let scale = 1.0 / ((n - 1) as f64 * n as f64);
    for row in &mut cov {
        for v in row {
            *v *= scale;
        }
    }
    Ok(cov)
}

/// Same point estimates as [`estimate_moments`], but with standard errors
/// from a bootstrap over frames (`resamples` resamples with replacement,
/// seeded independently of the detection streams).
pub fn bootstrap_moments(
    frames: &[DetectionFrame],
    resamples: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    if resamples < 2 {
        return Err(Error::NonPositive {
            what: "bootstrap resamples",
        });
    }
    let rows = per_frame_moments(frames)?;
    let mean = column_mean(&rows);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut resample_means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut acc = [0.0; 3];
        for _ in 0..rows.len() {
            let pick = rows[rng.random_range(0..rows.len())];
            for (a, p) in acc.iter_mut().zip(&pick) {
                *a += p;
            }
        }
        for a in &mut acc {
            *a /= rows.len() as f64;
        }
        resample_means.push(acc);
    }
    let boot_mean = column_mean(&resample_means);
    let mut var = [0.0; 3];
    for r in &resample_means {
        for i in 0..3 {
            let d = r[i] - boot_mean[i];
            var[i] += d * d;
        }
    }
    let scale = 1.0 / (resamples - 1) as f64;
    Ok(MomentEstimate {
        mean_x: mean[0],
        se_mean_x: libm::sqrt(var[0] * scale),
        mean_y: mean[1],
        se_mean_y: libm::sqrt(var[1] * scale),
        raw_xy: mean[2],
        se_raw_xy: libm::sqrt(var[2] * scale),
        n_events: frames.iter().map(DetectionFrame::total_counts).sum(),
        n_frames: frames.len(),
    })
}
