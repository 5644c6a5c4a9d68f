//! TOML experiment-spec files.
//!
//! Schema (all lengths in units of the pointer spread `sigma`; angles in
//! radians):
//!
//! ```toml
//! mode = "exact"              # optional: analytic (default) | exact | sampled
//! sigma = 1.0                 # optional, default 1.0
//! g_x = 0.15                  # optional, default 0.15 * sigma
//! g_y = 0.15                  # optional, default 0.15 * sigma
//! n_signal_photons = 20000    # optional photons per frame, default 20000
//!                             # (50 frames x 20000 = 10^6 per sweep point)
//! n_frames = 50               # optional, default 50 (sampled mode)
//!
//! # States: either an angle or explicit complex H/V amplitude pairs.
//! [pre]
//! theta = 0.9420
//! [post]
//! h = [-0.397, 0.0]           # [re, im]
//! v = [0.918, 0.0]
//!
//! # Measurement-angle grid: a list, an inline range, or absent
//! # (default: 33 points uniform on [0, pi]).
//! theta_grid = { start = 0.0, stop = 3.141592653589793, points = 33 }
//! # theta_grid = [0.0, 0.3, 0.6]
//!
//! # Optional detector section; when absent, sampled mode synthesizes the
//! # default below. origin defaults to centering the grid on the beam axis.
//! [detector]
//! n_pixels = 32               # default 32
//! pixel_pitch = 0.25          # default sigma / 4
//! origin = [-4.0, -4.0]       # default: centered
//! dark_count_prob = 0.0       # default 0
//! n_gates = 0                 # default 0
//! seed = 7                    # default 7
//! ```

use std::path::Path;

use num_complex::Complex64;
use seqweak::defaults::{
    DEFAULT_COUPLING_RATIO, DEFAULT_N_FRAMES, DEFAULT_N_PIXELS, DEFAULT_PHOTONS_PER_FRAME,
    DEFAULT_PITCH_FRACTION, DEFAULT_SIGMA, DEFAULT_THETA_POINTS,
};
use seqweak::detector::DetectorConfig;
use seqweak::polarization::{linear_state, PolarizationState};
use serde::Deserialize;

use crate::harness::{ExperimentSpec, Mode};
use crate::{HarnessError, Result};

/// Default detector seed for spec files that do not set one.
pub const DEFAULT_SEED: u64 = 7;

// The untagged enums delegate to named structs so that `deny_unknown_fields`
// is enforced inside each variant; a stray key in a state or grid table must
// fail the parse instead of being silently ignored (serde does not apply the
// attribute to untagged struct variants directly).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AngleSpec {
    theta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentSpec {
    h: [f64; 2],
    v: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum StateSpec {
    Angle(AngleSpec),
    Components(ComponentSpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RangeSpec {
    start: f64,
    stop: f64,
    points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GridSpec {
    List(Vec<f64>),
    Range(RangeSpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectorSpec {
    n_pixels: Option<usize>,
    pixel_pitch: Option<f64>,
    origin: Option<[f64; 2]>,
    dark_count_prob: Option<f64>,
    n_gates: Option<u64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    pre: StateSpec,
    post: StateSpec,
    theta_grid: Option<GridSpec>,
    mode: Option<String>,
    sigma: Option<f64>,
    g_x: Option<f64>,
    g_y: Option<f64>,
    n_signal_photons: Option<u64>,
    n_frames: Option<usize>,
    detector: Option<DetectorSpec>,
}

fn build_state(spec: &StateSpec) -> Result<PolarizationState> {
    let state = match spec {
        StateSpec::Angle(AngleSpec { theta }) => linear_state(*theta),
        StateSpec::Components(ComponentSpec { h, v }) => {
            PolarizationState::new(Complex64::new(h[0], h[1]), Complex64::new(v[0], v[1]))
        }
    };
    state.map_err(|e| HarnessError::SpecParse(format!("invalid state: {e}")))
}

fn build_grid(spec: Option<&GridSpec>) -> Result<Vec<f64>> {
    match spec {
        None => Ok(uniform_grid(
            0.0,
            core::f64::consts::PI,
            DEFAULT_THETA_POINTS,
        )),
        Some(GridSpec::List(values)) => {
            if values.is_empty() {
                Err(HarnessError::EmptyGrid)
            } else {
                Ok(values.clone())
            }
        }
        Some(GridSpec::Range(RangeSpec {
            start,
            stop,
            points,
        })) => {
            if *points == 0 {
                return Err(HarnessError::EmptyGrid);
            }
            Ok(uniform_grid(*start, *stop, *points))
        }
    }
}

/// `points` values uniformly spaced over `[start, stop]`, endpoints
/// included (a single point sits at `start`).
pub fn uniform_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    (0..points)
        .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
        .collect()
}

/// The detector used when a spec file omits the `[detector]` section:
/// a centered square array covering ±(n/8)·sigma with the default pixel
/// count and pitch, no dark counts.
pub fn default_detector(sigma: f64) -> DetectorConfig {
    DetectorConfig::centered(
        DEFAULT_N_PIXELS,
        sigma * DEFAULT_PITCH_FRACTION,
        DEFAULT_SEED,
    )
}

fn build_detector(spec: Option<&DetectorSpec>, sigma: f64) -> DetectorConfig {
    let base = default_detector(sigma);
    match spec {
        None => base,
        Some(d) => {
            let n_pixels = d.n_pixels.unwrap_or(base.n_pixels);
            let pixel_pitch = d.pixel_pitch.unwrap_or(sigma * DEFAULT_PITCH_FRACTION);
            let seed = d.seed.unwrap_or(DEFAULT_SEED);
            let mut config = DetectorConfig::centered(n_pixels, pixel_pitch, seed);
            if let Some(origin) = d.origin {
                config.origin_offset = (origin[0], origin[1]);
            }
            config.dark_count_prob = d.dark_count_prob.unwrap_or(0.0);
            config.n_gates = d.n_gates.unwrap_or(0);
            config
        }
    }
}

/// Parses a TOML experiment spec from text.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| HarnessError::SpecParse(e.to_string()))?;
    let sigma = raw.sigma.unwrap_or(DEFAULT_SIGMA);
    let mode = match raw.mode.as_deref() {
        None => Mode::Analytic,
        Some(s) => s.parse()?,
    };
    let spec = ExperimentSpec {
        pre: build_state(&raw.pre)?,
        post: build_state(&raw.post)?,
        theta_grid: build_grid(raw.theta_grid.as_ref())?,
        g_x: raw.g_x.unwrap_or(DEFAULT_COUPLING_RATIO * sigma),
        g_y: raw.g_y.unwrap_or(DEFAULT_COUPLING_RATIO * sigma),
        sigma,
        detector: Some(build_detector(raw.detector.as_ref(), sigma)),
        n_signal_photons: raw.n_signal_photons.unwrap_or(DEFAULT_PHOTONS_PER_FRAME),
        n_frames: raw.n_frames.unwrap_or(DEFAULT_N_FRAMES),
        mode,
    };
    spec.validate()?;
    Ok(spec)
}

/// Reads and parses a TOML experiment spec file.
pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_spec(&text)
}
