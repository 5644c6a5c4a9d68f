//! End-to-end experiment orchestration: θ sweeps over the two-coupling
//! protocol in three fidelity modes.
//!
//! - **analytic**: first-order weak-value formulas only (no pointer state);
//! - **exact**: full pointer evolution, closed-form moments, inversion;
//! - **sampled**: exact field, pixelated detection with Monte Carlo photon
//!   counting over repeated frames, moment estimation with uncertainties,
//!   inversion with first-order error propagation.

use seqweak::detector::{
    estimate_moments, mean_moment_covariance, sample_frame, DetectionFrame, DetectorConfig,
};
use seqweak::pointer::{initial_state, PointerField};
use seqweak::polarization::PolarizationState;
use seqweak::weakform::{
    analytic_refs, exact_protocol_moments, invert_moments, invert_with_covariance,
    protocol_weak_values, AnalyticRefs, CouplingConfig, Measured,
};

use crate::{HarnessError, Result};

/// How faithfully to simulate each sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// First-order weak-value predictions, no pointer state.
    Analytic,
    /// Exact pointer evolution and closed-form moments.
    Exact,
    /// Exact field plus pixelated Monte Carlo detection over frames.
    Sampled,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Exact => "exact",
            Mode::Sampled => "sampled",
        }
    }
}

impl core::str::FromStr for Mode {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Mode::Analytic),
            "exact" => Ok(Mode::Exact),
            "sampled" => Ok(Mode::Sampled),
            other => Err(HarnessError::SpecParse(format!(
                "unknown mode {other:?}; expected analytic, exact, or sampled"
            ))),
        }
    }
}

impl core::fmt::Display for Mode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full description of one sweep experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub pre: PolarizationState,
    pub post: PolarizationState,
    /// Measurement angles θ of the first (x-coupled) projector, in radians.
    pub theta_grid: Vec<f64>,
    pub g_x: f64,
    pub g_y: f64,
    pub sigma: f64,
    /// Required for sampled mode; ignored by the other modes.
    pub detector: Option<DetectorConfig>,
    /// Photons per frame in sampled mode.
    pub n_signal_photons: u64,
    /// Frames per sweep point in sampled mode (≥ 2 for uncertainties).
    pub n_frames: usize,
    pub mode: Mode,
}

impl ExperimentSpec {
    /// Checks grid, couplings, and mode-specific requirements.
    pub fn validate(&self) -> Result<()> {
        if self.theta_grid.is_empty() {
            return Err(HarnessError::EmptyGrid);
        }
        self.coupling_config(self.theta_grid[0]).validate()?;
        if self.mode == Mode::Sampled {
            match &self.detector {
                None => return Err(HarnessError::MissingDetector),
                Some(d) => d.validate()?,
            }
        }
        if !(self.pre.is_linear() && self.post.is_linear()) {
            // Analytic reference columns and the moment inversion both rest
            // on real weak values, which linear polarizations guarantee.
            return Err(HarnessError::NonlinearStates);
        }
        Ok(())
    }

    /// The protocol configuration at one measurement angle.
    pub fn coupling_config(&self, theta: f64) -> CouplingConfig {
        CouplingConfig {
            pre: self.pre,
            post: self.post,
            theta,
            g_x: self.g_x,
            g_y: self.g_y,
            sigma: self.sigma,
        }
    }

    /// Human-readable caution when the couplings are too strong for the
    /// first-order readout to be trustworthy.
    pub fn weakness_warning(&self) -> Option<String> {
        let cfg = self.coupling_config(self.theta_grid.first().copied().unwrap_or(0.0));
        if cfg.is_weak() {
            None
        } else {
            Some(format!(
                "couplings are not weak (max(|g_x|,|g_y|)/sigma = {:.3} > {}); \
                 first-order weak-value inversion will be biased",
                cfg.weakness_ratio(),
                seqweak::defaults::WEAKNESS_WARN_RATIO,
            ))
        }
    }
}

/// Whether a sweep point produced numbers or hit a degenerate
/// post-selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// Post-selection (nearly) orthogonal to everything that survives the
    /// couplings at this angle; weak values are undefined here.
    Degenerate,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Degenerate => "degenerate",
        }
    }
}

impl core::str::FromStr for RowStatus {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(RowStatus::Ok),
            "degenerate" => Ok(RowStatus::Degenerate),
            other => Err(HarnessError::TableParse(format!(
                "unknown row status {other:?}"
            ))),
        }
    }
}

/// One sweep point: recovered weak values with uncertainties next to the
/// analytic first-order references.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub theta: f64,
    pub pi_psi: Measured,
    pub pi_v: Measured,
    pub seq: Measured,
    pub analytic: AnalyticRefs,
    pub postselect_prob: f64,
    pub status: RowStatus,
}

impl SweepRow {
    fn degenerate(theta: f64) -> Self {
        let nan = Measured {
            value: f64::NAN,
            stderr: f64::NAN,
        };
        SweepRow {
            theta,
            pi_psi: nan,
            pi_v: nan,
            seq: nan,
            analytic: AnalyticRefs {
                pi_psi: f64::NAN,
                pi_v: f64::NAN,
                seq: f64::NAN,
            },
            postselect_prob: f64::NAN,
            status: RowStatus::Degenerate,
        }
    }
}

/// Largest absolute deviation of each recovered quantity from its analytic
/// reference, over the non-degenerate rows of a sweep.
#[derive(Debug, Clone, Copy, Default)]
pub struct SweepSummary {
    pub max_dev_pi_psi: f64,
    pub max_dev_pi_v: f64,
    pub max_dev_seq: f64,
    pub degenerate_rows: usize,
}

/// All rows of a θ sweep plus summary statistics.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
    pub mode: Mode,
}

/// Builds the post-selected pointer field for one configuration: V-projector
/// coupling on y, then θ-projector coupling on x, then post-selection.
pub fn protocol_field(cfg: &CouplingConfig) -> seqweak::Result<PointerField> {
    initial_state(&cfg.pre, cfg.sigma)?
        .apply_coupling_v(cfg.g_y)?
        .apply_coupling_psi(cfg.theta, cfg.g_x)?
        .post_select(&cfg.post)
}

fn is_degenerate(err: &seqweak::Error) -> bool {
    matches!(
        err,
        seqweak::Error::DegeneratePostselection { .. }
            | seqweak::Error::VanishingPostselection { .. }
    )
}

/// Runs a single sweep point. Standalone calls use point index 0 for the
/// sampling streams; [`run_sweep`] numbers its points so every frame of
/// every point draws from a distinct random stream.
pub fn run_point(spec: &ExperimentSpec, theta: f64) -> Result<SweepRow> {
    run_point_indexed(spec, theta, 0)
}

fn run_point_indexed(spec: &ExperimentSpec, theta: f64, point_index: usize) -> Result<SweepRow> {
    let cfg = spec.coupling_config(theta);
    cfg.validate()?;
    let analytic = match analytic_refs(&cfg) {
        Ok(refs) => refs,
        Err(seqweak::Error::NonlinearPolarization) => return Err(HarnessError::NonlinearStates),
        Err(e) if is_degenerate(&e) => return Ok(SweepRow::degenerate(theta)),
        Err(e) => return Err(e.into()),
    };

    let exact =
        |m: seqweak::pointer::Moments| -> seqweak::Result<(Measured, Measured, Measured, f64)> {
            let inv = invert_moments(m.mean_x, m.mean_y, m.raw_xy, cfg.g_x, cfg.g_y)?;
            let zero = |v: f64| Measured {
                value: v,
                stderr: 0.0,
            };
            Ok((
                zero(inv.pi_psi),
                zero(inv.pi_v),
                zero(inv.seq),
                m.postselect_prob,
            ))
        };

    if spec.mode == Mode::Sampled && spec.detector.is_none() {
        return Err(HarnessError::MissingDetector);
    }
    let computed: seqweak::Result<(Measured, Measured, Measured, f64)> = match spec.mode {
        Mode::Analytic => protocol_weak_values(&cfg).map(|wv| {
            let zero = |v: f64| Measured {
                value: v,
                stderr: 0.0,
            };
            let overlap = cfg.post.inner(&cfg.pre).norm_sqr();
            (
                zero(wv.pi_psi.re()),
                zero(wv.pi_v.re()),
                zero(wv.seq.re()),
                overlap,
            )
        }),
        Mode::Exact => exact_protocol_moments(&cfg).and_then(exact),
        Mode::Sampled => (|| {
            let detector = spec.detector.as_ref().expect("checked above");
            let field = protocol_field(&cfg)?;
            let mut frames: Vec<DetectionFrame> = Vec::with_capacity(spec.n_frames);
            for frame_index in 0..spec.n_frames {
                let stream = ((point_index as u64) << 32) | frame_index as u64;
                frames.push(sample_frame(
                    &field,
                    detector,
                    spec.n_signal_photons,
                    stream,
                )?);
            }
            let est = estimate_moments(&frames)?;
            let cov = mean_moment_covariance(&frames)?;
            let (inv, se) = invert_with_covariance(
                [est.mean_x, est.mean_y, est.raw_xy],
                cov,
                cfg.g_x,
                cfg.g_y,
            )?;
            let truth = field.exact_moments()?;
            Ok((
                Measured {
                    value: inv.pi_psi,
                    stderr: se[0],
                },
                Measured {
                    value: inv.pi_v,
                    stderr: se[1],
                },
                Measured {
                    value: inv.seq,
                    stderr: se[2],
                },
                truth.postselect_prob,
            ))
        })(),
    };

    match computed {
        Ok((pi_psi, pi_v, seq, postselect_prob)) => Ok(SweepRow {
            theta,
            pi_psi,
            pi_v,
            seq,
            analytic,
            postselect_prob,
            status: RowStatus::Ok,
        }),
        Err(e) if is_degenerate(&e) => Ok(SweepRow::degenerate(theta)),
        Err(e) => Err(e.into()),
    }
}

/// Runs every point of the θ grid. Individual degenerate angles are flagged
/// in their rows; a sweep where *every* angle is degenerate is a
/// configuration error.
///
/// Sampled-mode streams are derived from (point index, frame index), so the
/// result is deterministic for a fixed spec and independent of any execution
/// order.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.theta_grid.len());
    for (i, &theta) in spec.theta_grid.iter().enumerate() {
        rows.push(run_point_indexed(spec, theta, i)?);
    }
    if rows.iter().all(|r| r.status == RowStatus::Degenerate) {
        return Err(HarnessError::AllRowsDegenerate);
    }
    let summary = summarize(&rows);
    Ok(SweepResult {
        rows,
        summary,
        mode: spec.mode,
    })
}

fn summarize(rows: &[SweepRow]) -> SweepSummary {
    let mut s = SweepSummary::default();
    for row in rows {
        match row.status {
            RowStatus::Degenerate => s.degenerate_rows += 1,
            RowStatus::Ok => {
                s.max_dev_pi_psi = s
                    .max_dev_pi_psi
                    .max((row.pi_psi.value - row.analytic.pi_psi).abs());
                s.max_dev_pi_v = s
                    .max_dev_pi_v
                    .max((row.pi_v.value - row.analytic.pi_v).abs());
                s.max_dev_seq = s.max_dev_seq.max((row.seq.value - row.analytic.seq).abs());
            }
        }
    }
    s
}

/// Ingests externally produced frames: estimates moments, inverts them with
/// propagated uncertainties, and pairs the result with the analytic
/// references of the supplied configuration.
pub fn analyze_frames(cfg: &CouplingConfig, frames: &[DetectionFrame]) -> Result<SweepRow> {
    cfg.validate()?;
    let analytic = match analytic_refs(cfg) {
        Err(seqweak::Error::NonlinearPolarization) => return Err(HarnessError::NonlinearStates),
        other => other?,
    };
    let est = estimate_moments(frames)?;
    let cov = mean_moment_covariance(frames)?;
    let (inv, se) =
        invert_with_covariance([est.mean_x, est.mean_y, est.raw_xy], cov, cfg.g_x, cfg.g_y)?;
    Ok(SweepRow {
        theta: cfg.theta,
        pi_psi: Measured {
            value: inv.pi_psi,
            stderr: se[0],
        },
        pi_v: Measured {
            value: inv.pi_v,
            stderr: se[1],
        },
        seq: Measured {
            value: inv.seq,
            stderr: se[2],
        },
        analytic,
        // Not recoverable from counts alone: detection efficiency and frame
        // normalization are unknown for ingested data.
        postselect_prob: f64::NAN,
        status: RowStatus::Ok,
    })
}

/// Simulates the frames of one sweep point, for writing to frame files.
pub fn simulate_frames(spec: &ExperimentSpec, theta: f64) -> Result<Vec<DetectionFrame>> {
    let detector = spec
        .detector
        .as_ref()
        .ok_or(HarnessError::MissingDetector)?;
    detector.validate()?;
    let cfg = spec.coupling_config(theta);
    cfg.validate()?;
    let field = protocol_field(&cfg)?;
    let mut frames = Vec::with_capacity(spec.n_frames);
    for frame_index in 0..spec.n_frames {
        frames.push(sample_frame(
            &field,
            detector,
            spec.n_signal_photons,
            frame_index as u64,
        )?);
    }
    Ok(frames)
}
