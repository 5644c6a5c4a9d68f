//! First-order readout formulas and their inversion.
//!
//! To first order in the coupling-to-spread ratios g/sigma, the post-selected
//! pointer means read out weak values directly:
//!
//! - ⟨X⟩ = g_x Re⟨Π_ψ⟩_w and ⟨Y⟩ = g_y Re⟨Π_V⟩_w;
//! - sequential couplings give
//!   ⟨XY⟩ = (g_x g_y / 2) Re[⟨Π_ψ Π_V⟩_w + ⟨Π_ψ⟩_w* ⟨Π_V⟩_w];
//! - a simultaneous (joint) coupling instead gives
//!   ⟨XY⟩ = (g_x g_y / 4) Re[⟨{Π_ψ, Π_V}⟩_w + 2 ⟨Π_ψ⟩_w* ⟨Π_V⟩_w].
//!
//! This module evaluates those predictions, inverts measured moments back
//! into weak values (with optional error propagation), and quantifies how
//! fast the first-order picture converges to the exact simulation as the
//! couplings weaken: the deviation should scale as (g/sigma)^2.

use alloc::vec::Vec;

use crate::defaults::WEAKNESS_WARN_RATIO;
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::pointer::{initial_state, Moments};
use crate::polarization::{
    linear_state, sequential_weak_value, weak_value, Observable2x2, PolarizationState, WeakValue,
};

/// Full description of one protocol configuration: state preparation,
/// measurement angle, coupling strengths, and pointer spread.
#[derive(Clone, Copy, Debug)]
pub struct CouplingConfig {
    pub pre: PolarizationState,
    pub post: PolarizationState,
    /// Angle of the linear state whose projector is measured second.
    pub theta: f64,
    pub g_x: f64,
    pub g_y: f64,
    pub sigma: f64,
}

impl CouplingConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_finite(self.theta, "theta")?;
        ensure_finite(self.g_x, "g_x")?;
        ensure_finite(self.g_y, "g_y")?;
        ensure_positive(self.sigma, "sigma")
    }

    /// Largest coupling-to-spread ratio, the expansion parameter of the
    /// first-order formulas.
    pub fn weakness_ratio(&self) -> f64 {
        libm::fmax(self.g_x.abs(), self.g_y.abs()) / self.sigma
    }

    /// Whether the configuration is inside the trusted first-order regime.
    /// Callers should warn (not fail) when this is false; the exact
    /// simulation remains valid at any strength.
    pub fn is_weak(&self) -> bool {
        self.weakness_ratio() <= WEAKNESS_WARN_RATIO
    }

    fn pi_psi(&self) -> Result<Observable2x2> {
        Ok(Observable2x2::projector(&linear_state(self.theta)?))
    }

    fn pi_v(&self) -> Observable2x2 {
        Observable2x2::projector(&PolarizationState::vertical())
    }
}

/// The three complex weak values a configuration exposes: the two single
/// projectors and their in-order product (second-measured on the left).
#[derive(Clone, Copy, Debug)]
pub struct ProtocolWeakValues {
    pub pi_psi: WeakValue,
    pub pi_v: WeakValue,
    pub seq: WeakValue,
}

/// Computes the configuration's weak values exactly (no weak approximation;
/// these are pure polarization algebra).
pub fn protocol_weak_values(cfg: &CouplingConfig) -> Result<ProtocolWeakValues> {
    cfg.validate()?;
    let pi_psi = cfg.pi_psi()?;
    let pi_v = cfg.pi_v();
    Ok(ProtocolWeakValues {
        pi_psi: weak_value(&pi_psi, &cfg.pre, &cfg.post)?,
        pi_v: weak_value(&pi_v, &cfg.pre, &cfg.post)?,
        seq: sequential_weak_value(&pi_v, &pi_psi, &cfg.pre, &cfg.post)?,
    })
}

/// Real-valued analytic references for a configuration with linear states.
///
/// Errors with [`Error::NonlinearPolarization`] when either state carries a
/// complex amplitude: the real-part readout identities below assume real
/// weak values, and silently projecting would hide that.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticRefs {
    pub pi_psi: f64,
    pub pi_v: f64,
    pub seq: f64,
}

pub fn analytic_refs(cfg: &CouplingConfig) -> Result<AnalyticRefs> {
    if !(cfg.pre.is_linear() && cfg.post.is_linear()) {
        return Err(Error::NonlinearPolarization);
    }
    let wv = protocol_weak_values(cfg)?;
    Ok(AnalyticRefs {
        pi_psi: wv.pi_psi.re(),
        pi_v: wv.pi_v.re(),
        seq: wv.seq.re(),
    })
}

/// First-order mean displacement g Re⟨A⟩_w of a pointer coupled to an
/// observable with weak value `wv`.
pub fn predict_mean(g: f64, wv: WeakValue) -> f64 {
    g * wv.re()
}

/// First-order joint moment ⟨XY⟩ for the sequential protocol.
pub fn predict_xy_sequential(cfg: &CouplingConfig) -> Result<f64> {
    let wv = protocol_weak_values(cfg)?;
    let val = wv.seq.value() + wv.pi_psi.value().conj() * wv.pi_v.value();
    Ok(0.5 * cfg.g_x * cfg.g_y * val.re)
}

/// Operator-product convention for the simultaneous-coupling formula.
///
/// The readout involves the weak value of a product of the two projectors.
/// `Symmetrized` uses the anticommutator (1/2){Π_ψ, Π_V} — the convention
/// consistent with a simultaneous coupling, and the default. `Literal` keeps
/// the same ordered product twice, i.e. Π_ψ Π_V in both slots; it is exposed
/// so the asymmetric variant of the formula can be evaluated verbatim and
/// compared. The two agree whenever the projectors commute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JointConvention {
    Symmetrized,
    Literal,
}

/// First-order joint moment ⟨XY⟩ for a *simultaneous* weak coupling of the
/// two projectors. Formula-level only: the exact simulator in this crate
/// models sequential couplings, so no exact cross-check exists here.
pub fn predict_xy_joint(cfg: &CouplingConfig, convention: JointConvention) -> Result<f64> {
    cfg.validate()?;
    let pi_psi = cfg.pi_psi()?;
    let pi_v = cfg.pi_v();
    let wv = protocol_weak_values(cfg)?;
    // ⟨Π_ψ Π_V⟩_w and ⟨Π_V Π_ψ⟩_w. The first argument is the right factor.
    let ab = sequential_weak_value(&pi_v, &pi_psi, &cfg.pre, &cfg.post)?;
    let product_term = match convention {
        JointConvention::Symmetrized => {
            let ba = sequential_weak_value(&pi_psi, &pi_v, &cfg.pre, &cfg.post)?;
            ab.value() + ba.value()
        }
        JointConvention::Literal => 2.0 * ab.value(),
    };
    let val = product_term + 2.0 * wv.pi_psi.value().conj() * wv.pi_v.value();
    Ok(0.25 * cfg.g_x * cfg.g_y * val.re)
}

/// Weak values recovered from measured pointer moments by inverting the
/// first-order readout relations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvertedWeakValues {
    /// Re⟨Π_ψ⟩_w = ⟨X⟩ / g_x.
    pub pi_psi: f64,
    /// Re⟨Π_V⟩_w = ⟨Y⟩ / g_y.
    pub pi_v: f64,
    /// Re⟨Π_ψ Π_V⟩_w = 2⟨XY⟩/(g_x g_y) − (⟨X⟩/g_x)(⟨Y⟩/g_y).
    pub seq: f64,
}

/// Inverts measured moments into weak values. Requires non-zero couplings.
pub fn invert_moments(
    mean_x: f64,
    mean_y: f64,
    raw_xy: f64,
    g_x: f64,
    g_y: f64,
) -> Result<InvertedWeakValues> {
    ensure_finite(mean_x, "mean_x")?;
    ensure_finite(mean_y, "mean_y")?;
    ensure_finite(raw_xy, "raw_xy")?;
    ensure_finite(g_x, "g_x")?;
    ensure_finite(g_y, "g_y")?;
    if g_x == 0.0 || g_y == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let pi_psi = mean_x / g_x;
    let pi_v = mean_y / g_y;
    Ok(InvertedWeakValues {
        pi_psi,
        pi_v,
        seq: 2.0 * raw_xy / (g_x * g_y) - pi_psi * pi_v,
    })
}

/// Inverts moment estimates and propagates their covariance to first order.
///
/// `means` is (⟨X⟩, ⟨Y⟩, ⟨XY⟩) and `cov` the covariance matrix *of those
/// mean estimates* (i.e. already divided by the number of frames). Returns
/// the inverted values and their standard errors in the same order as
/// [`InvertedWeakValues`].
pub fn invert_with_covariance(
    means: [f64; 3],
    cov: [[f64; 3]; 3],
    g_x: f64,
    g_y: f64,
) -> Result<(InvertedWeakValues, [f64; 3])> {
    let inverted = invert_moments(means[0], means[1], means[2], g_x, g_y)?;
    let gxy = g_x * g_y;
    let jac = [
        [1.0 / g_x, 0.0, 0.0],
        [0.0, 1.0 / g_y, 0.0],
        [-means[1] / gxy, -means[0] / gxy, 2.0 / gxy],
    ];
    let mut se = [0.0; 3];
    for (i, row) in jac.iter().enumerate() {
        let mut var = 0.0;
        for (a, ja) in row.iter().enumerate() {
            for (b, jb) in row.iter().enumerate() {
                var += ja * cov[a][b] * jb;
            }
        }
        se[i] = libm::sqrt(libm::fmax(var, 0.0));
    }
    Ok((inverted, se))
}

/// A value with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub stderr: f64,
}

/// The end product of one protocol configuration: recovered weak values with
/// uncertainties next to their analytic references.
#[derive(Clone, Copy, Debug)]
pub struct WeakValueReport {
    pub pi_psi: Measured,
    pub pi_v: Measured,
    pub seq: Measured,
    pub analytic: AnalyticRefs,
}

/// Runs the exact simulation for a configuration and returns the moments of
/// the post-selected pointer density.
pub fn exact_protocol_moments(cfg: &CouplingConfig) -> Result<Moments> {
    cfg.validate()?;
    initial_state(&cfg.pre, cfg.sigma)?
        .apply_coupling_v(cfg.g_y)?
        .apply_coupling_psi(cfg.theta, cfg.g_x)?
        .post_select(&cfg.post)?
        .exact_moments()
}

/// Accepted band for the empirical convergence order of the first-order
/// readout: deviations should scale as (g/sigma)^2.
pub const CONVERGENCE_ORDER_LO: f64 = 1.7;
pub const CONVERGENCE_ORDER_HI: f64 = 2.3;

/// Deviations at or below this floor count as exactly reproduced (the
/// configuration has no second-order error for that quantity) and are
/// excluded from slope fits.
pub const SLOPE_DEV_FLOOR: f64 = 1e-12;

/// Absolute deviation between inverted-exact and analytic weak values at one
/// coupling ratio.
#[derive(Clone, Copy, Debug)]
pub struct ScanRow {
    pub ratio: f64,
    pub dev_pi_psi: f64,
    pub dev_pi_v: f64,
    pub dev_seq: f64,
}

/// Result of a convergence scan: per-ratio deviations, fitted log-log slopes
/// per quantity (None when the quantity shows no deviation to fit), and
/// whether every fittable quantity sits in the expected order-2 band.
#[derive(Clone, Debug)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub slope_pi_psi: Option<f64>,
    pub slope_pi_v: Option<f64>,
    pub slope_seq: Option<f64>,
    pub order_ok: bool,
}

/// Sweeps the coupling-to-spread ratio, runs the exact pipeline at each
/// value with g_x = g_y = ratio * sigma, inverts the exact moments through
/// the first-order relations, and reports the deviation from the analytic
/// weak values. A ratio of zero is the exact limit and contributes zero
/// deviation by definition.
pub fn approximation_error_scan(cfg: &CouplingConfig, ratios: &[f64]) -> Result<ScanReport> {
    cfg.validate()?;
    if ratios.is_empty() {
        return Err(Error::Empty { what: "ratio grid" });
    }
    let refs = analytic_refs(cfg)?;
    let mut rows = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        ensure_finite(ratio, "coupling ratio")?;
        if ratio < 0.0 {
            return Err(Error::NonPositive {
                what: "coupling ratio",
            });
        }
        if ratio == 0.0 {
            rows.push(ScanRow {
                ratio,
                dev_pi_psi: 0.0,
                dev_pi_v: 0.0,
                dev_seq: 0.0,
            });
            continue;
        }
        let g = ratio * cfg.sigma;
        let scaled = CouplingConfig {
            g_x: g,
            g_y: g,
            ..*cfg
        };
        let m = exact_protocol_moments(&scaled)?;
        let inv = invert_moments(m.mean_x, m.mean_y, m.raw_xy, g, g)?;
        rows.push(ScanRow {
            ratio,
            dev_pi_psi: (inv.pi_psi - refs.pi_psi).abs(),
            dev_pi_v: (inv.pi_v - refs.pi_v).abs(),
            dev_seq: (inv.seq - refs.seq).abs(),
        });
    }

    let slope_of = |pick: fn(&ScanRow) -> f64| -> (Option<f64>, bool) {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.ratio > 0.0 && pick(r) > SLOPE_DEV_FLOOR)
            .map(|r| (libm::log(r.ratio), libm::log(pick(r))))
            .collect();
        let any_above = rows.iter().any(|r| pick(r) > SLOPE_DEV_FLOOR);
        if pts.len() < 2 {
            // Nothing to fit. Fine if the quantity never deviated; otherwise
            // the grid cannot certify the convergence order.
            return (None, !any_above);
        }
        let n = pts.len() as f64;
        let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / n, sy / n);
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for (x, y) in &pts {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
        }
        let slope = sxy / sxx;
        (
            Some(slope),
            (CONVERGENCE_ORDER_LO..=CONVERGENCE_ORDER_HI).contains(&slope),
        )
    };

    let (slope_pi_psi, ok_a) = slope_of(|r| r.dev_pi_psi);
    let (slope_pi_v, ok_b) = slope_of(|r| r.dev_pi_v);
    let (slope_seq, ok_c) = slope_of(|r| r.dev_seq);
    Ok(ScanReport {
        rows,
        slope_pi_psi,
        slope_pi_v,
        slope_seq,
        order_ok: ok_a && ok_b && ok_c,
    })
}
