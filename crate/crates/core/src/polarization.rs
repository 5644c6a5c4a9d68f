//! Polarization states on C^2, Hermitian observables, and weak values.
//!
//! A weak value is the normalized matrix element
//! ⟨A⟩_w = ⟨ψf|A|ψi⟩ / ⟨ψf|ψi⟩ of an observable between a pre-selected state
//! |ψi⟩ and a post-selected state |ψf⟩. Unlike an expectation value it can be
//! complex and its real part can leave the observable's spectrum; for a
//! projector, |Re| > 1 is the anomalous regime. When two observables are
//! measured in sequence, the analogous quantity for the pair carries the
//! second-measured operator on the left: ⟨B A⟩_w for A first, then B.

use core::fmt;

use num_complex::Complex64;

use crate::defaults::{HERMITICITY_TOL, NORM_EPSILON, OVERLAP_EPSILON};
use crate::error::{ensure_finite, Error, Result};

/// A normalized pure polarization state a|H⟩ + b|V⟩.
///
/// Constructors normalize, so downstream algebra can assume unit norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarizationState {
    amp_h: Complex64,
    amp_v: Complex64,
}

impl PolarizationState {
    /// Builds a state from H and V amplitudes, normalizing them.
    ///
    /// Errors if either amplitude is non-finite or both are zero.
    pub fn new(amp_h: Complex64, amp_v: Complex64) -> Result<Self> {
        for (c, what) in [(amp_h, "amp_h"), (amp_v, "amp_v")] {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite { what });
            }
        }
        let norm_sqr = amp_h.norm_sqr() + amp_v.norm_sqr();
        if norm_sqr < NORM_EPSILON {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / libm::sqrt(norm_sqr);
        Ok(Self {
            amp_h: amp_h * inv,
            amp_v: amp_v * inv,
        })
    }

    /// |H⟩.
    pub fn horizontal() -> Self {
        Self {
            amp_h: Complex64::new(1.0, 0.0),
            amp_v: Complex64::new(0.0, 0.0),
        }
    }

    /// |V⟩.
    pub fn vertical() -> Self {
        Self {
            amp_h: Complex64::new(0.0, 0.0),
            amp_v: Complex64::new(1.0, 0.0),
        }
    }

    pub fn amp_h(&self) -> Complex64 {
        self.amp_h
    }

    pub fn amp_v(&self) -> Complex64 {
        self.amp_v
    }

    /// Inner product ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amp_h.conj() * other.amp_h + self.amp_v.conj() * other.amp_v
    }

    /// The orthogonal companion state: (a, b) -> (-b*, a*), so that
    /// ⟨perp|self⟩ = 0. For cos θ|H⟩ + sin θ|V⟩ this is
    /// -sin θ|H⟩ + cos θ|V⟩.
    pub fn perp(&self) -> Self {
        Self {
            amp_h: -self.amp_v.conj(),
            amp_v: self.amp_h.conj(),
        }
    }

    /// Whether both amplitudes are real (up to the construction tolerance),
    /// i.e. the state is a linear polarization.
    pub fn is_linear(&self) -> bool {
        self.amp_h.im.abs() < 1e-12 && self.amp_v.im.abs() < 1e-12
    }
}

impl fmt::Display for PolarizationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:+.6}{:+.6}i)|H> + ({:+.6}{:+.6}i)|V>",
            self.amp_h.re, self.amp_h.im, self.amp_v.re, self.amp_v.im
        )
    }
}

/// Linear polarization cos θ|H⟩ + sin θ|V⟩ at angle θ from horizontal.
pub fn linear_state(theta: f64) -> Result<PolarizationState> {
    ensure_finite(theta, "theta")?;
    Ok(PolarizationState {
        amp_h: Complex64::new(libm::cos(theta), 0.0),
        amp_v: Complex64::new(libm::sin(theta), 0.0),
    })
}

/// A Hermitian observable on C^2, stored as a full 2x2 complex matrix in the
/// {|H⟩, |V⟩} basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observable2x2 {
    m: [[Complex64; 2]; 2],
}

impl Observable2x2 {
    /// Builds an observable from its matrix, rejecting non-Hermitian input.
    pub fn from_matrix(m: [[Complex64; 2]; 2]) -> Result<Self> {
        for row in &m {
            for c in row {
                if !(c.re.is_finite() && c.im.is_finite()) {
                    return Err(Error::NonFinite {
                        what: "matrix element",
                    });
                }
            }
        }
        let residual = libm::fmax(
            libm::fmax(m[0][0].im.abs(), m[1][1].im.abs()),
            (m[0][1] - m[1][0].conj()).norm(),
        );
        if residual > HERMITICITY_TOL {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self { m })
    }

    /// Rank-one projector |s⟩⟨s| onto a (normalized) state.
    pub fn projector(state: &PolarizationState) -> Self {
        let h = state.amp_h();
        let v = state.amp_v();
        Self {
            m: [[h * h.conj(), h * v.conj()], [v * h.conj(), v * v.conj()]],
        }
    }

    /// The identity observable.
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            m: [[one, zero], [zero, one]],
        }
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.m
    }

    /// Matrix element ⟨bra|M|ket⟩.
    pub fn matrix_element(&self, bra: &PolarizationState, ket: &PolarizationState) -> Complex64 {
        let b = [bra.amp_h().conj(), bra.amp_v().conj()];
        let k = [ket.amp_h(), ket.amp_v()];
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, bi) in b.iter().enumerate() {
            for (j, kj) in k.iter().enumerate() {
                acc += bi * self.m[i][j] * kj;
            }
        }
        acc
    }

    /// Expectation value ⟨s|M|s⟩. Real because M is Hermitian.
    pub fn expectation(&self, state: &PolarizationState) -> f64 {
        self.matrix_element(state, state).re
    }
}

/// A weak value: a complex scalar whose real part is the first-order pointer
/// readout. `is_anomalous` flags real parts outside the unit interval that
/// bounds projector expectation values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakValue(Complex64);

impl WeakValue {
    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn re(&self) -> f64 {
        self.0.re
    }

    pub fn im(&self) -> f64 {
        self.0.im
    }

    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }

    /// True when |Re| exceeds 1, outside the spectrum of any projector.
    pub fn is_anomalous(&self) -> bool {
        self.0.re.abs() > 1.0
    }
}

impl fmt::Display for WeakValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+.6}{:+.6}i", self.0.re, self.0.im)?;
        if self.is_anomalous() {
            write!(f, " (anomalous)")?;
        }
        Ok(())
    }
}

fn postselection_overlap(pre: &PolarizationState, post: &PolarizationState) -> Result<Complex64> {
    let s = post.inner(pre);
    let overlap = s.norm_sqr();
    if overlap < OVERLAP_EPSILON {
        return Err(Error::DegeneratePostselection { overlap });
    }
    Ok(s)
}

/// Weak value ⟨post|obs|pre⟩ / ⟨post|pre⟩.
///
/// Errors when pre and post are orthogonal within the overlap threshold.
/// For pre == post this reduces to the ordinary expectation value.
pub fn weak_value(
    obs: &Observable2x2,
    pre: &PolarizationState,
    post: &PolarizationState,
) -> Result<WeakValue> {
    let s = postselection_overlap(pre, post)?;
    Ok(WeakValue(obs.matrix_element(post, pre) / s))
}

/// Sequential weak value of a measured-in-order pair:
/// ⟨post|obs_second · obs_first|pre⟩ / ⟨post|pre⟩.
///
/// The operator measured second in time sits on the left, adjacent to the
/// post-selection. For commuting observables the order is immaterial.
pub fn sequential_weak_value(
    obs_first: &Observable2x2,
    obs_second: &Observable2x2,
    pre: &PolarizationState,
    post: &PolarizationState,
) -> Result<WeakValue> {
    let s = postselection_overlap(pre, post)?;
    let a = obs_second.matrix();
    let b = obs_first.matrix();
    let mut prod = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for (k, bk) in b.iter().enumerate() {
                prod[i][j] += a[i][k] * bk[j];
            }
        }
    }
    let bra = [post.amp_h().conj(), post.amp_v().conj()];
    let ket = [pre.amp_h(), pre.amp_v()];
    let mut num = Complex64::new(0.0, 0.0);
    for (i, bi) in bra.iter().enumerate() {
        for (j, kj) in ket.iter().enumerate() {
            num += bi * prod[i][j] * kj;
        }
    }
    Ok(WeakValue(num / s))
}
