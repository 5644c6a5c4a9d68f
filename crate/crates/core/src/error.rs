use core::fmt;

/// Errors shared by every stage of the measurement pipeline.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// An input that must be finite was NaN or infinite.
    NonFinite { what: &'static str },
    /// An input that must be strictly positive was zero or negative.
    NonPositive { what: &'static str },
    /// An input collection that must be non-empty was empty.
    Empty { what: &'static str },
    /// A state vector with zero norm cannot be normalized.
    ZeroNorm,
    /// A matrix passed as an observable was not Hermitian.
    NotHermitian { residual: f64 },
    /// Pre- and post-selection are (numerically) orthogonal, so weak values
    /// and post-selected fields are undefined.
    DegeneratePostselection { overlap: f64 },
    /// A pointer field has vanishing norm; moments are undefined.
    VanishingPostselection { norm: f64 },
    /// H-V coherence is undefined because the reference amplitude product
    /// amp_h * conj(amp_v) vanishes.
    UndefinedCoherence,
    /// Moment inversion requires non-zero coupling strengths.
    ZeroCoupling,
    /// A probability was outside [0, 1].
    InvalidProbability { value: f64 },
    /// Background-corrected counts carry no usable signal.
    NoSignal,
    /// Frames passed to an estimator have mismatched detector geometry.
    InconsistentFrames,
    /// Moment inversion is only defined for linear (real-amplitude)
    /// polarization states; refusing rather than silently projecting.
    NonlinearPolarization,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { what } => write!(f, "{what} must be finite"),
            Error::NonPositive { what } => write!(f, "{what} must be positive"),
            Error::Empty { what } => write!(f, "{what} must be non-empty"),
            Error::ZeroNorm => write!(f, "state vector has zero norm"),
            Error::NotHermitian { residual } => {
                write!(f, "matrix is not Hermitian (residual {residual:e})")
            }
            Error::DegeneratePostselection { overlap } => write!(
                f,
                "pre- and post-selection are orthogonal (squared overlap {overlap:e})"
            ),
            Error::VanishingPostselection { norm } => {
                write!(f, "pointer field norm {norm:e} is too small for moments")
            }
            Error::UndefinedCoherence => {
                write!(f, "H-V coherence undefined: a reference amplitude is zero")
            }
            Error::ZeroCoupling => write!(f, "coupling strengths must be non-zero"),
            Error::InvalidProbability { value } => {
                write!(f, "probability {value} is outside [0, 1]")
            }
            Error::NoSignal => write!(f, "background-corrected counts carry no signal"),
            Error::InconsistentFrames => {
                write!(f, "frames have mismatched detector geometry")
            }
            Error::NonlinearPolarization => write!(
                f,
                "moment inversion requires linear (real-amplitude) states"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure_finite(x: f64, what: &'static str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { what })
    }
}

pub(crate) fn ensure_positive(x: f64, what: &'static str) -> Result<()> {
    ensure_finite(x, what)?;
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive { what })
    }
}
