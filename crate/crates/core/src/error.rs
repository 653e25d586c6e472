use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {value} is outside the tabulated range [{min}, {max}] and extrapolation is disabled")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("step susceptibility is singular at omega = 0")]
    ZeroFrequencySingularity,

    #[error("complex frequency {s} coincides with a pole of the image at {pole}")]
    Pole { s: Complex64, pole: Complex64 },

    #[error("non-passive medium: computed squared coupling {value} at omega = {omega} is negative")]
    Passivity { omega: f64, value: f64 },

    #[error("unphysical dispersion relation: d(omega)/d|k| = {slope} <= 0 at |k| = {k}")]
    UnphysicalDispersion { k: f64, slope: f64 },

    #[error("lossless Lorentz coupling is a spectral line at omega = {omega} with weight {weight}; it cannot be sampled")]
    SpectralLine { omega: f64, weight: f64 },

    #[error("root finding did not converge: {message} (condition estimate {condition:e})")]
    RootFinding { message: String, condition: f64 },

    #[error("image is not strictly proper: numerator degree {numerator} >= denominator degree {denominator}")]
    NotStrictlyProper { numerator: usize, denominator: usize },

    #[error("contour inversion diverged: {0}")]
    Divergence(String),

    #[error("image has poles on the imaginary axis ({pole}); contour inversion cannot converge, use residue inversion instead")]
    ImaginaryAxisPole { pole: Complex64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("longitudinal resonance: omega_k = {omega_k} lies within {distance:e} of a zero of 1 + chi_e at omega = {resonance}")]
    Resonance {
        omega_k: f64,
        resonance: f64,
        distance: f64,
    },

    #[error("grid too coarse: {points_per_period:.1} points per period, at least {required} required")]
    Resolution {
        points_per_period: f64,
        required: f64,
    },

    #[error("decay fit inconclusive: {0}")]
    Inconclusive(String),

    #[error("inconsistent table/model pairing at omega = {omega}: relative mismatch {mismatch:e}")]
    Consistency { omega: f64, mismatch: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
            _ => Error::Parse(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.to_string())
        } else {
            Error::Parse(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
