use crate::Vec3;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid atomic state: {0}")]
    InvalidState(String),

    #[error("state is not weak-field-seeking (gF*mF = {0})")]
    NotWeakFieldSeeking(f64),

    #[error("unit parse error: {0}")]
    Unit(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid field model: {0}")]
    Model(String),

    #[error("evaluation inside conductor: distance {distance:.3e} m < guard {guard:.3e} m")]
    InsideConductor { distance: f64, guard: f64 },

    #[error("guide does not form{}", match .threshold {
        Some(t) => format!(": bias exceeds threshold {:.6e} T", t),
        None => String::new(),
    })]
    GuideDoesNotForm { threshold: Option<f64> },

    #[error("no convergence after {iterations} iterations: best point {best:?}, residual {residual:.3e} T")]
    NoConvergence {
        best: Vec3,
        residual: f64,
        iterations: usize,
    },

    #[error("section box intersects the conductor guard")]
    SectionBoxInConductor,

    #[error("static quadrupole limit: modulation amplitude is zero, trap frequency undefined")]
    StaticQuadrupoleLimit,

    #[error("time-average quadrature did not converge (relative change {0:.3e})")]
    Quadrature(f64),

    #[error("potential/temperature mismatch: rejection efficiency {0:.3e}")]
    Sampling(f64),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("lifetime fit: {0}")]
    Fit(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Short machine-readable category, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidState(_) => "invalid-state",
            Error::NotWeakFieldSeeking(_) => "not-weak-field-seeking",
            Error::Unit(_) => "unit",
            Error::Geometry(_) => "geometry",
            Error::Model(_) => "model",
            Error::InsideConductor { .. } => "inside-conductor",
            Error::GuideDoesNotForm { .. } => "guide-does-not-form",
            Error::NoConvergence { .. } => "no-convergence",
            Error::SectionBoxInConductor => "section-box-in-conductor",
            Error::StaticQuadrupoleLimit => "static-quadrupole-limit",
            Error::Quadrature(_) => "quadrature",
            Error::Sampling(_) => "sampling",
            Error::Scenario(_) => "scenario",
            Error::Fit(_) => "fit",
            Error::Io(_) => "io",
        }
    }
}
