use thiserror::Error;

use crate::model::Vacuum;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The D-orbit law involves `ln(phi^2)` and `ln(psi^2)`.
    #[error("orbit law is singular at phi = {phi}, psi = {psi}")]
    OrbitDomain { phi: f64, psi: f64 },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("field blow-up at step {step} (t = {t})")]
    BlowUp { step: usize, t: f64 },

    #[error("unclassifiable state: {0}")]
    Unclassifiable(String),

    #[error("vacua {0} and {1} are not adjacent; state holds more than one soliton")]
    MultiSoliton(Vacuum, Vacuum),

    #[error("soliton tracking is ambiguous: {0}")]
    TrackingAmbiguous(String),

    #[error("invalid pump: {0}")]
    InvalidPump(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad input or
    /// a state that cannot be classified).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence(_) | Error::BlowUp { .. })
    }

    pub fn is_classification(&self) -> bool {
        matches!(
            self,
            Error::Unclassifiable(_) | Error::MultiSoliton(..) | Error::TrackingAmbiguous(_)
        )
    }
}
