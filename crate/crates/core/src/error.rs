use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A frequency outside the cutoff band reached the spectrum. This is a
    /// quadrature-bound bug, not a physical condition.
    #[error("frequency {omega} outside cutoff band [{lo}, {hi}]")]
    FrequencyOutOfBand { omega: f64, lo: f64, hi: f64 },

    #[error("position {position} outside fiber [0, {length}]")]
    PositionOutOfRange { position: f64, length: f64 },

    #[error(
        "sequence degenerates to free evolution; use Free explicitly \
         (density {density} over length {length} rounds to zero pulses)"
    )]
    DegenerateSequence { density: f64, length: f64 },

    #[error("pulse positions must be strictly increasing inside (0, {length})")]
    InvalidPositions { length: f64 },

    #[error(
        "quadrature did not converge: estimate {estimate:e}, achieved error {achieved:e} \
         after {panels} panels"
    )]
    NotConverged {
        estimate: f64,
        achieved: f64,
        panels: usize,
    },

    #[error("evaluation at L = {length} failed: {reason}")]
    PointFailed { length: f64, reason: String },

    #[error("eigenvalue solver failed on a 4x4 concurrence matrix")]
    EigenSolver,

    #[error("invalid two-qubit state: {0}")]
    InvalidState(String),

    #[error("state file line {line}: {message}")]
    StateParse { line: usize, message: String },

    #[error("Monte Carlo configuration: {0}")]
    MonteCarlo(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
