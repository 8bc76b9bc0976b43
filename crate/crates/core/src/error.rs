use thiserror::Error;

/// Errors raised by the library. Numerical verdicts (an inconclusive
/// criterion, a run that completes without blow-up) are data, never errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension must be an integer >= 2, got {0}")]
    InvalidDimension(u32),

    #[error("invalid {name}: {value} ({reason})")]
    InvalidArgument {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("kernel evaluated at the excluded diagonal point r = s, u = 1")]
    SingularPoint,

    #[error("{what}: {fraction:.4} of the mass lies beyond the truncation radius {radius}")]
    Truncation {
        what: &'static str,
        fraction: f64,
        radius: f64,
    },

    #[error("time step {dt:e} fell below dt_min {dt_min:e} at t = {t}")]
    StepCollapse { t: f64, dt: f64, dt_min: f64 },

    #[error("non-finite density in cell {cell} at t = {t}")]
    NonFinite { cell: usize, t: f64 },

    #[error(
        "angular quadrature did not converge at tau = {tau}: {coarse} vs {fine} \
         (relative difference {rel_diff:e} > {tolerance:e})"
    )]
    QuadratureNotConverged {
        tau: f64,
        coarse: f64,
        fine: f64,
        rel_diff: f64,
        tolerance: f64,
    },

    #[error("{0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidArgument {
        name,
        value,
        reason,
    }
}
