//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// sigma_p(y) failed to solve; reports the probed point and a condition
    /// estimate when one is available. Signals an (A2) violation.
    #[error("singular asset volatility matrix at y = {y:?} (condition ~ {cond:.3e})")]
    SingularMatrix { y: Vec<f64>, cond: f64 },

    /// psi(u) requested at or beyond the exponential-moment abscissa.
    #[error("claim moment breach: psi({u}) requested but finite only for u < {u_max}")]
    MomentDomain { u: f64, u_max: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid error: {0}")]
    Grid(String),

    /// Queried a surface outside its space-time domain.
    #[error("point (t = {t}, y = {y:?}) outside the solved domain")]
    OutOfDomain { t: f64, y: Vec<f64> },

    /// A surface that must stay positive crossed zero.
    #[error("positivity violation in surface `{surface}` at time step {step}")]
    Positivity { surface: &'static str, step: usize },

    #[error("linear solver failure: {0}")]
    SolverFailure(String),

    /// More than the clamp budget of path steps left the surface grid.
    #[error(
        "solved domain too small for the path envelope: {clamped} of {total} steps clamped \
         (budget {budget_percent}%)"
    )]
    DomainTooSmall {
        clamped: u64,
        total: u64,
        budget_percent: f64,
    },

    /// Log-space accumulation exceeded the exp overflow guard.
    #[error("exponential overflow guard tripped: log value {log_value:.1} exceeds 700")]
    Overflow { log_value: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
