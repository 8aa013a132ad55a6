use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid angular resolution n = {0}: n must be odd and at least 5")]
    InvalidResolution(usize),

    #[error("grid mismatch: expected {expected} angular points, got {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Fourier mode {mode} out of range 1..{limit}")]
    ModeOutOfRange { mode: usize, limit: usize },

    #[error("time step rejected {halvings} times at t = {t}: density stays negative (unstable configuration)")]
    Unstable { t: f64, halvings: u32 },

    #[error("advective CFL violated: dt = {dt} exceeds the stable bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("decay fit needs positive data, found {value} at t = {t}")]
    NonPositiveData { t: f64, value: f64 },

    #[error("variance drifted to {variance} at iteration {iter} (expected 4)")]
    VarianceDrift { iter: usize, variance: f64 },

    #[error("profile aliases on the angular grid: scale * dphi = {0} > 2")]
    Aliasing(f64),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
