use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("no interior minimum in [{lo}, {hi}]: best point x = {x} sits on the boundary")]
    NoBracketedMinimum { lo: f64, hi: f64, x: f64 },

    #[error("least-squares fit failed: {reason} (last parameters {last_params:?})")]
    FitFailed {
        reason: String,
        last_params: Vec<f64>,
    },

    #[error("state is not normalized (norm = {norm})")]
    Unnormalized { norm: f64 },

    #[error("heralding probability is zero; conditional state undefined")]
    ZeroProbability,

    #[error("Fock cutoff too small: {0}")]
    CutoffTooSmall(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("tau_opt search failed: {reason}")]
    TauSearch {
        reason: String,
        /// Sampled `(tau, p0)` curve the search was run on.
        curve: Vec<(f64, f64)>,
    },

    #[error("cat-state match failed: {reason} (initial-guess fidelity {initial_fidelity})")]
    CatMatch {
        reason: String,
        initial_fidelity: f64,
    },

    #[error("state has support near the truncation boundary (weight {weight:e} in the top decile of {axis})")]
    BoundarySupport { axis: &'static str, weight: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// `true` for errors raised by bad user input rather than by a numerical
    /// failure.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_)
        )
    }
}
