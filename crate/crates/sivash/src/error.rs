//! Error type shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("custom multiplier table missing mode k = {0:?}")]
    MissingMultiplierMode(Vec<i64>),

    #[error("invalid norm request: {0}")]
    InvalidNorm(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    /// Finite-time loss of regularity: a monitored norm crossed the
    /// blow-up threshold (or became non-finite) at time `t`.
    #[error("blow-up detected at t = {t}: {norm_name} = {value:.3e}")]
    BlowUp {
        t: f64,
        norm_name: &'static str,
        value: f64,
    },

    /// The state left the Cole–Hopf transform's domain: min ψ fell below
    /// the positivity margin.
    #[error("positivity lost: min psi = {min:.3e} < {eps:.1e}")]
    PositivityLost { min: f64, eps: f64 },

    /// Fixed-point / path iteration failed to contract; carries the
    /// residual history for gap-vs-Lipschitz diagnosis.
    #[error("no convergence after {} iterations (last residual {:.3e})",
            residuals.len(), residuals.last().copied().unwrap_or(f64::NAN))]
    NoConvergence { residuals: Vec<f64> },

    #[error("no plateau found: {0}")]
    NoPlateau(String),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("sampling cadence too coarse: {0}")]
    InsufficientSampling(String),

    #[error("amplitude left the linear regime: {0}")]
    NonlinearContamination(String),

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
