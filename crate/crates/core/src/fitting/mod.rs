//! Damped least squares and the model fits built on it.

mod lm;
mod models;

pub use lm::{levenberg_marquardt, FitOptions, FitProblem, FitResult, Model, Termination};
pub use models::{
    fit_cavity_lorentzian, fit_detuning_trace, fit_spectroscopy_linewidth, lorentzian_power,
    CavityFit, DetuningFit, DetuningFitConfig, SpectroscopyFit, SpectroscopyFitConfig,
};

#[derive(Debug, Clone, thiserror::Error)]
pub enum FitError {
    #[error("invalid fit problem: {0}")]
    InvalidProblem(String),
    #[error("singular normal matrix at damping {lambda:e}: {detail}")]
    Singular { lambda: f64, detail: String },
    #[error("model returned a non-finite value at parameters {params:?}")]
    NonFinite { params: Vec<f64> },
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("no peak found: {0}")]
    NoPeak(String),
}

impl FitResult {
    /// `{params: {..}, stderr: {..}, rss, converged, iters, warnings}`.
    /// Infinite standard errors become `null`.
    pub fn to_json(&self) -> serde_json::Value {
        let map = |v: &[f64]| {
            self.names
                .iter()
                .zip(v)
                .map(|(n, x)| (n.clone(), serde_json::json!(x)))
                .collect::<serde_json::Map<_, _>>()
        };
        serde_json::json!({
            "params": map(&self.params),
            "stderr": map(&self.stderr),
            "rss": self.rss,
            "converged": self.converged,
            "iters": self.iters,
            "warnings": self.diagnostics,
        })
    }
}
