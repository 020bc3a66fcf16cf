use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the toolkit can report.
///
/// Variants are deliberately coarse; [`Error::code`] gives the short,
/// stable identifier that the experiment harness writes into error rows.
#[derive(Debug, Error)]
pub enum Error {
    #[error("points belong to different manifolds: {0}")]
    SpecMismatch(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("point is on the cut locus (distance {distance} is within tolerance of {limit})")]
    CutLocus { distance: f64, limit: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("operation not supported on this manifold: {0}")]
    UnsupportedManifold(String),

    #[error("density is not normalizable: {0}")]
    Normalization(String),

    #[error(
        "infeasible budget: epsilon {epsilon} is at or below the privacy floor K*alpha*delta^2/2 = {floor}; \
         no diffusion time reaches it, use the Langevin mechanism instead"
    )]
    InfeasibleBudget { epsilon: f64, floor: f64 },

    #[error("Langevin drift too weak: lambda {lambda} must exceed the curvature parameter K = {k}")]
    DriftTooWeak { lambda: f64, k: f64 },

    #[error("quadrature did not converge: relative change {relative_change:e} between resolutions")]
    Accuracy { relative_change: f64 },

    #[error("solver did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    Convergence { iterations: usize, grad_norm: f64 },

    #[error("no sensitivity bound applies: {0}")]
    NoValidBound(String),

    #[error("wrong curvature regime: {0}")]
    Regime(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Short machine-readable tag used in experiment outputs.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SpecMismatch(_) => "spec_mismatch",
            Error::InvalidPoint(_) => "invalid_point",
            Error::CutLocus { .. } => "cut_locus",
            Error::Domain(_) => "domain",
            Error::UnsupportedManifold(_) => "unsupported_manifold",
            Error::Normalization(_) => "normalization",
            Error::InfeasibleBudget { .. } => "infeasible_budget",
            Error::DriftTooWeak { .. } => "drift_too_weak",
            Error::Accuracy { .. } => "accuracy",
            Error::Convergence { .. } => "convergence",
            Error::NoValidBound(_) => "no_valid_bound",
            Error::Regime(_) => "regime",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
        }
    }
}
