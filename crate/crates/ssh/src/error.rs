use thiserror::Error;

#[derive(Debug, Error)]
pub enum SshError {
    #[error(transparent)]
    Core(#[from] distill_core::Error),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("geometry optimization did not converge: gradient norm {residual:.3e} eV/A after {iterations} iterations")]
    GeometryNotConverged { residual: f64, iterations: usize },

    #[error("normal mode {mode} has non-positive curvature {lambda:.3e}; the geometry is not a minimum")]
    ImaginaryFrequency { mode: usize, lambda: f64 },

    #[error("norm drift {drift:.3e} exceeded the per-step budget at t = {t} fs; reduce dt below {dt}")]
    NormDrift { drift: f64, t: f64, dt: f64 },

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("site/energy basis disagreement in reduced purity at t = {t} fs: |delta| = {dev:.3e}")]
    BasisConsistency { t: f64, dev: f64 },
}

pub type Result<T> = std::result::Result<T, SshError>;
