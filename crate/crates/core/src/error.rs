//! Error types shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("separation must be positive, got {0}")]
    NonPositiveSeparation(f64),

    #[error("probe point lies inside the density support")]
    ProbeInsideDensity,

    #[error("unknown preset `{0}`; valid presets are `romero-isart` and `pino`")]
    UnknownPreset(String),

    #[error("step resolution too coarse: rate*dt = {0:.3e}, need < 0.1")]
    ResolutionTooCoarse(f64),

    #[error("numerical instability: {0}")]
    StabilityAbort(String),

    #[error("simulation box too small: {0}")]
    GridTooSmall(String),

    #[error("grid size {0} is not a power of two")]
    GridNotPowerOfTwo(usize),

    #[error("grid span {span:.3e} m too small for cat state (need >= {needed:.3e} m)")]
    GridSpanTooSmall { span: f64, needed: f64 },

    #[error("collapse center {0:.3e} m outside the grid")]
    CenterOutsideGrid(f64),

    #[error("collapse-center density not normalized: integral = {0:.8}")]
    CenterDensityNotNormalized(f64),

    #[error("theory {theory} is not supported by the {engine} engine")]
    UnsupportedEngine { theory: String, engine: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
