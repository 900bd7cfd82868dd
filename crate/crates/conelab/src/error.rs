use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("domain error in {op}: argument value {value}")]
    Domain { op: &'static str, value: f64 },

    #[error("degenerate metric: |det g| = {det:e} below threshold")]
    DegenerateMetric { det: f64 },

    #[error("degenerate slice metric at s = {s}: |det| = {det:e}")]
    DegenerateSlice { s: f64, det: f64 },

    #[error("point belongs to chart '{point_chart}', expected '{expected}'")]
    ChartMismatch { point_chart: String, expected: String },

    #[error("point {coords:?} outside chart '{chart}'")]
    OutsideChart { chart: String, coords: Vec<f64> },

    #[error("finite-difference stencil leaves chart '{chart}' near {coords:?}")]
    StencilOutsideChart { chart: String, coords: Vec<f64> },

    #[error("trajectory left chart '{chart}' at parameter {param}")]
    LeftChart { chart: String, param: f64 },

    #[error("gradient norm {value:e} too close to a singular level of alpha")]
    NearSingularLevel { value: f64 },

    #[error("radial reparameterization undefined at alpha0 = {alpha0} (branch point)")]
    BranchUndefined { alpha0: f64 },

    #[error("chart singularity: solved coordinate denominator {value:e} near zero")]
    ChartSingularity { value: f64 },

    #[error("perturbation too large: slice metric degenerate (|det| = {det:e})")]
    BumpTooLarge { det: f64 },

    #[error("inadmissible shift (a,b) = ({a},{b}): {reason}")]
    InadmissibleShift { a: f64, b: f64, reason: String },

    #[error("inadmissible base data: {0}")]
    InvalidBase(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
