use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// Variants map one-to-one onto the failure classes the CLI turns into exit
/// codes, so keep them coarse.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh generation failed: {0}")]
    MeshFailure(String),

    #[error("degenerate family at t = {t}: {detail}")]
    DegenerateFamily { t: f64, detail: String },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    #[error("unsupported boundary condition: {0}")]
    UnsupportedBc(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("numerical breakdown at pivot {pivot}: {detail}")]
    NumericalBreakdown { pivot: usize, detail: String },

    #[error("grid too coarse: suspected double crossing in [{t_lo}, {t_hi}]")]
    RefineGrid { t_lo: f64, t_hi: f64 },

    #[error("invalid bracket [{t_lo}, {t_hi}]: tracked eigenvalue has the same sign at both ends")]
    InvalidBracket { t_lo: f64, t_hi: f64 },

    #[error("degenerate crossing at t = {t_star}: crossing form has {zero_count} zero eigenvalue(s)")]
    DegenerateCrossing { t_star: f64, zero_count: usize },

    #[error("step count too small to resolve oscillation: {0}")]
    RefineSteps(String),

    #[error("angular mode cap too small: {0}")]
    IncreaseModeCap(String),

    #[error("non-finite coefficient value at ({x}, {y})")]
    NonFiniteCoefficient { x: f64, y: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
