use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("unknown target id `{0}`")]
    UnknownTarget(String),
    #[error("lane index {lane} out of range (layout has {lanes} lanes)")]
    InvalidLane { lane: usize, lanes: usize },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("{shape} dimension {dimension} m is below 5 wavelengths ({min} m); outside the optical region")]
    OutOfRegime { shape: &'static str, dimension: f64, min: f64 },
    #[error("scattering center {index} (delay {delay:.3e} s) falls outside the unambiguous IF window")]
    ClippedTarget { index: usize, delay: f64 },
    #[error("angle estimation needs at least two channels")]
    AngleUnavailable,
    #[error("mesh parse error on line {line}: {message}")]
    MeshParse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
