use std::fmt;

/// Non-fatal conditions reported alongside a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// Multi-bounce tracing on a mesh with open edges; some paths may be missing.
    OpenMeshMultiBounce { open_edges: usize },
    /// No ray path reached the observer; the response is identically zero.
    EmptyResponse,
    /// A response was resampled onto a different frequency grid.
    Resampled { from: usize, to: usize },
    /// Noise was requested for an all-zero cube; unit signal power was assumed.
    ZeroSignalNoiseReference,
    /// A detection at or inside the radar height was dropped from the point cloud.
    PointBelowRadar { range: f64 },
    /// Scattering centers beyond the IF band were discarded, as the receiver's
    /// anti-alias filter would.
    CentersOutsideWindow { target: String, dropped: usize },
    /// A single-channel array cannot measure angle; detections were placed on
    /// boresight.
    AngleUnavailable,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::OpenMeshMultiBounce { open_edges } => write!(
                f,
                "mesh has {open_edges} open edges; multi-bounce paths may be incomplete"
            ),
            Diagnostic::EmptyResponse => write!(f, "no scattering path found; zero response"),
            Diagnostic::Resampled { from, to } => {
                write!(f, "response resampled from {from} to {to} frequency samples")
            }
            Diagnostic::ZeroSignalNoiseReference => {
                write!(f, "cube is all zero; noise referenced to unit power")
            }
            Diagnostic::PointBelowRadar { range } => {
                write!(f, "detection at range {range:.3} m is not beyond the radar height; dropped")
            }
            Diagnostic::CentersOutsideWindow { target, dropped } => {
                write!(f, "target `{target}`: {dropped} scattering centers beyond the IF band dropped")
            }
            Diagnostic::AngleUnavailable => write!(f, "single channel: angle unavailable, detections on boresight"),
        }
    }
}
