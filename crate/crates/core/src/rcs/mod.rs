//! Target scattering: meshes, bidirectional ray tracing, swept-frequency
//! response and scattering-center extraction, plus closed-form oracles.

mod analytic;
mod bvh;
mod import;
mod mesh;
mod response;
mod tracer;
mod vehicles;

pub use analytic::{analytic_rcs, CanonicalShape};
pub use bvh::{Bvh, Hit};
pub use import::{load_mesh, parse_ascii_stl, parse_vertex_list};
pub use mesh::{TriangleMesh, PEC};
pub use response::{
    extract_scattering_centers, frequency_grid, frequency_response, resample_response,
    synthesize_from_centers, ScatterResponse, ScatteringCenter, DEFAULT_FREQUENCY_SAMPLES,
};
pub(crate) use response::check_uniform;
pub use tracer::{
    incident_direction, trace_bidirectional, trace_look, ConnectionSplit, RayPath,
    ScatteringModel, Trace, TraceParams,
};
pub use vehicles::{builtin_vehicle_mesh, VehicleClass};
