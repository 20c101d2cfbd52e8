//! Range/Doppler processing, CA-CFAR detection, angle estimation and point
//! clouds.

mod angle;
mod cfar;
mod cluster;
mod points;
mod process;
mod spectrum;
mod window;

pub use angle::{angle_fft, cone_to_azimuth};
pub use cfar::{cfar_2d, CfarHit, CfarParams};
pub use cluster::{cluster_hits, significant_cells, Cluster};
pub use points::{to_point_cloud, Detection, Point, PointCloud};
pub use process::{process_frame, DspParams, FrameProducts};
pub use spectrum::{bin_to_physical, doppler_fft, form_rdm, range_fft, BinMapping, Rdm};
pub use window::Window;
