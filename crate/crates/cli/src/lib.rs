//! Configuration loading, artifact export and the run, sweep, dataset and
//! RCS-table drivers behind the `mmwsim` binary.

pub mod artifacts;
pub mod config;
pub mod dataset;
pub mod error;
pub mod rcs_table;
pub mod run;
pub mod sweep;

pub use config::RunConfig;
pub use dataset::{generate_dataset, DatasetSpec, ManifestEntry};
pub use error::{CliError, CliResult};
pub use rcs_table::{run_rcs_table, RcsTableConfig};
pub use run::{run_single, simulate_frame, RunOutcome, Summary};
pub use sweep::{run_sweep, SweepParam, SweepTable};
