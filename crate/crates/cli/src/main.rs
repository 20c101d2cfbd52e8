use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mmwsim_cli::{
    generate_dataset, run_rcs_table, run_single, run_sweep, CliResult, DatasetSpec, RcsTableConfig,
    RunConfig, SweepParam,
};

const DEFAULT_OUT: &str = "mmwsim-out";

#[derive(Parser)]
#[command(name = "mmwsim", version, about = "Roadside FMCW radar simulator")]
struct Cli {
    /// Log verbosity when RUST_LOG is unset.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate and process the frames of one scene.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat a run over values of one waveform parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// samples_per_chirp, slope, sample_rate, idle_time, start_frequency,
        /// chirps_per_frame or snr_db.
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a labeled RDM image set with a manifest.
    Dataset {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the RCS of a mesh against aspect and frequency.
    Rcs {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_dir(flag: Option<PathBuf>, configured: Option<PathBuf>) -> PathBuf {
    flag.or(configured).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn load_run(config: &Path, seed: Option<u64>) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Run { config, seed, out } => {
            let cfg = load_run(&config, seed)?;
            let out = out_dir(out, cfg.output_dir.clone());
            let outcome = run_single(&cfg, &out)?;
            for s in &outcome.summaries {
                println!(
                    "frame {}: {} detections, {} points, peak {:.2} m {:.2} m/s",
                    s.frame, s.detections, s.points, s.rdm_peak.range_m, s.rdm_peak.velocity_mps
                );
            }
            println!("wrote {} files to {}", outcome.files.len(), out.display());
        }
        Command::Sweep { config, param, values, seed, out } => {
            let cfg = load_run(&config, seed)?;
            let out = out_dir(out, cfg.output_dir.clone());
            let table = run_sweep(&cfg, param, &values, &out)?;
            for r in &table.rows {
                println!(
                    "{}={}: B={} GHz dR={} m vmax={:.3} m/s rdm={} points={}",
                    table.parameter, r.value, r.bandwidth_ghz, r.range_resolution_m, r.max_speed_mps, r.rdm_display,
                    r.points
                );
            }
        }
        Command::Dataset { config, seed, out } => {
            let mut spec = DatasetSpec::load(&config)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let out = out_dir(out, spec.output_dir.clone());
            let entries = generate_dataset(&spec, &out)?;
            println!("wrote {} images and manifest.csv to {}", entries.len(), out.display());
        }
        Command::Rcs { config, out } => {
            let cfg = RcsTableConfig::load(&config)?;
            let out = out_dir(out, None);
            for r in run_rcs_table(&cfg, &out)? {
                println!("az {:7.2} deg: {:8.2} dBsm ({} paths)", r.azimuth_deg, r.mean_rcs_dbsm, r.paths);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(&cli.log_level)).init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

