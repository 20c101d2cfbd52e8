use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use mmwsim::dsp::BinMapping;
use mmwsim::metrics::{exact_decimal, exact_metrics, rational_to_string};
use serde::Serialize;

use crate::artifacts::ArtifactMeta;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::run::run_single;

/// Configuration entries a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    SamplesPerChirp,
    Slope,
    SampleRate,
    IdleTime,
    StartFrequency,
    ChirpsPerFrame,
    SnrDb,
}

impl SweepParam {
    pub const ALL: [SweepParam; 7] = [
        SweepParam::SamplesPerChirp,
        SweepParam::Slope,
        SweepParam::SampleRate,
        SweepParam::IdleTime,
        SweepParam::StartFrequency,
        SweepParam::ChirpsPerFrame,
        SweepParam::SnrDb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::SamplesPerChirp => "samples_per_chirp",
            SweepParam::Slope => "slope",
            SweepParam::SampleRate => "sample_rate",
            SweepParam::IdleTime => "idle_time",
            SweepParam::StartFrequency => "start_frequency",
            SweepParam::ChirpsPerFrame => "chirps_per_frame",
            SweepParam::SnrDb => "snr_db",
        }
    }

    /// Sets the parameter on `cfg`; count parameters must be positive integers.
    pub fn apply(self, cfg: &mut RunConfig, value: f64) -> CliResult<()> {
        let count = || -> CliResult<usize> {
            if value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(CliError::Config(format!("{} takes a positive integer, got {value}", self.name())))
            }
        };
        match self {
            SweepParam::SamplesPerChirp => cfg.chirp.samples_per_chirp = count()?,
            SweepParam::Slope => cfg.chirp.slope = value,
            SweepParam::SampleRate => cfg.chirp.sample_rate = value,
            SweepParam::IdleTime => cfg.chirp.idle_time = value,
            SweepParam::StartFrequency => cfg.chirp.start_frequency = value,
            SweepParam::ChirpsPerFrame => cfg.frame.chirps_per_frame = count()?,
            SweepParam::SnrDb => cfg.link.snr_db = value,
        }
        cfg.validate()
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = match s {
            "M" => "samples_per_chirp",
            "N" => "chirps_per_frame",
            "mu" => "slope",
            other => other,
        };
        SweepParam::ALL.into_iter().find(|p| p.name() == key).ok_or_else(|| {
            let known: Vec<&str> = SweepParam::ALL.iter().map(|p| p.name()).collect();
            CliError::Config(format!("unknown sweep parameter `{s}` (known: {})", known.join(", ")))
        })
    }
}

/// One row of the sweep comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    /// Exact decimal.
    pub bandwidth_ghz: String,
    /// Exact decimal (or `p/q` when it does not terminate).
    pub range_resolution_m: String,
    pub max_speed_mps: f64,
    /// `normal` when every target's Doppler reading is within one bin of its
    /// true radial velocity, `abnormal` otherwise, `n/a` without targets.
    pub rdm_display: String,
    pub points: usize,
    pub target_points: usize,
    pub peak_range_m: f64,
    pub peak_velocity_mps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub parameter: String,
    pub seed: u64,
    pub config_hash: String,
    pub rows: Vec<SweepRow>,
}

/// Metrics-only row, computed without simulating.
pub fn sweep_metrics(cfg: &RunConfig) -> (String, String, f64) {
    let c = &cfg.chirp;
    let exact = exact_metrics(c.slope, c.sample_rate, c.samples_per_chirp, c.idle_time);
    let giga = exact_decimal("1e9").expect("literal");
    let bandwidth = rational_to_string(&(exact.bandwidth.clone() / giga));
    let resolution = rational_to_string(&exact.range_resolution);
    (bandwidth, resolution, BinMapping::new(&cfg.radar()).max_speed())
}

/// Runs the base configuration once per value, each into
/// `out/<param>_<value>`, and writes `sweep.csv` and `sweep.json`.
pub fn run_sweep(base: &RunConfig, param: SweepParam, values: &[f64], out: &Path) -> CliResult<SweepTable> {
    base.validate()?;
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let mut rows = Vec::new();
    for &value in values {
        let mut cfg = base.clone();
        param.apply(&mut cfg, value)?;
        let dir = out.join(format!("{param}_{value}"));
        let outcome = run_single(&cfg, &dir)?;
        let s = &outcome.summaries[0];
        let (bandwidth_ghz, range_resolution_m, max_speed_mps) = sweep_metrics(&cfg);
        let velocity_bin = 2.0 * s.radar.max_speed_mps / s.radar.doppler_bins as f64;
        let rdm_display = if s.targets.is_empty() {
            "n/a"
        } else if s.targets.iter().all(|t| {
            t.detected.as_ref().is_some_and(|d| d.velocity_error_mps.abs() <= velocity_bin)
        }) {
            "normal"
        } else {
            "abnormal"
        };
        rows.push(SweepRow {
            value,
            bandwidth_ghz,
            range_resolution_m,
            max_speed_mps,
            rdm_display: rdm_display.to_string(),
            points: s.points,
            target_points: s.targets.iter().filter_map(|t| t.detected.as_ref()).map(|d| d.target_points).sum(),
            peak_range_m: s.rdm_peak.range_m,
            peak_velocity_mps: s.rdm_peak.velocity_mps,
        });
    }
    let table = SweepTable {
        parameter: param.to_string(),
        seed: base.seed,
        config_hash: format!("{:08x}", base.hash()),
        rows,
    };
    write_table(&table, out, &ArtifactMeta { seed: base.seed, config_hash: base.hash() })?;
    Ok(table)
}

fn write_table(table: &SweepTable, out: &Path, meta: &ArtifactMeta) -> CliResult<()> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let path = out.join("sweep.csv");
    let mut buf = Vec::new();
    writeln!(buf, "# {}", meta.comment()).expect("in-memory write");
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let header = [
            table.parameter.as_str(),
            "bandwidth_ghz",
            "range_resolution_m",
            "max_speed_mps",
            "rdm_display",
            "points",
            "target_points",
            "peak_range_m",
            "peak_velocity_mps",
        ];
        w.write_record(header).expect("in-memory write");
        for r in &table.rows {
            w.write_record([
                r.value.to_string(),
                r.bandwidth_ghz.clone(),
                r.range_resolution_m.clone(),
                r.max_speed_mps.to_string(),
                r.rdm_display.clone(),
                r.points.to_string(),
                r.target_points.to_string(),
                r.peak_range_m.to_string(),
                r.peak_velocity_mps.to_string(),
            ])
            .expect("in-memory write");
        }
        w.flush().expect("in-memory write");
    }
    std::fs::write(&path, buf).map_err(|e| CliError::io(&path, e))?;
    let json = out.join("sweep.json");
    let text = serde_json::to_string_pretty(table).expect("table serializes");
    std::fs::write(&json, text + "\n").map_err(|e| CliError::io(&json, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RunConfig {
        RunConfig::from_toml("seed = 1\n").unwrap()
    }

    #[test]
    fn parameter_names() {
        assert_eq!("M".parse::<SweepParam>().unwrap(), SweepParam::SamplesPerChirp);
        assert_eq!("snr_db".parse::<SweepParam>().unwrap(), SweepParam::SnrDb);
        assert!("bandwidth".parse::<SweepParam>().is_err());
    }

    #[test]
    fn count_parameters_reject_fractions() {
        let mut c = base();
        assert!(SweepParam::SamplesPerChirp.apply(&mut c, 256.5).is_err());
        SweepParam::SamplesPerChirp.apply(&mut c, 384.0).unwrap();
        assert_eq!(c.chirp.samples_per_chirp, 384);
    }

    #[test]
    fn table_metrics_are_exact() {
        let want = [(256.0, "0.625", "0.24"), (384.0, "0.9375", "0.16"), (512.0, "1.25", "0.12")];
        for (m, bw, dr) in want {
            let mut c = base();
            SweepParam::SamplesPerChirp.apply(&mut c, m).unwrap();
            let (b, r, _) = sweep_metrics(&c);
            assert_eq!((b.as_str(), r.as_str()), (bw, dr));
        }
    }
}
