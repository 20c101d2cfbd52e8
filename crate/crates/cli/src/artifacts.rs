use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mmwsim::dsp::{PointCloud, Rdm};
use mmwsim::waveform::DataCube;
use mmwsim::Real;

use crate::error::{CliError, CliResult};

/// Provenance stamped into every artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArtifactMeta {
    pub seed: u64,
    pub config_hash: u32,
}

impl ArtifactMeta {
    pub fn comment(&self) -> String {
        format!("mmwsim seed={} config_hash={:08x}", self.seed, self.config_hash)
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish<W: Write>(path: &Path, mut w: W) -> CliResult<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// RDM in dB: a `#` provenance line, a header row of velocities (m/s) after a
/// `range_m` corner cell, then one row per range bin.
pub fn write_rdm_csv<T: Real>(rdm: &Rdm<T>, path: &Path, meta: &ArtifactMeta) -> CliResult<()> {
    let mut out = create(path)?;
    writeln!(out, "# {}", meta.comment()).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["range_m".to_string()];
    header.extend(rdm.velocity_axis.iter().map(|v| v.to_string()));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (i, r) in rdm.range_axis.iter().enumerate() {
        let mut row = vec![r.to_string()];
        row.extend(rdm.magnitude_db.row(i).iter().map(|v| v.to_f64_lossy().to_string()));
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    let out = w.into_inner().map_err(|e| CliError::io(path, e.into_error()))?;
    finish(path, out)
}

/// Grayscale rendering of the RDM, `size x size`, row-major.
///
/// Velocity increases to the right and range upward. The top
/// `dynamic_range_db` below the peak are stretched onto 0..=255 (the peak is
/// 255); a map with no contrast renders as uniform 128. Resampling is
/// nearest-neighbour.
pub fn rdm_image<T: Real>(rdm: &Rdm<T>, size: usize, dynamic_range_db: f64) -> Vec<u8> {
    let db = &rdm.magnitude_db;
    let (kr, kd) = db.dim();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in db.iter() {
        let v = v.to_f64_lossy();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let lo = lo.max(hi - dynamic_range_db);
    // velocity axis descends with Doppler bin; flip it so it grows rightward
    let ascending = rdm.velocity_axis.first() > rdm.velocity_axis.last();
    let mut pixels = Vec::with_capacity(size * size);
    for y in 0..size {
        let r = (kr - 1) - (y * kr / size);
        for x in 0..size {
            let d = x * kd / size;
            let d = if ascending { kd - 1 - d } else { d };
            let v = db[[r, d]].to_f64_lossy();
            let p = if hi > lo { ((v.max(lo) - lo) / (hi - lo) * 255.0).round() } else { 128.0 };
            pixels.push(p as u8);
        }
    }
    pixels
}

pub fn write_pgm(path: &Path, pixels: &[u8], size: usize, meta: &ArtifactMeta) -> CliResult<()> {
    let mut out = create(path)?;
    write!(out, "P5\n# {}\n{size} {size}\n255\n", meta.comment())
        .and_then(|_| out.write_all(pixels))
        .map_err(|e| CliError::io(path, e))?;
    finish(path, out)
}

pub fn write_png(path: &Path, pixels: &[u8], size: usize, meta: &ArtifactMeta) -> CliResult<()> {
    let out = create(path)?;
    let side = u32::try_from(size).map_err(|_| CliError::Config("image too large".into()))?;
    let mut enc = png::Encoder::new(out, side, side);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let png_err = |e: png::EncodingError| match e {
        png::EncodingError::IoError(io) => CliError::io(path, io),
        other => CliError::io(path, std::io::Error::other(other.to_string())),
    };
    enc.add_text_chunk("Comment".into(), meta.comment()).map_err(png_err)?;
    let mut w = enc.write_header().map_err(png_err)?;
    w.write_image_data(pixels).map_err(png_err)?;
    w.finish().map_err(png_err)
}

/// Writes `<stem>.pgm` and `<stem>.png`; returns both paths.
pub fn export_rdm_image<T: Real>(
    rdm: &Rdm<T>,
    size: usize,
    dynamic_range_db: f64,
    stem: &Path,
    meta: &ArtifactMeta,
) -> CliResult<(PathBuf, PathBuf)> {
    let pixels = rdm_image(rdm, size, dynamic_range_db);
    let (pgm, png) = (stem.with_extension("pgm"), stem.with_extension("png"));
    write_pgm(&pgm, &pixels, size, meta)?;
    write_png(&png, &pixels, size, meta)?;
    Ok((pgm, png))
}

/// Point cloud CSV with header `x,y,z,v,intensity`, after a `#` provenance line.
pub fn write_point_cloud_csv(cloud: &PointCloud, path: &Path, meta: &ArtifactMeta) -> CliResult<()> {
    let mut out = create(path)?;
    writeln!(out, "# {}", meta.comment()).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "z", "v", "intensity"]).map_err(|e| csv_error(path, e))?;
    for p in &cloud.points {
        w.write_record([p.x, p.y, p.z, p.v, p.intensity].map(|v| v.to_string()))
            .map_err(|e| csv_error(path, e))?;
    }
    let out = w.into_inner().map_err(|e| CliError::io(path, e.into_error()))?;
    finish(path, out)
}

pub fn write_cube<T: Real>(cube: &DataCube<T>, path: &Path) -> CliResult<()> {
    let out = create(path)?;
    cube.write_binary(out).map_err(|e| match e {
        mmwsim::SimError::Io(io) => CliError::io(path, io),
        other => CliError::Sim(other),
    })
}
