use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::scalar::Real;

/// Two-dimensional cell-averaging CFAR settings. Cell counts are per side,
/// as (range, Doppler).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CfarParams {
    pub guard: (usize, usize),
    pub training: (usize, usize),
    pub pfa: f64,
}

impl Default for CfarParams {
    fn default() -> Self {
        Self { guard: (2, 2), training: (8, 4), pfa: 1e-4 }
    }
}

impl CfarParams {
    pub fn validate(&self) -> Result<()> {
        if self.training.0 == 0 && self.training.1 == 0 {
            return Err(SimError::InvalidParameter("CFAR needs training cells".into()));
        }
        if !(self.pfa > 0.0 && self.pfa < 1.0) {
            return Err(SimError::InvalidParameter(format!("Pfa must lie in (0, 1), got {}", self.pfa)));
        }
        Ok(())
    }

    /// Half extents of the full window (guard plus training).
    pub fn half_window(&self) -> (usize, usize) {
        (self.guard.0 + self.training.0, self.guard.1 + self.training.1)
    }

    /// Training cells of an untruncated window.
    pub fn training_cells(&self) -> usize {
        let (wr, wd) = self.half_window();
        (2 * wr + 1) * (2 * wd + 1) - (2 * self.guard.0 + 1) * (2 * self.guard.1 + 1)
    }

    /// Threshold multiplier `T (Pfa^(-1/T) - 1)` for `T` training cells.
    pub fn alpha(&self, cells: usize) -> f64 {
        let t = cells as f64;
        t * (self.pfa.powf(-1.0 / t) - 1.0)
    }
}

/// A cell above its CFAR threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfarHit {
    pub range_bin: usize,
    pub doppler_bin: usize,
    /// Cell power over the local training mean, dB.
    pub snr_db: f64,
}

/// Inclusive-exclusive summed-area table.
struct Integral {
    sums: Array2<f64>,
}

impl Integral {
    fn new(power: &Array2<f64>) -> Self {
        let (r, d) = power.dim();
        let mut sums = Array2::zeros((r + 1, d + 1));
        for i in 0..r {
            let mut row = 0.0;
            for j in 0..d {
                row += power[[i, j]];
                sums[[i + 1, j + 1]] = sums[[i, j + 1]] + row;
            }
        }
        Self { sums }
    }

    /// Sum over rows `r0..r1`, columns `d0..d1`.
    fn rect(&self, r0: usize, r1: usize, d0: usize, d1: usize) -> f64 {
        self.sums[[r1, d1]] - self.sums[[r0, d1]] - self.sums[[r1, d0]] + self.sums[[r0, d0]]
    }
}

/// CA-CFAR over a linear-power map. Windows running off the map edge are
/// truncated and the threshold is recomputed for the cells that remain.
pub fn cfar_2d<T: Real>(power: &Array2<T>, params: &CfarParams) -> Result<Vec<CfarHit>> {
    params.validate()?;
    let (rows, cols) = power.dim();
    let (wr, wd) = params.half_window();
    if rows < 2 * wr + 1 || cols < 2 * wd + 1 {
        return Err(SimError::InvalidParameter(format!(
            "{rows}x{cols} map is smaller than the {}x{} CFAR window",
            2 * wr + 1,
            2 * wd + 1
        )));
    }
    let p = power.mapv(|v| v.to_f64_lossy());
    let table = Integral::new(&p);
    let (gr, gd) = params.guard;
    let mut hits = Vec::new();
    for i in 0..rows {
        let (o_r0, o_r1) = (i.saturating_sub(wr), (i + wr + 1).min(rows));
        let (g_r0, g_r1) = (i.saturating_sub(gr), (i + gr + 1).min(rows));
        for j in 0..cols {
            let (o_d0, o_d1) = (j.saturating_sub(wd), (j + wd + 1).min(cols));
            let (g_d0, g_d1) = (j.saturating_sub(gd), (j + gd + 1).min(cols));
            let cells = (o_r1 - o_r0) * (o_d1 - o_d0) - (g_r1 - g_r0) * (g_d1 - g_d0);
            if cells == 0 {
                continue;
            }
            let sum = table.rect(o_r0, o_r1, o_d0, o_d1) - table.rect(g_r0, g_r1, g_d0, g_d1);
            let cut = p[[i, j]];
            let mean = sum.max(0.0) / cells as f64;
            if cut > params.alpha(cells) * mean {
                hits.push(CfarHit {
                    range_bin: i,
                    doppler_bin: j,
                    snr_db: 10.0 * (cut / mean.max(f64::MIN_POSITIVE)).log10(),
                });
            }
        }
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_formula() {
        let p = CfarParams::default();
        assert_eq!(p.training_cells(), 21 * 13 - 25);
        let t = 248.0;
        assert!((p.alpha(248) - t * (1e-4f64.powf(-1.0 / t) - 1.0)).abs() < 1e-12);
        assert!(p.alpha(248) > 1.0);
    }

    #[test]
    fn flat_map_has_no_hits() {
        let m = Array2::from_elem((64, 32), 3.0f64);
        assert!(cfar_2d(&m, &CfarParams::default()).unwrap().is_empty());
    }

    #[test]
    fn impulse_is_the_only_hit() {
        let mut m = Array2::from_elem((64, 32), 1.0f32);
        m[[40, 3]] = 1000.0;
        let hits = cfar_2d(&m, &CfarParams::default()).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!((hits[0].range_bin, hits[0].doppler_bin), (40, 3));
        assert!((hits[0].snr_db - 30.0).abs() < 0.1);
    }

    #[test]
    fn window_errors() {
        let m = Array2::from_elem((10, 10), 1.0f64);
        assert!(cfar_2d(&m, &CfarParams::default()).is_err());
        let big = Array2::from_elem((64, 32), 1.0f64);
        let none = CfarParams { training: (0, 0), ..CfarParams::default() };
        assert!(cfar_2d(&big, &none).is_err());
        let bad = CfarParams { pfa: 1.0, ..CfarParams::default() };
        assert!(cfar_2d(&big, &bad).is_err());
    }
}
