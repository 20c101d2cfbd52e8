//! Swept-frequency response of a traced target and its reduction to discrete
//! scattering centers.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::diagnostics::Diagnostic;
use crate::error::{Result, SimError};
use crate::rcs::tracer::{RayPath, Trace};
use crate::scalar::SPEED_OF_LIGHT;

/// Default number of frequency samples across the sweep.
pub const DEFAULT_FREQUENCY_SAMPLES: usize = 128;

/// Oversampling of the delay spectrum when searching for the next center.
const DELAY_OVERSAMPLING: usize = 8;

const MAX_REFINE_PASSES: usize = 8;

/// A discrete (delay, amplitude) term of a target's impulse response.
///
/// `delay` is relative to the round trip to the target's reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringCenter {
    pub delay: f64,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, Default)]
pub struct ScatterResponse {
    pub frequencies: Vec<f64>,
    /// Complex response normalised so that |sigma_f|^2 is the RCS in m^2.
    pub sigma_f: Vec<Complex64>,
    pub scattering_centers: Vec<ScatteringCenter>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ScatterResponse {
    /// Response of a traced look, with up to `max_centers` extracted centers.
    pub fn from_trace(trace: &Trace, frequencies: Vec<f64>, max_centers: usize) -> Result<Self> {
        let (sigma_f, mut diagnostics) =
            frequency_response(&trace.paths, trace.reference_length, &frequencies)?;
        diagnostics.extend(trace.diagnostics.iter().cloned());
        let scattering_centers = extract_scattering_centers(&frequencies, &sigma_f, max_centers)?;
        Ok(Self { frequencies, sigma_f, scattering_centers, diagnostics })
    }

    /// A point scatterer of amplitude `amplitude` at the reference point.
    pub fn point(frequencies: Vec<f64>, amplitude: Complex64) -> Self {
        let sigma_f = vec![amplitude; frequencies.len()];
        Self {
            frequencies,
            sigma_f,
            scattering_centers: vec![ScatteringCenter { delay: 0.0, amplitude }],
            diagnostics: Vec::new(),
        }
    }

    /// Relative L2 error of the response re-synthesised from the centers.
    pub fn reconstruction_error(&self) -> f64 {
        let rebuilt = synthesize_from_centers(&self.frequencies, &self.scattering_centers);
        relative_l2(&rebuilt, &self.sigma_f)
    }

    /// Band-averaged RCS, m^2.
    pub fn mean_rcs(&self) -> f64 {
        if self.sigma_f.is_empty() {
            return 0.0;
        }
        self.sigma_f.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.sigma_f.len() as f64
    }
}

/// `samples` uniformly spaced frequencies spanning `[start, start + bandwidth]`.
pub fn frequency_grid(start: f64, bandwidth: f64, samples: usize) -> Vec<f64> {
    let step = bandwidth / (samples.max(2) - 1) as f64;
    (0..samples).map(|k| start + k as f64 * step).collect()
}

pub(crate) fn check_uniform(frequencies: &[f64]) -> Result<(f64, f64)> {
    if frequencies.len() < 2 {
        return Err(SimError::InvalidParameter("need at least two frequency samples".into()));
    }
    let step = frequencies[1] - frequencies[0];
    if !(step > 0.0) {
        return Err(SimError::InvalidParameter("frequencies must be ascending".into()));
    }
    for (k, f) in frequencies.iter().enumerate() {
        let want = frequencies[0] + k as f64 * step;
        if (f - want).abs() > 1e-6 * step {
            return Err(SimError::InvalidParameter("frequency grid must be uniform".into()));
        }
    }
    Ok((frequencies[0], step))
}

/// `sigma_f(f) = sum_p a_p exp(-j 2 pi f (L_p - L_ref) / c)`.
///
/// Paths are summed in fixed-size chunks in order, so the result does not
/// depend on the thread count.
pub fn frequency_response(
    paths: &[RayPath],
    reference_length: f64,
    frequencies: &[f64],
) -> Result<(Vec<Complex64>, Vec<Diagnostic>)> {
    let (f0, df) = check_uniform(frequencies)?;
    let n = frequencies.len();
    if paths.is_empty() {
        return Ok((vec![Complex64::new(0.0, 0.0); n], vec![Diagnostic::EmptyResponse]));
    }
    let partials: Vec<Vec<Complex64>> = paths
        .par_chunks(256)
        .map(|chunk| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for p in chunk {
                let delay = (p.path_length - reference_length) / SPEED_OF_LIGHT;
                let start = Complex64::from_polar(1.0, -2.0 * PI * (f0 * delay).fract());
                let step = Complex64::from_polar(1.0, -2.0 * PI * (df * delay).fract());
                let mut phasor = p.amplitude * start;
                for a in acc.iter_mut() {
                    *a += phasor;
                    phasor *= step;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Complex64::new(0.0, 0.0); n];
    for part in partials {
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    Ok((total, Vec::new()))
}

/// Response of a set of centers on a frequency grid.
pub fn synthesize_from_centers(frequencies: &[f64], centers: &[ScatteringCenter]) -> Vec<Complex64> {
    frequencies
        .iter()
        .map(|&f| {
            centers
                .iter()
                .map(|c| c.amplitude * steering(f, c.delay))
                .sum()
        })
        .collect()
}

pub(crate) fn relative_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        if num == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        (num / den).sqrt()
    }
}

/// Greedy extraction with least-squares refit: the strongest delay of the
/// residual is located on an oversampled delay spectrum, refined off-grid,
/// and all amplitudes are re-solved before the next pick. Stops at
/// `max_centers` or once the residual falls below 1% of the response.
pub fn extract_scattering_centers(
    frequencies: &[f64],
    sigma_f: &[Complex64],
    max_centers: usize,
) -> Result<Vec<ScatteringCenter>> {
    const TOLERANCE: f64 = 0.01;
    if frequencies.len() < 8 || sigma_f.len() != frequencies.len() {
        return Err(SimError::InvalidParameter(
            "center extraction needs at least 8 matching frequency samples".into(),
        ));
    }
    let (f0, df) = check_uniform(frequencies)?;
    let norm: f64 = sigma_f.iter().map(|s| s.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || max_centers == 0 {
        return Ok(Vec::new());
    }
    let n = sigma_f.len();
    let padded = n * DELAY_OVERSAMPLING;
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(padded);
    let window = 1.0 / df;
    let target = DVector::from_column_slice(sigma_f);

    let mut delays: Vec<f64> = Vec::new();
    let mut amplitudes: Vec<Complex64> = Vec::new();
    let mut residual = sigma_f.to_vec();
    while delays.len() < max_centers {
        let mut buf = vec![Complex64::new(0.0, 0.0); padded];
        buf[..n].copy_from_slice(&residual);
        ifft.process(&mut buf);
        let (m, _) = buf
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()).then(b.0.cmp(&a.0)))
            .expect("non-empty spectrum");
        let signed = if m > padded / 2 { m as f64 - padded as f64 } else { m as f64 };
        let coarse = signed * window / padded as f64;
        let tau = refine_delay(&residual, df, coarse, window / padded as f64);
        if delays.iter().any(|d| (d - tau).abs() < 1e-4 * window) {
            break;
        }
        delays.push(tau);
        let Some(sol) = solve_amplitudes(f0, df, &delays, &target) else {
            delays.pop();
            break;
        };
        amplitudes = sol;

        // Nearby centers bias each other's picks; cyclic passes re-centre
        // every delay against the others' current contribution.
        for _ in 0..if delays.len() > 1 { MAX_REFINE_PASSES } else { 0 } {
            let mut moved = 0.0f64;
            let mut resid = model_residual(f0, df, sigma_f, &delays, &amplitudes);
            for i in 0..delays.len() {
                let partial: Vec<Complex64> = resid
                    .iter()
                    .enumerate()
                    .map(|(k, r)| r + amplitudes[i] * steering(f0 + k as f64 * df, delays[i]))
                    .collect();
                let updated = refine_delay(&partial, df, delays[i], 0.5 * window / n as f64);
                moved = moved.max((updated - delays[i]).abs());
                delays[i] = updated;
                // keep the others' fit, re-project this one onto the partial
                let a: Complex64 = partial
                    .iter()
                    .enumerate()
                    .map(|(k, p)| p * steering(f0 + k as f64 * df, updated).conj())
                    .sum::<Complex64>()
                    / n as f64;
                amplitudes[i] = a;
                for (k, r) in resid.iter_mut().enumerate() {
                    *r = partial[k] - a * steering(f0 + k as f64 * df, updated);
                }
            }
            match solve_amplitudes(f0, df, &delays, &target) {
                Some(sol) => amplitudes = sol,
                None => break,
            }
            if moved < 1e-6 * window {
                break;
            }
        }
        residual = model_residual(f0, df, sigma_f, &delays, &amplitudes);
        let err = residual.iter().map(|r| r.norm_sqr()).sum::<f64>().sqrt() / norm;
        if err <= TOLERANCE {
            break;
        }
    }
    Ok(delays
        .into_iter()
        .zip(amplitudes)
        .map(|(delay, amplitude)| ScatteringCenter { delay, amplitude })
        .collect())
}

fn model_residual(
    f0: f64,
    df: f64,
    sigma_f: &[Complex64],
    delays: &[f64],
    amplitudes: &[Complex64],
) -> Vec<Complex64> {
    sigma_f
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let f = f0 + k as f64 * df;
            s - delays.iter().zip(amplitudes).map(|(&d, &a)| a * steering(f, d)).sum::<Complex64>()
        })
        .collect()
}

fn steering(f: f64, delay: f64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * (f * delay).fract())
}

/// Magnitude of the delay spectrum of `r` at an arbitrary delay.
fn delay_spectrum(r: &[Complex64], df: f64, tau: f64) -> f64 {
    let step = Complex64::from_polar(1.0, 2.0 * PI * (df * tau).fract());
    let mut ph = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for v in r {
        acc += v * ph;
        ph *= step;
    }
    acc.norm()
}

/// Golden-section search for the spectral peak within `coarse +- half_width`.
fn refine_delay(r: &[Complex64], df: f64, coarse: f64, half_width: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (coarse - half_width, coarse + half_width);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut v1, mut v2) = (delay_spectrum(r, df, x1), delay_spectrum(r, df, x2));
    for _ in 0..48 {
        if v1 > v2 {
            hi = x2;
            x2 = x1;
            v2 = v1;
            x1 = hi - g * (hi - lo);
            v1 = delay_spectrum(r, df, x1);
        } else {
            lo = x1;
            x1 = x2;
            v1 = v2;
            x2 = lo + g * (hi - lo);
            v2 = delay_spectrum(r, df, x2);
        }
    }
    0.5 * (lo + hi)
}

fn solve_amplitudes(f0: f64, df: f64, delays: &[f64], target: &DVector<Complex64>) -> Option<Vec<Complex64>> {
    let n = target.len();
    let basis = DMatrix::from_fn(n, delays.len(), |k, c| steering(f0 + k as f64 * df, delays[c]));
    let sol = basis.svd(true, true).solve(target, 1e-12).ok()?;
    Some(sol.iter().copied().collect())
}

/// Catmull-Rom resampling of a uniform response onto arbitrary frequencies,
/// holding the end values outside the band.
pub fn resample_response(frequencies: &[f64], sigma_f: &[Complex64], at: f64) -> Complex64 {
    let n = sigma_f.len();
    if n == 1 {
        return sigma_f[0];
    }
    let df = frequencies[1] - frequencies[0];
    let x = (at - frequencies[0]) / df;
    if x <= 0.0 {
        return sigma_f[0];
    }
    if x >= (n - 1) as f64 {
        return sigma_f[n - 1];
    }
    let i = x.floor() as usize;
    let t = x - i as f64;
    let p = |j: isize| sigma_f[j.clamp(0, n as isize - 1) as usize];
    let (p0, p1, p2, p3) = (p(i as isize - 1), p(i as isize), p(i as isize + 1), p(i as isize + 2));
    let t2 = t * t;
    let t3 = t2 * t;
    (p1 * 2.0
        + (p2 - p0) * t
        + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * t2
        + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * t3)
        * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Vec3;

    fn path(length: f64, amplitude: f64) -> RayPath {
        RayPath {
            entry: Vec3::zeros(),
            bounce_points: vec![Vec3::new(0.0, length / 2.0, 0.0)],
            exit: Vec3::zeros(),
            path_length: length,
            amplitude: Complex64::new(amplitude, 0.0),
            chain_gain: 1.0,
            forward_bounces: 0,
            backward_bounces: 0,
            terminal_facet: 0,
        }
    }

    fn grid() -> Vec<f64> {
        frequency_grid(77e9, 0.625e9, 128)
    }

    #[test]
    fn single_path_is_flat() {
        let (s, d) = frequency_response(&[path(10.3, 2.0)], 10.0, &grid()).unwrap();
        assert!(d.is_empty());
        assert!(s.iter().all(|v| (v.norm() - 2.0).abs() < 1e-9));
    }

    #[test]
    fn half_wave_difference_cancels() {
        let f = 77e9;
        let lambda = SPEED_OF_LIGHT / f;
        let paths = [path(10.0, 1.0), path(10.0 + lambda / 2.0, 1.0)];
        let (s, _) = frequency_response(&paths, 10.0, &[f, f + 1e6]).unwrap();
        assert!(s[0].norm() < 1e-9);
    }

    #[test]
    fn empty_paths_flagged() {
        let (s, d) = frequency_response(&[], 0.0, &grid()).unwrap();
        assert!(s.iter().all(|v| v.norm() == 0.0));
        assert_eq!(d, vec![Diagnostic::EmptyResponse]);
        assert!(extract_scattering_centers(&grid(), &s, 4).unwrap().is_empty());
    }

    #[test]
    fn non_uniform_grid_rejected() {
        assert!(frequency_response(&[], 0.0, &[1.0, 2.0, 4.0]).is_err());
        assert!(frequency_response(&[], 0.0, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn single_center_delay() {
        let dl = 1.7;
        let (s, _) = frequency_response(&[path(10.0 + dl, 0.5)], 10.0, &grid()).unwrap();
        let c = extract_scattering_centers(&grid(), &s, 8).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].delay - dl / SPEED_OF_LIGHT).abs() < 1e-13, "{}", c[0].delay);
        assert!((c[0].amplitude.norm() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn two_centers_one_meter_apart() {
        let paths = [path(10.0, 1.0), path(11.0, 0.6)];
        let (s, _) = frequency_response(&paths, 10.0, &grid()).unwrap();
        let c = extract_scattering_centers(&grid(), &s, 8).unwrap();
        assert_eq!(c.len(), 2);
        let sep = (c[0].delay - c[1].delay).abs();
        assert!((sep - 3.3333e-9).abs() < 1e-12, "{sep}");
        let strongest = extract_scattering_centers(&grid(), &s, 1).unwrap();
        assert_eq!(strongest.len(), 1);
        assert!(strongest[0].delay.abs() < 0.1e-9);
    }

    #[test]
    fn negative_delays_resolved() {
        let paths = [path(9.2, 1.0)];
        let (s, _) = frequency_response(&paths, 10.0, &grid()).unwrap();
        let c = extract_scattering_centers(&grid(), &s, 2).unwrap();
        assert!((c[0].delay + 0.8 / SPEED_OF_LIGHT).abs() < 1e-13);
    }

    #[test]
    fn resampling_holds_edges_and_interpolates() {
        let f = grid();
        let s: Vec<Complex64> = f.iter().map(|&x| Complex64::new((x - 77e9) * 1e-9, 1.0)).collect();
        assert_eq!(resample_response(&f, &s, 1e9), s[0]);
        assert_eq!(resample_response(&f, &s, 1e12), s[127]);
        let mid = resample_response(&f, &s, 77.3e9);
        assert!((mid.re - 0.3).abs() < 1e-9);
    }
}
