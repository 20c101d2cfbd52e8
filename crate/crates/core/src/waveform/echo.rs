use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::diagnostics::Diagnostic;
use crate::error::{Result, SimError};
use crate::rcs::{check_uniform, frequency_grid, resample_response, ScatteringCenter};
use crate::scalar::SPEED_OF_LIGHT;
use crate::waveform::ChirpConfig;

/// Edge taper applied to the extended transmit record in the
/// frequency-domain path, s.
const TAPER_TIME: f64 = 1.0e-6;

/// Transmit phase in cycles at baseband time `t` (carrier included),
/// reduced modulo one.
fn tx_cycles(cfg: &ChirpConfig, t: f64) -> f64 {
    ((cfg.start_frequency * t).rem_euclid(1.0) + (0.5 * cfg.slope * t * t).rem_euclid(1.0)).rem_euclid(1.0)
}

/// Complex transmit samples `exp(j (2 pi (f0 t + mu t^2 / 2) + phi0))`.
pub fn transmit_chirp(cfg: &ChirpConfig) -> Vec<Complex64> {
    (0..cfg.samples_per_chirp)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * tx_cycles(cfg, cfg.sample_time(k)) + cfg.initial_phase))
        .collect()
}

/// The real sine-form chirp `sin(2 pi (f0 t + mu t^2 / 2) + phi0)`.
///
/// It equals `Re{-j x_T}`: the complex form lags the sine form by a quarter
/// cycle.
pub fn real_chirp(cfg: &ChirpConfig) -> Vec<f64> {
    (0..cfg.samples_per_chirp)
        .map(|k| (2.0 * PI * tx_cycles(cfg, cfg.sample_time(k)) + cfg.initial_phase).sin())
        .collect()
}

/// Radar equation: received power for a target of RCS `sigma` at `range`.
pub fn received_power(link: &super::LinkBudget, sigma: f64, range: f64, wavelength: f64) -> Result<f64> {
    if !(range > 0.0) {
        return Err(SimError::InvalidParameter(format!("range must be positive, got {range}")));
    }
    Ok(link.tx_power * link.tx_gain * sigma * link.rx_gain * wavelength * wavelength
        / ((4.0 * PI).powi(3) * range.powi(4)))
}

/// Round-trip delay at time `t` for a target at `range0` moving with range
/// rate `range_rate` (negative when approaching).
pub fn echo_delay(range0: f64, range_rate: f64, t: f64) -> f64 {
    debug_assert!(range0 > 0.0);
    2.0 * (range0 + range_rate * t) / SPEED_OF_LIGHT
}

/// Target range and range rate at the start of one chirp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoGeometry {
    pub range: f64,
    /// dR/dt, m/s; negative when approaching.
    pub range_rate: f64,
}

impl EchoGeometry {
    /// Constant radial motion: geometry of chirp `index` for a target at
    /// `range0` when chirp 0 starts.
    pub fn at_chirp(cfg: &ChirpConfig, range0: f64, range_rate: f64, index: usize) -> Self {
        let t = index as f64 * cfg.chirp_period();
        Self { range: range0 + range_rate * t, range_rate }
    }
}

/// Adds the dechirped echo of `centers` to `out`.
///
/// Each center `c` contributes `scale_c * conj(a_c) * exp(j 2 pi (f0 tau +
/// mu t tau - mu tau^2 / 2))` with `tau(t) = 2 (R + R' t) / c + tau_c -
/// element_path / c`. `element_path` is the far-field path advance of the
/// receiving virtual element, m.
pub fn accumulate_echo(
    out: &mut [Complex64],
    cfg: &ChirpConfig,
    centers: &[ScatteringCenter],
    scales: &[f64],
    geometry: &EchoGeometry,
    element_path: f64,
) -> Result<()> {
    if scales.len() != centers.len() {
        return Err(SimError::InvalidParameter("one scale per scattering center required".into()));
    }
    let m = cfg.samples_per_chirp;
    if out.len() != m {
        return Err(SimError::InvalidParameter("output length must equal samples_per_chirp".into()));
    }
    let base = 2.0 * geometry.range / SPEED_OF_LIGHT - element_path / SPEED_OF_LIGHT;
    let rate = 2.0 * geometry.range_rate / SPEED_OF_LIGHT;
    let t_end = cfg.sample_time(m - 1);
    for (index, c) in centers.iter().enumerate() {
        let tau0 = base + c.delay;
        let tau1 = tau0 + rate * t_end;
        let bad = [tau0, tau1].into_iter().find(|&t| !(t >= 0.0 && t < cfg.max_delay()));
        if let Some(delay) = bad {
            return Err(SimError::ClippedTarget { index, delay });
        }
    }
    let (f0, mu) = (cfg.start_frequency, cfg.slope);
    for (c, &scale) in centers.iter().zip(scales) {
        let amp = c.amplitude.conj() * scale;
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let tau0 = base + c.delay;
        for (k, o) in out.iter_mut().enumerate() {
            let t = cfg.sample_time(k);
            let tau = tau0 + rate * t;
            let cycles = (f0 * tau).rem_euclid(1.0) + (mu * t * tau - 0.5 * mu * tau * tau);
            *o += amp * Complex64::from_polar(1.0, 2.0 * PI * cycles.rem_euclid(1.0));
        }
    }
    Ok(())
}

/// Dechirped IF samples of one chirp on one channel.
pub fn dechirped_echo(
    cfg: &ChirpConfig,
    centers: &[ScatteringCenter],
    scales: &[f64],
    geometry: &EchoGeometry,
    element_path: f64,
) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.samples_per_chirp];
    accumulate_echo(&mut out, cfg, centers, scales, geometry, element_path)?;
    Ok(out)
}

/// Independent IF synthesis through the convolution theorem.
///
/// The transmit chirp is sampled at a multiple of the ADC rate wide enough
/// for its whole sweep, transformed, multiplied by `scale * sigma_f(f) *
/// exp(-j 2 pi f tau0)` with `tau0 = 2 range0 / c`, transformed back to the
/// received signal and mixed with the transmit chirp; the result is decimated
/// to the ADC grid. The target is static. `sigma_f` is interpolated between
/// its samples and held outside its band; early samples see frequencies down
/// to `f0 - mu * tau`, so a grid that stops at `f0` only matches the
/// time-domain echo of a delayed center to first order there.
pub fn frequency_domain_echo(
    cfg: &ChirpConfig,
    frequencies: &[f64],
    sigma_f: &[Complex64],
    scale: f64,
    range0: f64,
) -> Result<(Vec<Complex64>, Vec<Diagnostic>)> {
    cfg.validate()?;
    if sigma_f.len() != frequencies.len() {
        return Err(SimError::InvalidParameter("sigma_f and frequencies differ in length".into()));
    }
    let (_, df) = check_uniform(frequencies)?;
    if !(range0 > 0.0) {
        return Err(SimError::InvalidParameter("range must be positive".into()));
    }
    let mut diagnostics = Vec::new();
    let native = frequency_grid(cfg.start_frequency, cfg.bandwidth(), frequencies.len());
    let on_grid = native.iter().zip(frequencies).all(|(a, b)| (a - b).abs() <= 1e-6 * df);

    let bandwidth = cfg.bandwidth();
    let fs = cfg.sample_rate;
    let tau0 = 2.0 * range0 / SPEED_OF_LIGHT;
    // sigma_t is confined to the unambiguous delay window of the grid
    let half_window = 0.5 / df;
    let lead_time = tau0 + half_window + TAPER_TIME;
    // baseband sweep of the whole record, lead rounded up to an ADC sample
    let below = cfg.slope * (lead_time + 1.0 / fs);
    let sweep = below + bandwidth + cfg.slope * (half_window + TAPER_TIME);
    let oversample = ((1.5 * sweep / fs).ceil() as usize).max(2);
    let fh = oversample as f64 * fs;
    let lead = (lead_time * fs).ceil() as usize * oversample;
    let span = lead + cfg.samples_per_chirp * oversample + ((half_window + TAPER_TIME) * fh).ceil() as usize;
    let n = span.next_power_of_two();
    if !on_grid {
        diagnostics.push(Diagnostic::Resampled { from: frequencies.len(), to: n });
    }
    let t0 = -(lead as f64) / fh;
    let taper_len = (TAPER_TIME * fh).ceil() as usize;

    let tx_base = |t: f64| {
        // carrier removed: baseband sweep from 0 Hz at t = 0
        Complex64::from_polar(1.0, 2.0 * PI * (0.5 * cfg.slope * t * t).rem_euclid(1.0) + cfg.initial_phase)
    };
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| {
            let w = if i < taper_len {
                0.5 - 0.5 * (PI * i as f64 / taper_len as f64).cos()
            } else if i >= span {
                0.0
            } else if i >= span - taper_len {
                0.5 - 0.5 * (PI * (span - 1 - i) as f64 / taper_len as f64).cos()
            } else {
                1.0
            };
            tx_base(t0 + i as f64 / fh) * w
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut x);

    let bin = fh / n as f64;
    let f_low = -below - 0.5 * (fh - sweep);
    for (m, v) in x.iter_mut().enumerate() {
        let mut f = m as f64 * bin;
        if f >= fh + f_low {
            f -= fh;
        }
        let s = resample_response(frequencies, sigma_f, cfg.start_frequency + f);
        // window start t0 shifts the delay kernel by exp(-j 2 pi f tau0) only;
        // the carrier part of the delay is applied as a constant below
        let delay = Complex64::from_polar(1.0, -2.0 * PI * (f * tau0).rem_euclid(1.0));
        *v *= s * delay * scale;
    }
    planner.plan_fft_inverse(n).process(&mut x);
    let carrier = Complex64::from_polar(1.0, -2.0 * PI * (cfg.start_frequency * tau0).rem_euclid(1.0));
    let norm = 1.0 / n as f64;
    let out = (0..cfg.samples_per_chirp)
        .map(|k| {
            let i = lead + k * oversample;
            let t = t0 + i as f64 / fh;
            let rx = x[i] * norm * carrier;
            tx_base(t) * rx.conj()
        })
        .collect();
    Ok((out, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::LinkBudget;

    fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn chirp_starts_at_one_and_is_unit_modulus() {
        let cfg = ChirpConfig::default();
        let x = transmit_chirp(&cfg);
        assert_eq!(x[0], Complex64::new(1.0, 0.0));
        assert!(x.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn instantaneous_frequency_mid_chirp() {
        // 2 GHz sampling of a slow carrier so the phase derivative is resolvable
        let cfg = ChirpConfig { start_frequency: 10.0e6, sample_rate: 2.0e9, samples_per_chirp: 4096, ..ChirpConfig::default() };
        let x = transmit_chirp(&cfg);
        let k = 2048;
        let dphi = (x[k + 1] * x[k].conj()).arg();
        let f = dphi * cfg.sample_rate / (2.0 * PI);
        let t_mid = (k as f64 + 0.5) / cfg.sample_rate;
        let want = cfg.start_frequency + cfg.slope * t_mid;
        let bin = cfg.sample_rate / cfg.samples_per_chirp as f64;
        assert!((f - want).abs() < bin, "{f} vs {want}");
    }

    #[test]
    fn sine_form_is_quarter_cycle_shift() {
        let cfg = ChirpConfig { initial_phase: 0.3, ..ChirpConfig::default() };
        let z = transmit_chirp(&cfg);
        let r = real_chirp(&cfg);
        for (c, s) in z.iter().zip(&r) {
            assert_eq!((c * Complex64::new(0.0, -1.0)).re, *s);
        }
    }

    #[test]
    fn radar_equation() {
        let link = LinkBudget { tx_power: 1.0, tx_gain: 1.0, rx_gain: 1.0, snr_db: 20.0 };
        let lambda = 3.0e8 / 77.0e9;
        assert_eq!(received_power(&link, 0.0, 40.0, lambda).unwrap(), 0.0);
        let p1 = received_power(&link, 1.0, 40.0, lambda).unwrap();
        let p2 = received_power(&link, 1.0, 80.0, lambda).unwrap();
        assert!((p1 / p2 - 16.0).abs() < 1e-12);
        let want = lambda * lambda / ((4.0 * PI).powi(3) * 40f64.powi(4));
        assert!((p1 - want).abs() < 1e-15 * want);
        assert!(received_power(&link, 1.0, 0.0, lambda).is_err());
    }

    #[test]
    fn delay_law() {
        assert!((echo_delay(40.0, 0.0, 123.0) - 266.666_666_666e-9).abs() < 1e-17);
        assert!((echo_delay(40.0, -10.0, 1e-3) - 2.0 * (40.0 - 0.01) / 3e8).abs() < 1e-20);
    }

    fn point() -> Vec<ScatteringCenter> {
        vec![ScatteringCenter { delay: 0.0, amplitude: Complex64::new(1.0, 0.0) }]
    }

    #[test]
    fn static_point_beat_frequency() {
        let cfg = ChirpConfig::default();
        let g = EchoGeometry { range: 40.0, range_rate: 0.0 };
        let x = dechirped_echo(&cfg, &point(), &[1.0], &g, 0.0).unwrap();
        let dphi = (x[101] * x[100].conj()).arg();
        // complex sampling: the beat tone is only known modulo the sample rate
        let f = (dphi * cfg.sample_rate / (2.0 * PI)).rem_euclid(cfg.sample_rate);
        assert!((f - 3.333_333e6).abs() < 10.0, "{f}");
    }

    #[test]
    fn empty_and_static_chirp_pairs() {
        let cfg = ChirpConfig::default();
        let g = EchoGeometry { range: 40.0, range_rate: 0.0 };
        assert!(dechirped_echo(&cfg, &[], &[], &g, 0.0).unwrap().iter().all(|v| v.norm() == 0.0));
        let a = dechirped_echo(&cfg, &point(), &[1.0], &EchoGeometry::at_chirp(&cfg, 40.0, 0.0, 0), 0.0).unwrap();
        let b = dechirped_echo(&cfg, &point(), &[1.0], &EchoGeometry::at_chirp(&cfg, 40.0, 0.0, 1), 0.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn out_of_window_center_is_named() {
        let cfg = ChirpConfig::default();
        let mut c = point();
        c.push(ScatteringCenter { delay: 1e-6, amplitude: Complex64::new(1.0, 0.0) });
        let err = dechirped_echo(&cfg, &c, &[1.0, 1.0], &EchoGeometry { range: 40.0, range_rate: 0.0 }, 0.0);
        assert!(matches!(err, Err(SimError::ClippedTarget { index: 1, .. })));
    }

    #[test]
    fn frequency_path_matches_point_target() {
        let cfg = ChirpConfig::default();
        let freqs = frequency_grid(cfg.start_frequency, cfg.bandwidth(), 128);
        let a = Complex64::new(0.3, -0.7);
        let (x, d) = frequency_domain_echo(&cfg, &freqs, &vec![a; 128], 2.0, 40.0).unwrap();
        assert!(d.is_empty());
        let c = [ScatteringCenter { delay: 0.0, amplitude: a }];
        let y = dechirped_echo(&cfg, &c, &[2.0], &EchoGeometry { range: 40.0, range_rate: 0.0 }, 0.0).unwrap();
        assert!(rel_l2(&x, &y) < 1e-6, "{}", rel_l2(&x, &y));
    }

    #[test]
    fn frequency_path_zero_and_shift() {
        let cfg = ChirpConfig::default();
        let freqs = frequency_grid(cfg.start_frequency, cfg.bandwidth(), 128);
        let (x, _) = frequency_domain_echo(&cfg, &freqs, &vec![Complex64::new(0.0, 0.0); 128], 1.0, 30.0).unwrap();
        assert!(x.iter().all(|v| v.norm() == 0.0));
        // linear phase = extra delay: the beat frequency moves by mu * dtau
        let dtau = 4.0e-9;
        let s: Vec<Complex64> = freqs.iter().map(|&f| Complex64::from_polar(1.0, -2.0 * PI * f * dtau)).collect();
        let (x, _) = frequency_domain_echo(&cfg, &freqs, &s, 1.0, 30.0).unwrap();
        let f = ((x[101] * x[100].conj()).arg() * cfg.sample_rate / (2.0 * PI)).rem_euclid(cfg.sample_rate);
        let want = cfg.slope * (2.0 * 30.0 / 3e8 + dtau);
        assert!((f - want).abs() < 1.0e3, "{f} vs {want}");
        let (_, d) = frequency_domain_echo(&cfg, &freqs[..64], &s[..64], 1.0, 30.0).unwrap();
        assert!(matches!(d.as_slice(), [Diagnostic::Resampled { from: 64, .. }]));
    }
}
