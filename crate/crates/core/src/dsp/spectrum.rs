use ndarray::{Array2, Array3, Axis};
use num_complex::Complex;
use rustfft::FftPlanner;

use crate::dsp::Window;
use crate::error::{Result, SimError};
use crate::scalar::{Real, SPEED_OF_LIGHT};
use crate::waveform::{DataCube, RadarConfig};

/// Bin-to-physical mapping for one radar configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinMapping {
    pub range_fft_size: usize,
    pub doppler_fft_size: usize,
    pub sample_rate: f64,
    pub slope: f64,
    pub wavelength: f64,
    pub chirp_period: f64,
}

impl BinMapping {
    pub fn new(config: &RadarConfig) -> Self {
        Self {
            range_fft_size: config.chirp.samples_per_chirp.next_power_of_two(),
            doppler_fft_size: config.frame.chirps_per_frame.next_power_of_two(),
            sample_rate: config.chirp.sample_rate,
            slope: config.chirp.slope,
            wavelength: config.chirp.wavelength(),
            chirp_period: config.chirp.chirp_period(),
        }
    }

    /// `r = c f_IF / (2 mu)` with `f_IF = bin * fs / K_r`.
    pub fn range(&self, bin: f64) -> f64 {
        let f_if = bin * self.sample_rate / self.range_fft_size as f64;
        SPEED_OF_LIGHT * f_if / (2.0 * self.slope)
    }

    /// Chirp-to-chirp phase step of a (centred) Doppler bin, radians.
    pub fn doppler_phase(&self, bin: f64) -> f64 {
        let k = self.doppler_fft_size as f64;
        2.0 * std::f64::consts::PI * (bin - 0.5 * k) / k
    }

    /// Radial velocity, positive when approaching: `v = -lambda dphi / (4 pi Tc)`.
    /// The IF phase falls as an approaching target's delay shrinks, hence the sign.
    pub fn velocity(&self, bin: f64) -> f64 {
        -self.wavelength * self.doppler_phase(bin) / (4.0 * std::f64::consts::PI * self.chirp_period)
    }

    /// Fractional range bin of range `r` (inverse of [`BinMapping::range`]).
    pub fn range_bin(&self, r: f64) -> f64 {
        r * 2.0 * self.slope * self.range_fft_size as f64 / (SPEED_OF_LIGHT * self.sample_rate)
    }

    /// Fractional Doppler bin of velocity `v`, before wrapping into
    /// `0..K_d` (inverse of [`BinMapping::velocity`]).
    pub fn doppler_bin(&self, v: f64) -> f64 {
        let k = self.doppler_fft_size as f64;
        0.5 * k - 2.0 * k * self.chirp_period * v / self.wavelength
    }

    /// `v` folded into the unambiguous interval `(-max_speed, max_speed]`.
    pub fn wrap_velocity(&self, v: f64) -> f64 {
        let span = 2.0 * self.max_speed();
        let w = (v + self.max_speed()).rem_euclid(span) - self.max_speed();
        if w == -self.max_speed() { self.max_speed() } else { w }
    }

    /// Unambiguous speed `lambda / (4 Tc)`.
    pub fn max_speed(&self) -> f64 {
        self.wavelength / (4.0 * self.chirp_period)
    }

    pub fn range_axis(&self) -> Vec<f64> {
        (0..self.range_fft_size).map(|b| self.range(b as f64)).collect()
    }

    /// Velocity per Doppler bin; descends from `+max_speed` at bin 0.
    pub fn velocity_axis(&self) -> Vec<f64> {
        (0..self.doppler_fft_size).map(|b| self.velocity(b as f64)).collect()
    }
}

/// Range and radial velocity of an RDM cell.
pub fn bin_to_physical(range_bin: usize, doppler_bin: usize, config: &RadarConfig) -> (f64, f64) {
    let map = BinMapping::new(config);
    (map.range(range_bin as f64), map.velocity(doppler_bin as f64))
}

fn fft_along<T: Real>(data: &Array3<Complex<T>>, axis: Axis, taper: &[f64], size: usize, shift: bool) -> Array3<Complex<T>> {
    let mut dim = data.raw_dim();
    dim[axis.index()] = size;
    let mut out = Array3::from_elem(dim, Complex::new(T::zero(), T::zero()));
    let fft = FftPlanner::<T>::new().plan_fft_forward(size);
    let w: Vec<T> = taper.iter().map(|&v| T::from_f64_lossy(v)).collect();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); size];
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    for (src, mut dst) in data.lanes(axis).into_iter().zip(out.lanes_mut(axis)) {
        buf.iter_mut().for_each(|b| *b = Complex::new(T::zero(), T::zero()));
        for ((b, s), &wk) in buf.iter_mut().zip(src.iter()).zip(&w) {
            *b = *s * wk;
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        if shift {
            buf.rotate_left(size / 2);
        }
        dst.iter_mut().zip(&buf).for_each(|(d, b)| *d = *b);
    }
    out
}

/// Windowed fast-time FFT of every (channel, chirp), zero-padded to the next
/// power of two: `O x K_r x N`.
pub fn range_fft<T: Real>(cube: &DataCube<T>, window: Window) -> Result<Array3<Complex<T>>> {
    let m = cube.samples_per_chirp();
    if m < 2 {
        return Err(SimError::InvalidParameter("range FFT needs at least 2 samples per chirp".into()));
    }
    Ok(fft_along(&cube.samples, Axis(1), &window.coefficients(m), m.next_power_of_two(), false))
}

/// Windowed slow-time FFT of every (channel, range bin), zero-padded and
/// shifted so that zero Doppler sits at bin `K_d / 2`: `O x K_r x K_d`.
pub fn doppler_fft<T: Real>(profiles: &Array3<Complex<T>>, window: Window) -> Result<Array3<Complex<T>>> {
    let n = profiles.dim().2;
    if n < 2 {
        return Err(SimError::InvalidParameter("Doppler FFT needs at least 2 chirps".into()));
    }
    Ok(fft_along(profiles, Axis(2), &window.coefficients(n), n.next_power_of_two(), true))
}

/// Range-Doppler map: channel-summed power and its dB image.
#[derive(Debug, Clone, PartialEq)]
pub struct Rdm<T: Real> {
    /// Linear power, `K_r x K_d`.
    pub power: Array2<T>,
    /// `10 log10(power)`, floored at the smallest positive value of `T`.
    pub magnitude_db: Array2<T>,
    pub range_axis: Vec<f64>,
    pub velocity_axis: Vec<f64>,
}

impl<T: Real> Rdm<T> {
    pub fn from_power(power: Array2<T>, mapping: &BinMapping) -> Result<Self> {
        let (kr, kd) = power.dim();
        if kr != mapping.range_fft_size || kd != mapping.doppler_fft_size {
            return Err(SimError::InvalidParameter(format!(
                "RDM is {kr}x{kd}, mapping expects {}x{}",
                mapping.range_fft_size, mapping.doppler_fft_size
            )));
        }
        let floor = T::min_positive_value();
        let ten = T::from_f64_lossy(10.0);
        let magnitude_db = power.mapv(|p| ten * p.max(floor).log10());
        Ok(Self { power, magnitude_db, range_axis: mapping.range_axis(), velocity_axis: mapping.velocity_axis() })
    }

    pub fn range_bins(&self) -> usize {
        self.power.dim().0
    }

    pub fn doppler_bins(&self) -> usize {
        self.power.dim().1
    }

    /// (range bin, Doppler bin) of the strongest cell.
    pub fn peak(&self) -> (usize, usize) {
        let mut best = ((0, 0), T::neg_infinity());
        for (idx, &p) in self.power.indexed_iter() {
            if p > best.1 {
                best = (idx, p);
            }
        }
        best.0
    }
}

/// Noncoherent sum of `|X|^2` over channels.
pub fn form_rdm<T: Real>(doppler: &Array3<Complex<T>>, mapping: &BinMapping) -> Result<Rdm<T>> {
    let power = doppler.map(|c| c.norm_sqr()).sum_axis(Axis(0));
    Rdm::from_power(power, mapping)
}
