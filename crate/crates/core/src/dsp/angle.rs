use ndarray::Array3;
use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Result, SimError};
use crate::scalar::Real;

/// Angle between the line of sight and the array broadside plane (the cone
/// angle), from a zero-padded FFT across the channels of one RDM cell.
///
/// A wave from the `+axis` side reaches higher-index elements first, so the
/// IF phase falls along the array: `sin(theta) = -lambda dphi / (2 pi d)`.
/// The FFT peak is refined by a parabola through its neighbours.
pub fn angle_fft<T: Real>(
    doppler: &Array3<Complex<T>>,
    range_bin: usize,
    doppler_bin: usize,
    fft_size: usize,
    spacing: f64,
    wavelength: f64,
) -> Result<f64> {
    let (channels, kr, kd) = doppler.dim();
    if channels < 2 {
        return Err(SimError::AngleUnavailable);
    }
    if range_bin >= kr || doppler_bin >= kd {
        return Err(SimError::InvalidParameter(format!("cell ({range_bin}, {doppler_bin}) outside the cube")));
    }
    let size = fft_size.max(channels).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); size];
    for o in 0..channels {
        let v = doppler[[o, range_bin, doppler_bin]];
        buf[o] = Complex::new(v.re.to_f64_lossy(), v.im.to_f64_lossy());
    }
    FftPlanner::<f64>::new().plan_fft_forward(size).process(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|c| c.norm()).collect();
    let k = (0..size).max_by(|&a, &b| mag[a].total_cmp(&mag[b])).unwrap_or(0);
    let (l, c, r) = (mag[(k + size - 1) % size], mag[k], mag[(k + 1) % size]);
    let denom = l - 2.0 * c + r;
    let offset = if denom.abs() > 0.0 { (0.5 * (l - r) / denom).clamp(-0.5, 0.5) } else { 0.0 };
    // cycles per element, folded into [-0.5, 0.5)
    let mut nu = (k as f64 + offset) / size as f64;
    if nu >= 0.5 {
        nu -= 1.0;
    }
    let s = (-wavelength * nu / spacing).clamp(-1.0, 1.0);
    Ok(s.asin())
}

/// Horizontal azimuth from the cone angle of a horizontal array at height
/// `height` above a ground point at slant `range`. `None` when the point is
/// not below the radar's horizon (`range <= height`).
pub fn cone_to_azimuth(cone: f64, range: f64, height: f64) -> Option<f64> {
    if !(range > height) {
        return None;
    }
    let ground = (range * range - height * height).sqrt();
    Some((cone.sin() * range / ground).clamp(-1.0, 1.0).asin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn steer(theta: f64, channels: usize) -> Array3<Complex<f64>> {
        Array3::from_shape_fn((channels, 1, 1), |(o, _, _)| Complex::from_polar(1.0, -PI * theta.sin() * o as f64))
    }

    #[test]
    fn equal_phases_point_broadside() {
        let d = Array3::from_elem((4, 2, 2), Complex::new(1.0, 0.5));
        assert!(angle_fft(&d, 1, 1, 64, 0.5, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn half_cycle_step_is_endfire() {
        let d = Array3::from_shape_fn((4, 1, 1), |(o, _, _)| Complex::from_polar(1.0, PI * o as f64));
        let th = angle_fft(&d, 0, 0, 64, 0.5, 1.0).unwrap();
        assert!((th.abs() - PI / 2.0).abs() < 1e-6, "{th}");
    }

    #[test]
    fn steering_vector_recovered() {
        for deg in [-40.0f64, -10.0, 10.0, 25.0] {
            let th = angle_fft(&steer(deg.to_radians(), 4), 0, 0, 64, 0.5, 1.0).unwrap();
            assert!((th.to_degrees() - deg).abs() < 1.8, "{deg}: {}", th.to_degrees());
        }
    }

    #[test]
    fn single_channel_has_no_angle() {
        assert!(matches!(angle_fft(&steer(0.1, 1), 0, 0, 64, 0.5, 1.0), Err(SimError::AngleUnavailable)));
    }

    #[test]
    fn cone_to_ground_azimuth() {
        // point at (2, 40, 0) seen from 6 m up
        let r = (4.0f64 + 1600.0 + 36.0).sqrt();
        let cone = (2.0 / r).asin();
        let az = cone_to_azimuth(cone, r, 6.0).unwrap();
        assert!((az - 2.0f64.atan2(40.0)).abs() < 1e-12);
        assert!(cone_to_azimuth(0.1, 6.0, 6.0).is_none());
    }
}
