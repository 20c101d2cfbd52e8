use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::diagnostics::Diagnostic;
use crate::scalar::Real;
use crate::waveform::DataCube;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for one (seed, frame, channel, chirp) cell, so the
/// draw does not depend on evaluation order.
pub fn cell_rng(seed: u64, frame: u64, channel: usize, chirp: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = splitmix64(seed) ^ splitmix64(frame.wrapping_add(0x6a09_e667));
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(((channel as u64) << 32) | chirp as u64);
    rng
}

/// Adds circular complex white Gaussian noise at `snr_db` below the mean
/// signal power of the strongest channel. `snr_db = inf` leaves the cube
/// untouched. An all-zero cube is referenced to unit power.
pub fn add_noise<T: Real>(cube: &mut DataCube<T>, snr_db: f64, seed: u64, frame: u64) -> Option<Diagnostic> {
    if snr_db == f64::INFINITY {
        return None;
    }
    let strongest = cube.channel_power().into_iter().fold(0.0, f64::max);
    let (reference, diagnostic) = if strongest > 0.0 {
        (strongest, None)
    } else {
        (1.0, Some(Diagnostic::ZeroSignalNoiseReference))
    };
    let sigma = (reference / 10f64.powf(snr_db / 10.0) / 2.0).sqrt();
    let (channels, _, chirps) = cube.samples.dim();
    for o in 0..channels {
        for n in 0..chirps {
            let mut rng = cell_rng(seed, frame, o, n);
            let mut column = cube.samples.slice_mut(ndarray::s![o, .., n]);
            for v in column.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *v = *v + Complex::new(T::from_f64_lossy(re * sigma), T::from_f64_lossy(im * sigma));
            }
        }
    }
    diagnostic
}
