use std::io::{Read, Write};

use ndarray::Array3;
use num_complex::Complex;

use crate::error::{Result, SimError};
use crate::scalar::Real;

/// Magic bytes opening a binary cube dump.
pub const CUBE_MAGIC: [u8; 4] = *b"MMWC";

/// Size of the fixed binary header, bytes.
pub const CUBE_HEADER_LEN: usize = 32;

/// Complex IF samples indexed `[channel, fast-time sample, chirp]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCube<T: Real> {
    pub samples: Array3<Complex<T>>,
    pub sample_rate: f64,
    /// Hash of the configuration that produced the cube (0 when unknown).
    pub config_hash: u32,
}

impl<T: Real> DataCube<T> {
    pub fn zeros(channels: usize, samples_per_chirp: usize, chirps: usize, sample_rate: f64) -> Self {
        Self {
            samples: Array3::from_elem((channels, samples_per_chirp, chirps), Complex::new(T::zero(), T::zero())),
            sample_rate,
            config_hash: 0,
        }
    }

    pub fn channels(&self) -> usize {
        self.samples.dim().0
    }

    pub fn samples_per_chirp(&self) -> usize {
        self.samples.dim().1
    }

    pub fn chirps(&self) -> usize {
        self.samples.dim().2
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Mean `|x|^2` per channel.
    pub fn channel_power(&self) -> Vec<f64> {
        self.samples
            .outer_iter()
            .map(|ch| {
                let n = ch.len().max(1) as f64;
                ch.iter().map(|c| c.norm_sqr().to_f64_lossy()).sum::<f64>() / n
            })
            .collect()
    }

    /// Writes the little-endian dump: a 32-byte header
    /// `magic[4] | O u32 | M u32 | N u32 | sample_rate f64 | elem_size u16 |
    /// reserved u16 | config_hash u32`, then `(re, im)` pairs in
    /// channel-major, then sample, then chirp order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let (o, m, n) = self.samples.dim();
        let elem = std::mem::size_of::<T>() as u16;
        let mut header = Vec::with_capacity(CUBE_HEADER_LEN);
        header.extend_from_slice(&CUBE_MAGIC);
        for v in [o, m, n] {
            let v = u32::try_from(v).map_err(|_| SimError::InvalidParameter("cube too large".into()))?;
            header.extend_from_slice(&v.to_le_bytes());
        }
        header.extend_from_slice(&self.sample_rate.to_le_bytes());
        header.extend_from_slice(&elem.to_le_bytes());
        header.extend_from_slice(&0u16.to_le_bytes());
        header.extend_from_slice(&self.config_hash.to_le_bytes());
        debug_assert_eq!(header.len(), CUBE_HEADER_LEN);
        w.write_all(&header)?;
        let mut body = Vec::with_capacity(o * m * n * 2 * elem as usize);
        for c in self.samples.iter() {
            for part in [c.re, c.im] {
                if elem == 4 {
                    body.extend_from_slice(&(part.to_f64_lossy() as f32).to_le_bytes());
                } else {
                    body.extend_from_slice(&part.to_f64_lossy().to_le_bytes());
                }
            }
        }
        w.write_all(&body)?;
        Ok(())
    }

    /// Reads a dump written by [`DataCube::write_binary`]; either element
    /// width is accepted and converted to `T`.
    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; CUBE_HEADER_LEN];
        r.read_exact(&mut header)?;
        if header[..4] != CUBE_MAGIC {
            return Err(SimError::InvalidParameter("not a cube dump (bad magic)".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().expect("4 bytes")) as usize;
        let (o, m, n) = (u32_at(4), u32_at(8), u32_at(12));
        let sample_rate = f64::from_le_bytes(header[16..24].try_into().expect("8 bytes"));
        let elem = u16::from_le_bytes([header[24], header[25]]) as usize;
        let config_hash = u32_at(28) as u32;
        if elem != 4 && elem != 8 {
            return Err(SimError::InvalidParameter(format!("unsupported element size {elem}")));
        }
        let mut body = vec![0u8; o * m * n * 2 * elem];
        r.read_exact(&mut body)?;
        let value = |chunk: &[u8]| -> T {
            let v = if elem == 4 {
                f32::from_le_bytes(chunk.try_into().expect("4 bytes")) as f64
            } else {
                f64::from_le_bytes(chunk.try_into().expect("8 bytes"))
            };
            T::from_f64_lossy(v)
        };
        let data: Vec<Complex<T>> = body
            .chunks_exact(2 * elem)
            .map(|pair| Complex::new(value(&pair[..elem]), value(&pair[elem..])))
            .collect();
        let samples = Array3::from_shape_vec((o, m, n), data)
            .map_err(|e| SimError::InvalidParameter(format!("cube shape: {e}")))?;
        Ok(Self { samples, sample_rate, config_hash })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trip_and_header_layout() {
        let mut cube = DataCube::<f32>::zeros(2, 3, 4, 5.12e6);
        cube.config_hash = 0xdead_beef;
        for (i, v) in cube.samples.iter_mut().enumerate() {
            *v = Complex::new(i as f32, -(i as f32) * 0.5);
        }
        let mut buf = Vec::new();
        cube.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 24 * 8);
        assert_eq!(&buf[..4], b"MMWC");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 5.12e6);
        assert_eq!(u16::from_le_bytes([buf[24], buf[25]]), 4);
        let back = DataCube::<f32>::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, cube);
        let wide = DataCube::<f64>::read_binary(buf.as_slice()).unwrap();
        assert_eq!(wide.samples[[1, 2, 3]], Complex::new(23.0, -11.5));
    }

    #[test]
    fn bad_magic_rejected() {
        let buf = vec![0u8; 64];
        assert!(DataCube::<f64>::read_binary(buf.as_slice()).is_err());
    }
}
