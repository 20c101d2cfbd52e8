use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Taper applied before an FFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    #[default]
    Hann,
    Hamming,
}

impl Window {
    /// Periodic (DFT-even) coefficients of length `len`.
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        let n = len.max(1) as f64;
        (0..len)
            .map(|k| {
                let c = (2.0 * PI * k as f64 / n).cos();
                match self {
                    Window::Rectangular => 1.0,
                    Window::Hann => 0.5 - 0.5 * c,
                    Window::Hamming => 0.54 - 0.46 * c,
                }
            })
            .collect()
    }
}
