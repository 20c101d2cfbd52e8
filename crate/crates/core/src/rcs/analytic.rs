//! Closed-form optical-region RCS used to validate the tracer.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Result, SimError};
use crate::scalar::wavelength;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanonicalShape {
    /// Flat plate, `a` along the rotation axis, `b` across it.
    Plate { a: f64, b: f64 },
    Sphere { radius: f64 },
    /// Right-angle dihedral, hinge length `a`, face width `b`.
    Dihedral { a: f64, b: f64 },
}

impl CanonicalShape {
    fn smallest_dimension(&self) -> (&'static str, f64) {
        match *self {
            CanonicalShape::Plate { a, b } => ("plate", a.min(b)),
            CanonicalShape::Sphere { radius } => ("sphere", radius),
            CanonicalShape::Dihedral { a, b } => ("dihedral", a.min(b)),
        }
    }
}

/// Monostatic RCS in m^2.
///
/// `incidence` is measured from broadside for the plate (rotation about its
/// `a` edge) and from the symmetry plane for the dihedral (rotation about the
/// hinge); the sphere ignores it. The dihedral value is the double-bounce term.
pub fn analytic_rcs(shape: CanonicalShape, frequency: f64, incidence: f64) -> Result<f64> {
    let lambda = wavelength(frequency);
    let (name, dim) = shape.smallest_dimension();
    if dim < 5.0 * lambda {
        return Err(SimError::OutOfRegime { shape: name, dimension: dim, min: 5.0 * lambda });
    }
    let k = 2.0 * PI / lambda;
    Ok(match shape {
        CanonicalShape::Plate { a, b } => {
            let x = k * b * incidence.sin();
            let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
            4.0 * PI * (a * b).powi(2) / lambda.powi(2) * (incidence.cos() * sinc).powi(2)
        }
        CanonicalShape::Sphere { radius } => PI * radius * radius,
        CanonicalShape::Dihedral { a, b } => {
            let off = incidence.abs();
            if off >= FRAC_PI_4 {
                0.0
            } else {
                16.0 * PI * (a * b).powi(2) * (FRAC_PI_4 - off).sin().powi(2) / lambda.powi(2)
            }
        }
    })
}
