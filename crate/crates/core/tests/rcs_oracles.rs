//! Ray tracer against closed-form optical-region RCS.

use mmwsim::rcs::{
    analytic_rcs, frequency_grid, trace_bidirectional, CanonicalShape, ConnectionSplit,
    ScatterResponse, ScatteringModel, TraceParams, TriangleMesh,
};
use mmwsim::scene::Vec3;

const F0: f64 = 77.0e9;
const BAND: f64 = 0.625e9;

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn params(max_bounce: usize, density: f64) -> TraceParams {
    TraceParams {
        max_bounce,
        rays_per_wavelength: density,
        frequency: F0 + BAND / 2.0,
        ..TraceParams::default()
    }
}

fn band_rcs(mesh: TriangleMesh, incident: Vec3, p: &TraceParams) -> (f64, ScatterResponse) {
    let model = ScatteringModel::new(mesh).unwrap();
    let trace = trace_bidirectional(&model, &incident, p).unwrap();
    let resp = ScatterResponse::from_trace(&trace, frequency_grid(F0, BAND, 128), 64).unwrap();
    (resp.mean_rcs(), resp)
}

#[test]
fn plate_broadside() {
    let (a, b) = (0.3, 0.3);
    let p = params(1, 4.0);
    let (sigma, _) = band_rcs(TriangleMesh::plate(a, b), Vec3::y(), &p);
    let want = analytic_rcs(CanonicalShape::Plate { a, b }, p.frequency, 0.0).unwrap();
    eprintln!("plate {:.3} dBsm vs {:.3}", db(sigma), db(want));
    assert!((db(sigma) - db(want)).abs() < 1.0);
}

#[test]
fn sphere_band_average() {
    let r = 0.1;
    let p = params(3, 4.0);
    let (sigma, _) = band_rcs(TriangleMesh::icosphere(r, 5), Vec3::new(0.3, 1.0, -0.2).normalize(), &p);
    let want = analytic_rcs(CanonicalShape::Sphere { radius: r }, p.frequency, 0.0).unwrap();
    eprintln!("sphere {:.3} dBsm vs {:.3}", db(sigma), db(want));
    assert!((db(sigma) - db(want)).abs() < 2.0);
}

#[test]
fn dihedral_peak() {
    let (a, b) = (0.2, 0.2);
    let p = params(2, 4.0);
    let (sigma, _) = band_rcs(TriangleMesh::dihedral(a, b), Vec3::y(), &p);
    let want = analytic_rcs(CanonicalShape::Dihedral { a, b }, p.frequency, 0.0).unwrap();
    eprintln!("dihedral {:.3} dBsm vs {:.3}", db(sigma), db(want));
    assert!((db(sigma) - db(want)).abs() < 2.0);

    let mut swapped = p;
    swapped.split = ConnectionSplit::BackwardHeavy;
    let (sigma_b, _) = band_rcs(TriangleMesh::dihedral(a, b), Vec3::y(), &swapped);
    eprintln!("dihedral swapped {:.3}", db(sigma_b));
}
