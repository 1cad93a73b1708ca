//! Tour of the propagation-of-smallness machinery: three-circle
//! interpolation, the interval estimate, and the full measurable-set
//! certificate on a Chebyshev polynomial.
//!
//! ```bash
//! cargo run --release --example smallness_certificate
//! ```

use nullcontrol::analytic::{
    disc_interpolation_bound, disc_interpolation_certificate, interval_smallness_bound, polynomial_analytic_bound,
    smallness_bound_1d, three_circle_bound, TestFunction, UnitIntervalBound, GRID_RES_1D,
};
use nullcontrol::sets::{Interval, MeasurableSet1D};

fn main() {
    // --- three-circle interpolation -------------------------------------
    // sup |z²| on radii 1, 2, 4 is 1, 4, 16; the bound is exact for powers
    let (bound, theta) = three_circle_bound(1.0, 16.0, 1.0, 2.0, 4.0).unwrap();
    println!("three-circle: sup on middle radius ≤ {bound} (θ = {theta})");

    // --- interpolation from a small set ----------------------------------
    // a function ≤ 1 on the unit disc, ≤ 1e-12 on a set of measure 0.4
    let (b, n) = disc_interpolation_bound(1e-12, 0.4).unwrap();
    println!("disc estimate: sup on B_1/2 ≤ {b:.6} (best interpolation degree {n})");
    let cert = disc_interpolation_certificate(0.4).unwrap();
    println!("closed form:   N = {:.4}, γ = {:.6} -> N·ε^γ = {:.4}", cert.n, cert.theta,
        cert.eval(1e-12, 1.0));

    // --- interval version with quantified analyticity ---------------------
    let ub = UnitIntervalBound { m: 1.0, rho: 0.5 };
    let e = MeasurableSet1D::unit(&[[0.1, 0.2], [0.6, 0.75]]).unwrap();
    let rep = interval_smallness_bound(&ub, &e, 1e-8).unwrap();
    println!(
        "interval estimate: ‖f‖_[0,1] ≤ {:.6} via cell [{:.3}, {:.3}], {} chain steps, γ = {:.3e}",
        rep.bound, rep.cell.lo, rep.cell.hi, rep.chain_steps, rep.certificate.theta
    );

    // --- full certificate on T₈ ------------------------------------------
    // normalize T₈ so its verified analyticity bound has M = 1
    let t8 = [1.0, 0.0, -32.0, 0.0, 160.0, 0.0, -256.0, 0.0, 128.0];
    let raw = polynomial_analytic_bound(&t8, 0.0, 1.0, 1.0).unwrap();
    let coeffs: Vec<f64> = t8.iter().map(|c| c / raw.m).collect();
    let ab = polynomial_analytic_bound(&coeffs, 0.0, 1.0, 1.0).unwrap();
    let f = TestFunction::Polynomial { coeffs: coeffs.clone() };
    let e = MeasurableSet1D::new(&[[-0.2, 0.2]], Interval { lo: -0.5, hi: 0.5 }).unwrap();
    let rep = smallness_bound_1d(&ab, &e, &f, GRID_RES_1D).unwrap();
    let mut sup: f64 = 0.0;
    for k in 0..=4000 {
        let x = -1.0 + 2.0 * k as f64 / 4000.0;
        sup = sup.max(f.eval1(x).abs());
    }
    println!(
        "T₈ certificate: avg over E = {:.3e}, certified sup ≤ {:.3e}, true sup = {:.3e}",
        rep.data, rep.bound, sup
    );
    println!(
        "certificate (N, θ) = ({:.4}, {:.4});  sound: {}",
        rep.certificate.n,
        rep.certificate.theta,
        rep.bound >= sup
    );
}
