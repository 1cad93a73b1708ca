//! Cross-validation of the spectral pipeline against an independent
//! Crank-Nicolson grid solver: the synthesized control is replayed on the
//! grid and the final states compared, plus a convergence study on the
//! pure-decay benchmark.
//!
//! ```bash
//! cargo run --release --example cross_validate
//! ```

use nullcontrol::control::synthesize;
use nullcontrol::sets::MeasurableSet1D;
use nullcontrol::simulate::{crank_nicolson, cross_validate, GridState};
use nullcontrol::spectral::sine_basis;
use rand::{Rng, SeedableRng};

fn main() {
    let pi = std::f64::consts::PI;

    // convergence of the scheme on a known solution
    println!("pure-decay convergence (u₀ = √2 sin(πx), t = 0.1):");
    let b1 = sine_basis(1);
    for (n, dt, steps) in [(127, 2e-3, 50), (255, 1e-3, 100), (511, 5e-4, 200)] {
        let g0 = GridState::from_modes(&b1, &[1.0], n, 0.0);
        let out = crank_nicolson(&g0, &|_| 1.0, None, dt, steps);
        let decay = (-pi * pi * 0.1).exp();
        let err = (0..n)
            .map(|i| (out.values[i] - decay * 2f64.sqrt() * (pi * g0.x(i)).sin()).abs())
            .fold(0.0f64, f64::max)
            .max(0.0);
        println!("  grid {n:>4}, dt {dt:>7}: max error {err:.4e}");
    }

    // replay a controlled run on the grid
    let omega = MeasurableSet1D::unit(&[[0.1, 0.15], [0.4, 0.5], [0.8, 0.85]]).unwrap();
    let basis = sine_basis(16);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20110811);
    let mut u0: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = nullcontrol::linalg::norm2(&u0);
    for v in &mut u0 {
        *v /= n;
    }
    let result = synthesize(&basis, &omega, &u0, 1.0, 4.0 * pi, 6).unwrap();
    let cv = cross_validate(&basis, &result, &u0, 512, 1e-4).unwrap();
    println!("\ncontrolled run (16 modes, grid 512, dt 1e-4):");
    println!("  |spectral - CN| at T: {:.6e}", cv.distance);
    println!("  measured convergence-model error: {:.6e}", cv.model_error);
    println!("  within 5x of the model: {}", cv.within_model);
    println!("  mask rasterization measure error: {:.3e}", cv.mask_measure_error);
}
