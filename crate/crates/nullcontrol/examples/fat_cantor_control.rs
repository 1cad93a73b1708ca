//! Null-control with a control set that contains no interval at all: a fat
//! Cantor set of positive measure. Carleman-based constructions need an
//! open ball inside ω; the spectral route only needs positive measure.
//!
//! ```bash
//! cargo run --release --example fat_cantor_control
//! ```

use nullcontrol::control::{cost_audit, synthesize};
use nullcontrol::sets::{FatCantorSpec, Interval};
use nullcontrol::spectral::sine_basis;

fn main() {
    let spec = FatCantorSpec::new(5, 0.3).unwrap();
    let omega = spec.generate(Interval { lo: 0.0, hi: 1.0 });
    println!(
        "fat Cantor control set: depth {}, ratio {}, {} pieces",
        spec.depth,
        spec.removal_ratio,
        omega.intervals().len()
    );
    println!(
        "measure = {:.12} (closed-form product {:.12}); longest piece = {:.5}",
        omega.measure(),
        spec.measure_closed_form(),
        omega
            .intervals()
            .iter()
            .map(Interval::length)
            .fold(0.0f64, f64::max)
    );

    let basis = sine_basis(32);
    let mut u0 = vec![0.0; 32];
    // rough initial profile: mixture of low modes
    u0[0] = 0.8;
    u0[1] = -0.5;
    u0[2] = 0.3;
    u0[4] = 0.1;
    let norm = nullcontrol::linalg::norm2(&u0);
    for v in &mut u0 {
        *v /= norm;
    }

    let result = synthesize(&basis, &omega, &u0, 1.0, 2.0 * std::f64::consts::PI, 5).unwrap();
    let audit = cost_audit(&result);
    println!("\nstage costs:");
    for (k, c) in audit.stage_costs.iter().enumerate() {
        println!("  stage {k}: cost = {c:.6e}");
    }
    println!("total cost = {:.6}, N_eff = {:.6}", result.total_cost, result.n_eff);
    println!(
        "‖u(T)‖ = {:.3e}; low-mode projection = {:.3e}; geometric decay after peak: {}",
        result.final_norm, result.final_low_mode_norm, audit.geometric_after_peak
    );
}
