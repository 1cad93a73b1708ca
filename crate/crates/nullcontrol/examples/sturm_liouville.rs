//! Dirichlet eigenbasis of `e'' + ρ(x) ω² e = 0` for a piecewise-constant
//! density, computed by exact transfer matrices, with the counting
//! function and the Sturm oscillation check.
//!
//! ```bash
//! cargo run --release --example sturm_liouville
//! ```

use nullcontrol::spectral::{count_below, sturm_liouville_basis, DensitySpec};

fn main() {
    let rho = DensitySpec::from_triples(&[[0.0, 0.5, 1.0], [0.5, 1.0, 4.0]]).unwrap();
    let basis = sturm_liouville_basis(&rho, 12).unwrap();

    println!("density: 1 on [0, 1/2], 4 on [1/2, 1]");
    println!("{:>4} {:>14} {:>10} {:>14}", "j", "omega_j", "zeros", "norm check");
    for (j, p) in basis.pairs.iter().enumerate() {
        println!(
            "{:>4} {:>14.8} {:>10} {:>14.10}",
            j + 1,
            p.omega,
            p.interior_zeros(),
            p.norm_check
        );
    }

    // closed-form secular roots for this two-piece density: ω = 2s with
    // sin s = 0 or sin²s = 2/3
    let s0 = (2f64 / 3.0).sqrt().asin();
    println!("\nfirst roots via the closed-form secular factorization:");
    let mut roots = [2.0 * s0, 2.0 * (std::f64::consts::PI - s0), 2.0 * std::f64::consts::PI];
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (j, r) in roots.iter().enumerate() {
        println!("  ω_{} = {:.10}  (transfer matrix: {:.10})", j + 1, r, basis.omega(j));
    }

    // orthonormality in L²(ρ dx)
    let mut worst = 0.0f64;
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((basis.weighted_inner(i, j) - target).abs());
        }
    }
    println!("\nworst orthonormality defect in L²(ρ dx): {worst:.3e}");

    for mu in [5.0, 10.0, 20.0] {
        println!("count of ω_j ≤ {mu}: {}", count_below(&basis, mu).unwrap());
    }
}
