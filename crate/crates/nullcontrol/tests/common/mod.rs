//! Shared oracles for the acceptance suite. Everything here is kept
//! independent of the library's solver paths: the eigenvalue oracle is a
//! plain finite-difference generalized eigensolve (symmetric tridiagonal
//! Sturm bisection), Richardson-extrapolated across two grids.

/// Smallest `nev` generalized eigenvalues of `-e'' = λ ρ e` on (0,1) with
/// Dirichlet ends, for piecewise-constant ρ given as `[lo, hi, value]`
/// triples, discretized with `n_cells` uniform cells (`n_cells - 1`
/// interior points). Returns frequencies `ω = √λ`.
pub fn fd_omegas(triples: &[[f64; 3]], n_cells: usize, nev: usize) -> Vec<f64> {
    let h = 1.0 / n_cells as f64;
    let n = n_cells - 1;
    let rho_at = |x: f64| -> f64 {
        // average the two one-sided values at a piece boundary
        for t in triples {
            if (x - t[0]).abs() < 1e-12 {
                let left = triples
                    .iter()
                    .find(|s| s[1] > x - 1e-12 && s[0] < x - 1e-12)
                    .map(|s| s[2]);
                return match left {
                    Some(l) => 0.5 * (l + t[2]),
                    None => t[2],
                };
            }
        }
        triples
            .iter()
            .find(|t| t[0] <= x && x < t[1])
            .or(triples.last())
            .map(|t| t[2])
            .unwrap()
    };
    let rho: Vec<f64> = (1..=n).map(|i| rho_at(i as f64 * h)).collect();
    // symmetrized B^{-1/2} A B^{-1/2}: tridiagonal with
    // main_i = 2/(h² ρ_i), off_i = -1/(h² √(ρ_i ρ_{i+1}))
    let main: Vec<f64> = rho.iter().map(|&r| 2.0 / (h * h * r)).collect();
    let off: Vec<f64> = (0..n - 1)
        .map(|i| -1.0 / (h * h * (rho[i] * rho[i + 1]).sqrt()))
        .collect();
    (0..nev)
        .map(|k| tridiag_kth_eigenvalue(&main, &off, k).sqrt())
        .collect()
}

/// k-th smallest eigenvalue (0-indexed) of a symmetric tridiagonal matrix
/// by Sturm-sequence bisection.
fn tridiag_kth_eigenvalue(main: &[f64], off: &[f64], k: usize) -> f64 {
    let n = main.len();
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = (if i > 0 { off[i - 1].abs() } else { 0.0 })
            + (if i < n - 1 { off[i].abs() } else { 0.0 });
        lo = lo.min(main[i] - r);
        hi = hi.max(main[i] + r);
    }
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if count_below(main, off, mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Number of eigenvalues strictly below `x` (LDLᵀ sign count).
fn count_below(main: &[f64], off: &[f64], x: f64) -> usize {
    let n = main.len();
    let mut count = 0;
    let mut d = main[0] - x;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let denom = if d == 0.0 { 1e-300 } else { d };
        d = (main[i] - x) - off[i - 1] * off[i - 1] / denom;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Richardson-extrapolated FD frequencies: combines the `n_cells/2` and
/// `n_cells` solves to cancel the O(h²) truncation term.
pub fn fd_omegas_richardson(triples: &[[f64; 3]], n_cells: usize, nev: usize) -> Vec<f64> {
    let coarse = fd_omegas(triples, n_cells / 2, nev);
    let fine = fd_omegas(triples, n_cells, nev);
    coarse
        .iter()
        .zip(&fine)
        .map(|(&wc, &wf)| ((4.0 * wf * wf - wc * wc) / 3.0).sqrt())
        .collect()
}
