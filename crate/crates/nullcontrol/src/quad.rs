//! Adaptive quadrature for the Gram entries that have no closed form.

/// Adaptive Simpson with absolute tolerance, recursion depth capped at 40.
///
/// Oscillatory integrands whose zeros sit on the dyadic sample points can
/// fool a bare adaptive pass into returning 0 (all samples vanish); use
/// [`adaptive_simpson_panels`] with a panel count resolving the shortest
/// oscillation when the integrand frequency is known.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    simpson_rec(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 40)
}

/// Adaptive Simpson after an initial split into `panels` equal panels.
pub fn adaptive_simpson_panels(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    panels: usize,
) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let ptol = tol / panels as f64;
    (0..panels)
        .map(|i| adaptive_simpson(f, a + i as f64 * h, a + (i + 1) as f64 * h, ptol))
        .sum()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_oscillatory_products() {
        let pi = std::f64::consts::PI;
        // int_0^1 2 sin(3πx) sin(3πx) = 1
        let v = adaptive_simpson(&|x: f64| 2.0 * (3.0 * pi * x).sin().powi(2), 0.0, 1.0, 1e-13);
        assert!((v - 1.0).abs() < 1e-11);
        // orthogonality
        let v2 = adaptive_simpson(
            &|x: f64| 2.0 * (3.0 * pi * x).sin() * (5.0 * pi * x).sin(),
            0.0,
            1.0,
            1e-13,
        );
        assert!(v2.abs() < 1e-11);
        // high-frequency partial interval vs closed form
        let v3 = adaptive_simpson(&|x: f64| (61.0 * x).cos(), 0.3, 0.5, 1e-13);
        let exact = ((61.0f64 * 0.5).sin() - (61.0f64 * 0.3).sin()) / 61.0;
        assert!((v3 - exact).abs() < 1e-12);
    }
}
