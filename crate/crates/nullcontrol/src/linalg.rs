//! Small dense linear algebra used across the crate.
//!
//! Everything here is sized for matrices of order ≤ 128, so plain dense
//! O(n³) algorithms are the right tool. Three precision tiers:
//!
//! * `f64` symmetric Jacobi eigensolve and Cholesky for well-conditioned
//!   forms,
//! * [`Dd`] double-double (~31 decimal digits) Cholesky for the control
//!   stage solves, whose Gramians reach condition numbers around 1e6 while
//!   the annihilation contract asks for relative residuals below 1e-10,
//! * an MPFR path (module [`mp`]) for observability constants, where the
//!   smallest Gram eigenvalue falls far below f64 resolution.

use crate::error::{Error, Result};

pub mod mp;

// ---------------------------------------------------------------------------
// double-double scalar
// ---------------------------------------------------------------------------

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
///
/// Classic error-free transformations (Dekker/Knuth); `two_prod` relies on
/// the hardware FMA through `f64::mul_add`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        // one Newton step on x0 = sqrt(hi) doubles the working digits
        let x0 = self.hi.sqrt();
        let x0dd = Dd::from_f64(x0);
        (self - x0dd * x0dd) / Dd::from_f64(2.0 * x0) + x0dd
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let s2 = s2 + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let p2 = p2 + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from_f64(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, o: &Dd) -> Option<std::cmp::Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(std::cmp::Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            other => other,
        }
    }
}

/// Dot product of two f64 slices accumulated in double-double.
pub fn dot_dd(a: &[f64], b: &[f64]) -> Dd {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Dd::ZERO;
    for (&x, &y) in a.iter().zip(b) {
        let (p, e) = two_prod(x, y);
        acc = acc + Dd { hi: p, lo: e };
    }
    acc
}

/// Euclidean norm with overflow/underflow-safe scaling.
pub fn norm2(v: &[f64]) -> f64 {
    let mx = v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if mx == 0.0 || !mx.is_finite() {
        return mx;
    }
    let mut s = 0.0;
    for &x in v {
        let t = x / mx;
        s += t * t;
    }
    mx * s.sqrt()
}

// ---------------------------------------------------------------------------
// symmetric dense matrices
// ---------------------------------------------------------------------------

/// Dense symmetric matrix, full storage, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    pub n: usize,
    pub a: Vec<f64>,
}

impl SymMat {
    pub fn zeros(n: usize) -> SymMat {
        SymMat { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> SymMat {
        let mut m = SymMat::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = v;
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| self.a[i * n..(i + 1) * n].iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }
}

/// Eigen-decomposition of a symmetric matrix.
pub struct SymEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// `vectors[k]` is the eigenvector for `values[k]`, unit norm.
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi eigensolver. Converges quadratically; 30 sweeps is far
/// more than matrices of this size ever need.
pub fn jacobi_eigen(m: &SymMat) -> SymEigen {
    let n = m.n;
    let mut a = m.a.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let idx = |i: usize, j: usize| i * n + j;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[idx(p, q)].abs());
            }
        }
        let scale = (0..n).fold(0.0f64, |s, i| s.max(a[idx(i, i)].abs())).max(off);
        if off <= f64::EPSILON * scale * 1e-2 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                // skip rotations that cannot change the diagonal at working precision
                if apq.abs() <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[idx(p, q)] = 0.0;
                    a[idx(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
                a[idx(p, q)] = 0.0;
                a[idx(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[idx(k, p)];
                    let vkq = v[idx(k, q)];
                    v[idx(k, p)] = c * vkp - s * vkq;
                    v[idx(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| (a[idx(k, k)], (0..n).map(|i| v[idx(i, k)]).collect()))
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    SymEigen {
        values: pairs.iter().map(|p| p.0).collect(),
        vectors: pairs.into_iter().map(|p| p.1).collect(),
    }
}

// ---------------------------------------------------------------------------
// Cholesky (f64 and double-double)
// ---------------------------------------------------------------------------

/// f64 Cholesky factor (lower triangular, row-major dense). `None` if the
/// matrix is not numerically positive definite.
pub fn cholesky(m: &SymMat) -> Option<Vec<f64>> {
    let n = m.n;
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solve `L Lᵀ x = b` given the Cholesky factor.
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// Double-double Cholesky of an f64 symmetric matrix.
pub fn cholesky_dd(m: &SymMat) -> Option<Vec<Dd>> {
    let n = m.n;
    let mut l = vec![Dd::ZERO; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = Dd::from_f64(m.get(i, j));
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s.hi <= 0.0 || !s.hi.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solve `L Lᵀ x = b` entirely in double-double.
pub fn cholesky_solve_dd(l: &[Dd], n: usize, b: &[Dd]) -> Vec<Dd> {
    let mut y = vec![Dd::ZERO; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![Dd::ZERO; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s = s - l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// Solution of a symmetric positive definite system in double-double, with
/// the relative residual `‖Ax - b‖ / ‖b‖` evaluated in double-double.
pub struct DdSolve {
    pub x: Vec<Dd>,
    pub rel_residual: f64,
}

/// Solve `A x = b` (A symmetric positive definite, entries f64) in
/// double-double and report the achieved relative residual.
pub fn spd_solve_dd(a: &SymMat, b: &[f64]) -> Result<DdSolve> {
    let n = a.n;
    let l = cholesky_dd(a)
        .ok_or_else(|| Error::Numerical("matrix not positive definite".into()))?;
    let bdd: Vec<Dd> = b.iter().map(|&v| Dd::from_f64(v)).collect();
    let mut x = cholesky_solve_dd(&l, n, &bdd);
    // one refinement pass; with dd arithmetic this is already overkill
    let r = residual_dd(a, &x, &bdd);
    let dx = cholesky_solve_dd(&l, n, &r);
    for i in 0..n {
        x[i] = x[i] + dx[i];
    }
    let r = residual_dd(a, &x, &bdd);
    let rn = norm2(&r.iter().map(|v| v.to_f64()).collect::<Vec<_>>());
    let bn = norm2(b);
    let rel = if bn == 0.0 { 0.0 } else { rn / bn };
    Ok(DdSolve { x, rel_residual: rel })
}

fn residual_dd(a: &SymMat, x: &[Dd], b: &[Dd]) -> Vec<Dd> {
    let n = a.n;
    (0..n)
        .map(|i| {
            let mut s = b[i];
            for j in 0..n {
                s = s - Dd::from_f64(a.get(i, j)) * x[j];
            }
            s
        })
        .collect()
}

// ---------------------------------------------------------------------------
// tridiagonal solve (Thomas algorithm)
// ---------------------------------------------------------------------------

/// Solve a tridiagonal system in place. `lower` has length n-1, `diag` n,
/// `upper` n-1. Panics on zero pivots (the Crank-Nicolson matrices are
/// strictly diagonally dominant).
pub fn tridiag_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(lower.len(), n - 1);
    assert_eq!(upper.len(), n - 1);
    assert_eq!(rhs.len(), n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / m;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_roundtrip_and_precision() {
        let third = Dd::from_f64(1.0) / Dd::from_f64(3.0);
        let back = third * Dd::from_f64(3.0) - Dd::from_f64(1.0);
        assert!(back.to_f64().abs() < 1e-31, "dd 1/3*3-1 = {:e}", back.to_f64());
        let two = Dd::from_f64(2.0);
        let r = two.sqrt();
        let err = r * r - two;
        assert!(err.to_f64().abs() < 1e-31);
    }

    #[test]
    fn jacobi_2x2_closed_form() {
        let mut m = SymMat::zeros(2);
        m.set(0, 0, 0.5);
        m.set(1, 1, 0.5);
        m.set(0, 1, 4.0 / (3.0 * std::f64::consts::PI));
        let e = jacobi_eigen(&m);
        let expect = 0.5 - 4.0 / (3.0 * std::f64::consts::PI);
        assert!((e.values[0] - expect).abs() < 1e-14);
        // residual check
        let v = &e.vectors[0];
        let mv = m.matvec(v);
        let r: Vec<f64> = mv.iter().zip(v).map(|(&a, &b)| a - e.values[0] * b).collect();
        assert!(norm2(&r) < 1e-12);
    }

    #[test]
    fn jacobi_diagonal_is_identity_case() {
        let mut m = SymMat::zeros(3);
        for (i, d) in [3.0, 1.0, 2.0].iter().enumerate() {
            m.set(i, i, *d);
        }
        let e = jacobi_eigen(&m);
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn dd_cholesky_beats_f64_on_ill_conditioned() {
        // Hilbert-like matrix, condition ~ 1e8 at n=6
        let n = 6;
        let mut m = SymMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * n + j] = 1.0 / ((i + j + 1) as f64);
            }
        }
        let b = vec![1.0; n];
        let sol = spd_solve_dd(&m, &b).unwrap();
        assert!(sol.rel_residual < 1e-25, "residual {:e}", sol.rel_residual);
    }

    #[test]
    fn tridiag_solves_poisson_row() {
        let n = 5;
        let lower = vec![-1.0; n - 1];
        let upper = vec![-1.0; n - 1];
        let diag = vec![2.0; n];
        let x_true = vec![1.0, 2.0, 3.0, 2.0, 1.0];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            rhs[i] = 2.0 * x_true[i]
                - if i > 0 { x_true[i - 1] } else { 0.0 }
                - if i + 1 < n { x_true[i + 1] } else { 0.0 };
        }
        let x = tridiag_solve(&lower, &diag, &upper, &rhs);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn scaled_norm_handles_denormals() {
        let v = vec![1e-230, 2e-230];
        let n = norm2(&v);
        assert!((n - 5f64.sqrt() * 1e-230).abs() < 1e-240);
        assert_eq!(norm2(&[0.0, 0.0]), 0.0);
    }
}
