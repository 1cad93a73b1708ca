//! MPFR-backed symmetric eigensolve.
//!
//! The observability Grams have smallest eigenvalues that decay like
//! e^{-N·mu}; at desk scale (32 modes) they reach ~1e-56, far below what any
//! f64 eigensolver can resolve (entry rounding alone perturbs eigenvalues by
//! ~1e-17). Matrices are reassembled from closed forms at `prec` bits and
//! diagonalized with the same cyclic Jacobi scheme as the f64 path.

use rug::Float;

/// Working precision (bits) used by the observability module when f64
/// cannot resolve the smallest eigenvalue. 256 bits ≈ 77 decimal digits.
pub const DEFAULT_PREC: u32 = 256;

pub fn mpf(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

pub fn mp_pi(prec: u32) -> Float {
    Float::with_val(prec, rug::float::Constant::Pi)
}

/// Dense symmetric matrix with MPFR entries (full storage, row-major).
pub struct MpSym {
    pub n: usize,
    pub prec: u32,
    pub a: Vec<Float>,
}

impl MpSym {
    pub fn zeros(n: usize, prec: u32) -> MpSym {
        MpSym { n, prec, a: vec![Float::with_val(prec, 0); n * n] }
    }

    pub fn set(&mut self, i: usize, j: usize, v: Float) {
        self.a[i * self.n + j] = v.clone();
        self.a[j * self.n + i] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> &Float {
        &self.a[i * self.n + j]
    }
}

/// Result of the MPFR eigensolve, reduced to what callers need.
pub struct MpEigenMin {
    /// Smallest eigenvalue rounded to f64 (may underflow to 0 below 1e-308).
    pub lambda_min: f64,
    /// ln(lambda_min) evaluated in MPFR before rounding, so the logarithm
    /// survives even when the eigenvalue itself underflows f64.
    pub ln_lambda_min: f64,
    /// Largest eigenvalue (f64).
    pub lambda_max: f64,
    /// ‖G v - λ v‖ for the minimal pair, evaluated in MPFR.
    pub residual: f64,
}

/// Cyclic Jacobi in MPFR arithmetic; returns the extreme eigenvalues and
/// the residual of the minimal eigenpair.
pub fn jacobi_eigen_min(m: &MpSym) -> MpEigenMin {
    let n = m.n;
    let prec = m.prec;
    let mut a: Vec<Float> = m.a.clone();
    let mut v: Vec<Float> = vec![Float::with_val(prec, 0); n * n];
    for i in 0..n {
        v[i * n + i] = Float::with_val(prec, 1);
    }
    let idx = |i: usize, j: usize| i * n + j;
    // convergence threshold: off-diagonal below 2^-(prec-8) of scale
    let tiny = Float::with_val(prec, Float::i_exp(1, prec as i32 - 8));
    for _sweep in 0..200 {
        let mut off = Float::with_val(prec, 0);
        let mut scale = Float::with_val(prec, 0);
        for p in 0..n {
            let d = Float::with_val(prec, a[idx(p, p)].clone().abs());
            if d > scale {
                scale = d;
            }
            for q in (p + 1)..n {
                let o = Float::with_val(prec, a[idx(p, q)].clone().abs());
                if o > off {
                    off = o;
                }
            }
        }
        if off.is_zero() {
            break;
        }
        let thresh = Float::with_val(prec, &scale / &tiny);
        if off <= thresh {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[idx(p, q)].is_zero() {
                    continue;
                }
                let apq = a[idx(p, q)].clone();
                let app = a[idx(p, p)].clone();
                let aqq = a[idx(q, q)].clone();
                let theta = Float::with_val(prec, (aqq - &app) / (Float::with_val(prec, 2) * &apq));
                let hyp = Float::with_val(prec, theta.clone().square() + 1u32).sqrt();
                let t = if theta >= 0 {
                    Float::with_val(prec, 1) / Float::with_val(prec, theta.clone().abs() + &hyp)
                } else {
                    Float::with_val(prec, -1) / Float::with_val(prec, theta.clone().abs() + &hyp)
                };
                let c = (Float::with_val(prec, t.clone().square() + 1u32)).sqrt().recip();
                let s = Float::with_val(prec, &t * &c);
                for k in 0..n {
                    let akp = a[idx(k, p)].clone();
                    let akq = a[idx(k, q)].clone();
                    a[idx(k, p)] = Float::with_val(prec, &c * &akp) - Float::with_val(prec, &s * &akq);
                    a[idx(k, q)] = Float::with_val(prec, &s * &akp) + Float::with_val(prec, &c * &akq);
                }
                for k in 0..n {
                    let apk = a[idx(p, k)].clone();
                    let aqk = a[idx(q, k)].clone();
                    a[idx(p, k)] = Float::with_val(prec, &c * &apk) - Float::with_val(prec, &s * &aqk);
                    a[idx(q, k)] = Float::with_val(prec, &s * &apk) + Float::with_val(prec, &c * &aqk);
                }
                a[idx(p, q)] = Float::with_val(prec, 0);
                a[idx(q, p)] = Float::with_val(prec, 0);
                for k in 0..n {
                    let vkp = v[idx(k, p)].clone();
                    let vkq = v[idx(k, q)].clone();
                    v[idx(k, p)] = Float::with_val(prec, &c * &vkp) - Float::with_val(prec, &s * &vkq);
                    v[idx(k, q)] = Float::with_val(prec, &s * &vkp) + Float::with_val(prec, &c * &vkq);
                }
            }
        }
    }
    let mut kmin = 0;
    let mut kmax = 0;
    for k in 1..n {
        if a[idx(k, k)] < a[idx(kmin, kmin)] {
            kmin = k;
        }
        if a[idx(k, k)] > a[idx(kmax, kmax)] {
            kmax = k;
        }
    }
    let lam = a[idx(kmin, kmin)].clone();
    // residual ‖G v - λ v‖ in MPFR for the minimal pair
    let mut rss = Float::with_val(prec, 0);
    for i in 0..n {
        let mut s = Float::with_val(prec, 0);
        for j in 0..n {
            s += Float::with_val(prec, m.get(i, j) * &v[idx(j, kmin)]);
        }
        s -= Float::with_val(prec, &lam * &v[idx(i, kmin)]);
        rss += s.square();
    }
    let residual = rss.sqrt().to_f64();
    let ln_lambda_min = if lam > 0 {
        Float::with_val(prec, lam.clone().ln()).to_f64()
    } else {
        f64::NEG_INFINITY
    };
    MpEigenMin {
        lambda_min: lam.to_f64(),
        ln_lambda_min,
        lambda_max: a[idx(kmax, kmax)].to_f64(),
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_eigen() {
        let mut m = MpSym::zeros(3, DEFAULT_PREC);
        for i in 0..3 {
            m.set(i, i, mpf(DEFAULT_PREC, 1.0));
        }
        let e = jacobi_eigen_min(&m);
        assert_eq!(e.lambda_min, 1.0);
        assert_eq!(e.lambda_max, 1.0);
        assert!(e.residual < 1e-70);
    }

    #[test]
    fn resolves_tiny_eigenvalue_beyond_f64() {
        // [[1, 1-e], [1-e, 1]] has eigenvalues e and 2-e; pick e = 1e-40
        let prec = DEFAULT_PREC;
        let e = Float::with_val(prec, 1e-20f64).square(); // exactly representable square
        let one = Float::with_val(prec, 1);
        let mut m = MpSym::zeros(2, prec);
        m.set(0, 0, one.clone());
        m.set(1, 1, one.clone());
        m.set(0, 1, Float::with_val(prec, &one - &e));
        let r = jacobi_eigen_min(&m);
        let expect = e.to_f64();
        assert!(
            (r.lambda_min - expect).abs() <= 1e-12 * expect,
            "lambda_min {:e} vs {:e}",
            r.lambda_min,
            expect
        );
    }

    #[test]
    fn closed_form_2x2() {
        let prec = DEFAULT_PREC;
        let mut m = MpSym::zeros(2, prec);
        m.set(0, 0, mpf(prec, 0.5));
        m.set(1, 1, mpf(prec, 0.5));
        let pi = mp_pi(prec);
        m.set(0, 1, Float::with_val(prec, 4u32) / (Float::with_val(prec, 3u32) * pi));
        let r = jacobi_eigen_min(&m);
        let expect = 0.5 - 4.0 / (3.0 * std::f64::consts::PI);
        assert!((r.lambda_min - expect).abs() < 1e-15);
    }
}
