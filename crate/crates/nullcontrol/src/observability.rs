//! Spectral observability: quadratic forms of low-frequency mode sums
//! restricted to a measurable set, and the constants they produce.
//!
//! For modes `ω_j ≤ μ` the spatial Gram `G_jk = ∫_ω e_j e_k dx` controls
//! the inequality `Σ a_j² ≤ C(μ) ∫_ω |Σ a_j e_j|²` with `C = 1/λ_min(G)`,
//! and the strip form over coefficients (a, b) controls the two-sided
//! version on `ω × [1/4, 3/4]`. The constant grows like `e^{Nμ}`;
//! `fit_rate` extracts N empirically.
//!
//! λ_min of these Grams decays exponentially in μ and leaves f64 range
//! almost immediately (1e-56 at 32 modes on a short interval), so the
//! eigensolve switches to a 256-bit MPFR reassembly of the closed-form
//! entries whenever the f64 Jacobi result is not trustworthy.

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, mp, norm2, SymMat};
use crate::quad::adaptive_simpson_panels;
use crate::sets::MeasurableSet1D;
use crate::spectral::Basis;
use rug::Float;

/// Coefficients of a mode sum; `b` present for the two-sided strip form.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    pub a: Vec<f64>,
    pub b: Option<Vec<f64>>,
}

/// The harmonic extension `u(x,y) = Σ (a_j e^{ω_j y} + b_j e^{-ω_j y}) e_j(x)`
/// over modes `ω_j ≤ μ`.
#[derive(Debug, Clone)]
pub struct ExtendedFunction<'a> {
    pub basis: &'a Basis,
    pub coeffs: ModeCoefficients,
    pub mu: f64,
}

impl ExtendedFunction<'_> {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut s = 0.0;
        for (j, &aj) in self.coeffs.a.iter().enumerate() {
            let om = self.basis.omega(j);
            if om > self.mu {
                break;
            }
            let bj = self.coeffs.b.as_ref().map_or(0.0, |b| b[j]);
            s += (aj * (om * y).exp() + bj * (-om * y).exp()) * self.basis.pairs[j].eval(x);
        }
        s
    }
}

/// How a form's entries can be reassembled at higher precision.
#[derive(Debug, Clone, PartialEq)]
enum MpSource {
    /// Sine-basis spatial Gram over the given intervals and mode indices.
    SineSpatial { set: MeasurableSet1D, modes: Vec<usize> },
    /// Sine-basis strip form over modes `1..=n`.
    SineStrip { set: MeasurableSet1D, n: usize },
}

/// Symmetric positive semidefinite quadratic form with enough metadata to
/// re-derive its entries beyond f64 when needed.
///
/// Entries are stored log-scaled: `matrix[i][j] = A_ij · e^{-(s_i + s_j)}`
/// with per-index exponents `s_i` (all zero for spatial Grams; `3ω_j/4` on
/// the growing block of the strip form, keeping the stored matrix in
/// floating range). The eigensolve reconstructs `A_ij` from the congruence
/// factors.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub matrix: SymMat,
    pub log_scales: Vec<f64>,
    pub mu: f64,
    source: Option<MpSource>,
}

impl QuadraticForm {
    /// Reconstructed (unscaled) entry `A_ij`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j) * (self.log_scales[i] + self.log_scales[j]).exp()
    }

    pub fn dim(&self) -> usize {
        self.matrix.n
    }

    /// Reconstructed dense matrix; errors if an entry overflows f64.
    fn dense(&self) -> Result<SymMat> {
        let n = self.dim();
        let mut m = SymMat::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = self.entry(i, j);
                if !v.is_finite() {
                    return Err(Error::Numerical(
                        "form entry overflows f64; frequencies too large for the strip form"
                            .into(),
                    ));
                }
                m.set(i, j, v);
            }
        }
        Ok(m)
    }
}

// ---------------------------------------------------------------------------
// spatial Gram
// ---------------------------------------------------------------------------

/// `∫_ω 2 sin(jπx) sin(kπx) dx` (1-indexed) over one interval, closed form.
fn sine_entry_interval(j: usize, k: usize, lo: f64, hi: f64) -> f64 {
    let pi = std::f64::consts::PI;
    if j == k {
        let w = 2.0 * j as f64 * pi;
        (hi - lo) - ((w * hi).sin() - (w * lo).sin()) / w
    } else {
        let d = (j as f64 - k as f64) * pi;
        let s = (j + k) as f64 * pi;
        ((d * hi).sin() - (d * lo).sin()) / d - ((s * hi).sin() - (s * lo).sin()) / s
    }
}

fn sine_entry(j: usize, k: usize, set: &MeasurableSet1D) -> f64 {
    set.intervals().iter().map(|iv| sine_entry_interval(j, k, iv.lo, iv.hi)).sum()
}

/// Spatial Gram `G_jk = ∫_ω e_j e_k dx` over the modes with `ω_j ≤ μ`.
/// Closed-form entries for the sine basis; adaptive quadrature (absolute
/// tolerance 1e-12 per entry) otherwise.
pub fn spatial_gram(basis: &Basis, omega_set: &MeasurableSet1D, mu: f64) -> Result<QuadraticForm> {
    let n = crate::spectral::count_below(basis, mu)?;
    if n == 0 {
        return Err(Error::InvalidInput(format!("no modes below μ = {mu}")));
    }
    spatial_gram_modes(basis, omega_set, &(0..n).collect::<Vec<_>>(), mu)
}

/// Spatial Gram over an explicit list of (0-indexed) modes.
pub fn spatial_gram_modes(
    basis: &Basis,
    omega_set: &MeasurableSet1D,
    modes: &[usize],
    mu: f64,
) -> Result<QuadraticForm> {
    if omega_set.measure() <= 0.0 {
        return Err(Error::InvalidInput("observation set must have positive measure".into()));
    }
    let n = modes.len();
    let mut m = SymMat::zeros(n);
    let sine = basis.density.is_constant_one();
    for (r, &i) in modes.iter().enumerate() {
        for (c, &j) in modes.iter().enumerate().skip(r) {
            let v = if sine {
                sine_entry(i + 1, j + 1, omega_set)
            } else {
                quadrature_entry(basis, i, j, omega_set)
            };
            m.set(r, c, v);
        }
    }
    Ok(QuadraticForm {
        matrix: m,
        log_scales: vec![0.0; n],
        mu,
        source: if sine {
            Some(MpSource::SineSpatial { set: omega_set.clone(), modes: modes.to_vec() })
        } else {
            None
        },
    })
}

/// One Gram entry by quadrature, panels aligned with the density pieces and
/// sized to the fastest oscillation.
fn quadrature_entry(basis: &Basis, i: usize, j: usize, set: &MeasurableSet1D) -> f64 {
    let mut total = 0.0;
    for iv in set.intervals() {
        for (piece, rho) in basis.density.pieces() {
            let lo = iv.lo.max(piece.lo);
            let hi = iv.hi.min(piece.hi);
            if lo >= hi {
                continue;
            }
            let kmax = (basis.omega(i) + basis.omega(j)) * rho.sqrt();
            let panels = (((hi - lo) * kmax / std::f64::consts::PI).ceil() as usize + 3).max(4);
            let f = |x: f64| basis.pairs[i].eval(x) * basis.pairs[j].eval(x);
            total += adaptive_simpson_panels(&f, lo, hi, 1e-13, panels);
        }
    }
    total
}

// ---------------------------------------------------------------------------
// strip form over (a, b)
// ---------------------------------------------------------------------------

/// `∫_{1/4}^{3/4} e^{s y} dy`, with the removable singularity at s = 0.
fn y_integral(s: f64) -> f64 {
    if s == 0.0 {
        0.5
    } else {
        ((0.75 * s).exp() - (0.25 * s).exp()) / s
    }
}

/// The form `∫∫_{ω×[1/4,3/4]} |Σ (a_j e^{ω_j y} + b_j e^{-ω_j y}) e_j|² dxdy`
/// over coefficients ordered `(a_1..a_n, b_1..b_n)`. Spatial factors from
/// [`spatial_gram`], y-factors in closed form. The growing block is stored
/// with log-scales `3ω_j/4` to stay within floating range.
pub fn lr_form(basis: &Basis, omega_set: &MeasurableSet1D, mu: f64) -> Result<QuadraticForm> {
    let g = spatial_gram(basis, omega_set, mu)?;
    let n = g.dim();
    let om: Vec<f64> = (0..n).map(|j| basis.omega(j)).collect();
    let mut m = SymMat::zeros(2 * n);
    let mut scales = vec![0.0; 2 * n];
    for j in 0..n {
        scales[j] = 0.75 * om[j];
    }
    for j in 0..n {
        for k in j..n {
            let gjk = g.entry(j, k);
            // aa block: scaled by e^{-3(ω_j+ω_k)/4}
            let saa = om[j] + om[k];
            let aa = gjk
                * if saa == 0.0 {
                    0.5 * (-(scales[j] + scales[k])).exp()
                } else {
                    // e^{-3s/4} (e^{3s/4} - e^{s/4}) / s = (1 - e^{-s/2}) / s
                    (1.0 - (-0.5 * saa).exp()) / saa
                };
            m.set(j, k, aa);
            // bb block: no scaling
            m.set(n + j, n + k, gjk * y_integral(-(om[j] + om[k])));
        }
    }
    for j in 0..n {
        for k in 0..n {
            // ab block entry (a_j, b_k): Y(ω_j - ω_k) e^{-3ω_j/4}
            let s = om[j] - om[k];
            let v = gjk_times_scaled_y(g.entry(j, k), s, scales[j]);
            m.a[j * (2 * n) + (n + k)] = v;
            m.a[(n + k) * (2 * n) + j] = v;
        }
    }
    let source = match g.source {
        Some(MpSource::SineSpatial { set, .. }) => Some(MpSource::SineStrip { set, n }),
        _ => None,
    };
    Ok(QuadraticForm { matrix: m, log_scales: scales, mu, source })
}

/// `G · Y(s) · e^{-scale}` evaluated without overflowing intermediate exps.
fn gjk_times_scaled_y(g: f64, s: f64, scale: f64) -> f64 {
    if s == 0.0 {
        g * 0.5 * (-scale).exp()
    } else {
        // (e^{3s/4 - scale} - e^{s/4 - scale}) / s
        g * ((0.75 * s - scale).exp() - (0.25 * s - scale).exp()) / s
    }
}

// ---------------------------------------------------------------------------
// spectral constant extraction
// ---------------------------------------------------------------------------

/// Observability constant of a form.
#[derive(Debug, Clone, Copy)]
pub struct SpectralConstant {
    pub lambda_min: f64,
    /// `C = 1/λ_min`, computed from the log when λ_min underflows.
    pub c: f64,
    /// `ln C` (finite even when C overflows printing precision).
    pub log_c: f64,
    /// Residual `‖G v - λ v‖` of the minimal eigenpair.
    pub residual: f64,
    /// Whether the MPFR path was used.
    pub high_precision: bool,
}

/// Smallest eigenvalue of a PSD form and the constant `C = 1/λ_min`.
///
/// The f64 Jacobi result is accepted when it stands clear of the f64 noise
/// floor; otherwise the entries are reassembled at 256 bits from the
/// closed forms. Errors when λ_min ≤ 0 within tolerance (numerically
/// unobservable) or when no high-precision reassembly exists.
pub fn spectral_constant(form: &QuadraticForm) -> Result<SpectralConstant> {
    let dense = form.dense()?;
    let eig = jacobi_eigen(&dense);
    let lam = eig.values[0];
    let lam_max = *eig.values.last().unwrap();
    let noise_floor = 1e-8 * lam_max.max(f64::MIN_POSITIVE);
    if lam > noise_floor {
        let v = &eig.vectors[0];
        let gv = dense.matvec(v);
        let r: Vec<f64> = gv.iter().zip(v).map(|(&a, &b)| a - lam * b).collect();
        let residual = norm2(&r);
        if residual > 1e-10 {
            return Err(Error::Numerical(format!(
                "eigen residual {residual:e} above 1e-10"
            )));
        }
        return Ok(SpectralConstant {
            lambda_min: lam,
            c: 1.0 / lam,
            log_c: -lam.ln(),
            residual,
            high_precision: false,
        });
    }
    // below the f64 noise floor: high-precision reassembly
    let prec = mp::DEFAULT_PREC;
    let mp_matrix = match &form.source {
        Some(MpSource::SineSpatial { set, modes }) => mp_sine_spatial(prec, set, modes),
        Some(MpSource::SineStrip { set, n }) => mp_sine_strip(prec, set, *n),
        None => {
            return Err(Error::Numerical(format!(
                "λ_min = {lam:e} is below the f64 noise floor {noise_floor:e} and the form has \
                 no closed-form reassembly: numerically unobservable mode set"
            )))
        }
    };
    let r = mp::jacobi_eigen_min(&mp_matrix);
    if !(r.ln_lambda_min.is_finite()) {
        return Err(Error::Numerical(
            "λ_min ≤ 0 at 256-bit precision: numerically unobservable mode set".into(),
        ));
    }
    if r.residual > 1e-10 {
        return Err(Error::Numerical(format!(
            "MPFR eigen residual {:e} above 1e-10",
            r.residual
        )));
    }
    Ok(SpectralConstant {
        lambda_min: r.lambda_min,
        c: (-r.ln_lambda_min).exp(),
        log_c: -r.ln_lambda_min,
        residual: r.residual,
        high_precision: true,
    })
}

fn mp_sine_spatial(prec: u32, set: &MeasurableSet1D, modes: &[usize]) -> mp::MpSym {
    let n = modes.len();
    let mut m = mp::MpSym::zeros(n, prec);
    for (r, &i) in modes.iter().enumerate() {
        for (c, &j) in modes.iter().enumerate().skip(r) {
            m.set(r, c, mp_sine_entry(prec, i + 1, j + 1, set));
        }
    }
    m
}

/// Closed-form sine Gram entry at `prec` bits.
fn mp_sine_entry(prec: u32, j: usize, k: usize, set: &MeasurableSet1D) -> Float {
    let pi = mp::mp_pi(prec);
    let mut total = Float::with_val(prec, 0);
    for iv in set.intervals() {
        let lo = Float::with_val(prec, iv.lo);
        let hi = Float::with_val(prec, iv.hi);
        if j == k {
            let w = Float::with_val(prec, 2 * j as u32) * &pi;
            let t = (Float::with_val(prec, &hi - &lo))
                - (Float::with_val(prec, &w * &hi).sin() - Float::with_val(prec, &w * &lo).sin())
                    / &w;
            total += t;
        } else {
            let d = Float::with_val(prec, j as i64 - k as i64) * &pi;
            let s = Float::with_val(prec, (j + k) as u32) * &pi;
            let td = (Float::with_val(prec, &d * &hi).sin() - Float::with_val(prec, &d * &lo).sin())
                / &d;
            let ts = (Float::with_val(prec, &s * &hi).sin() - Float::with_val(prec, &s * &lo).sin())
                / &s;
            total += td - ts;
        }
    }
    total
}

fn mp_sine_strip(prec: u32, set: &MeasurableSet1D, n: usize) -> mp::MpSym {
    let pi = mp::mp_pi(prec);
    let mut m = mp::MpSym::zeros(2 * n, prec);
    let om: Vec<Float> =
        (1..=n).map(|j| Float::with_val(prec, j as u32) * &pi).collect();
    let y_int = |s: Float| -> Float {
        if s.is_zero() {
            Float::with_val(prec, 0.5)
        } else {
            (Float::with_val(prec, Float::with_val(prec, 0.75) * &s).exp()
                - Float::with_val(prec, Float::with_val(prec, 0.25) * &s).exp())
                / s
        }
    };
    for j in 0..n {
        for k in 0..n {
            let g = mp_sine_entry(prec, j + 1, k + 1, set);
            let sum = Float::with_val(prec, &om[j] + &om[k]);
            let diff = Float::with_val(prec, &om[j] - &om[k]);
            if k >= j {
                m.set(j, k, Float::with_val(prec, &g * &y_int(sum.clone())));
                m.set(
                    n + j,
                    n + k,
                    Float::with_val(prec, &g * &y_int(-sum)),
                );
            }
            m.set(j, n + k, Float::with_val(prec, &g * &y_int(diff)));
        }
    }
    m
}

// ---------------------------------------------------------------------------
// sinh floor and rate fitting
// ---------------------------------------------------------------------------

/// Closed-form check of
/// `∫_0^1 (a e^{ωy} + b e^{-ωy})² dy ≥ e^{-μ} (sinh ω₁/ω₁ - 1)(a² + b²)`
/// for `ω₁ ≤ ω ≤ μ`.
pub fn sinh_floor_check(omega1: f64, mu: f64, omega: f64, a: f64, b: f64) -> Result<bool> {
    if !(omega1 > 0.0 && omega1 <= omega && omega <= mu) {
        return Err(Error::InvalidInput(format!(
            "need 0 < ω₁ ≤ ω ≤ μ, got ω₁={omega1}, ω={omega}, μ={mu}"
        )));
    }
    let i_plus = ((2.0 * omega).exp_m1()) / (2.0 * omega);
    let i_minus = (-(-2.0 * omega).exp_m1()) / (2.0 * omega);
    let lhs = a * a * i_plus + 2.0 * a * b + b * b * i_minus;
    let rhs = (-mu).exp() * (omega1.sinh() / omega1 - 1.0) * (a * a + b * b);
    Ok(lhs >= rhs)
}

/// Least-squares fit of `log C` against μ.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    /// Slope: the empirical N in `C(μ) ≈ e^{Nμ + intercept}`.
    pub n: f64,
    pub intercept: f64,
    /// Largest absolute deviation of `log C` from the fitted line.
    pub residual: f64,
    /// Coefficient of determination of the fit.
    pub r_squared: f64,
}

/// Fit the exponential growth rate from `(μ, C)` samples.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    let logs: Result<Vec<(f64, f64)>> = points
        .iter()
        .map(|&(mu, c)| {
            if c > 0.0 && c.is_finite() {
                Ok((mu, c.ln()))
            } else {
                Err(Error::InvalidInput(format!("C = {c} must be positive and finite")))
            }
        })
        .collect();
    fit_rate_log(&logs?)
}

/// Fit from `(μ, log C)` samples directly (survives C beyond f64 range).
pub fn fit_rate_log(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::InvalidInput("rate fit needs at least 3 points".into()));
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 1e-12 * sxx.max(1.0) {
        return Err(Error::InvalidInput("degenerate fit: μ values coincide".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residual = points
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).abs())
        .fold(0.0f64, f64::max);
    let ybar = sy / n;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - ybar).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.1 - (slope * p.0 + intercept)).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit { n: slope, intercept, residual, r_squared })
}
