//! Dirichlet eigenbases on (0,1): the sine basis for unit density and the
//! weighted problem `e'' + ρ(x) ω² e = 0` for piecewise-constant ρ.
//!
//! Within a piece of constant density the solutions are exact sinusoids
//! with local wavenumber `k = ω√ρ`, so eigenpairs are computed by exact
//! 2×2 transfer matrices: eigenfrequencies are the roots of the secular
//! function `φ(ω) = e(1)` with `(e, e')(0) = (0, 1)`, bracketed on an ω
//! grid and bisected. Modes are normalized in `L²(ρ dx)` using exact
//! per-piece antiderivatives, and Sturm's oscillation theorem (mode j has
//! exactly j−1 interior zeros) guards against missed roots.

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson_panels;
use crate::sets::Interval;

/// Piecewise-constant density on a partition of `[0,1]`, all values within
/// `[δ, 1/δ]` for the derived `δ = min(min ρ, 1/max ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    pieces: Vec<(Interval, f64)>,
}

impl DensitySpec {
    pub fn constant(value: f64) -> Result<DensitySpec> {
        DensitySpec::from_triples(&[[0.0, 1.0, value]])
    }

    /// Build from `[lo, hi, value]` triples; the pieces must partition
    /// `[0,1]` exactly (up to 1e-12 at the seams).
    pub fn from_triples(triples: &[[f64; 3]]) -> Result<DensitySpec> {
        if triples.is_empty() {
            return Err(Error::InvalidInput("density needs at least one piece".into()));
        }
        if triples.len() > 64 {
            return Err(Error::InvalidInput("at most 64 density pieces supported".into()));
        }
        let mut pieces: Vec<(Interval, f64)> = Vec::with_capacity(triples.len());
        for t in triples {
            let iv = Interval::new(t[0], t[1])?;
            if !(t[2] > 0.0 && t[2].is_finite()) {
                return Err(Error::InvalidInput(format!("density value {} must be positive", t[2])));
            }
            if iv.length() <= 0.0 {
                return Err(Error::InvalidInput("zero-length density piece".into()));
            }
            pieces.push((iv, t[2]));
        }
        pieces.sort_by(|a, b| a.0.lo.partial_cmp(&b.0.lo).unwrap());
        if (pieces[0].0.lo).abs() > 1e-12 || (pieces.last().unwrap().0.hi - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("density pieces must cover [0,1]".into()));
        }
        for w in pieces.windows(2) {
            if (w[0].0.hi - w[1].0.lo).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "density pieces leave a gap at {}",
                    w[0].0.hi
                )));
            }
        }
        Ok(DensitySpec { pieces })
    }

    pub fn pieces(&self) -> &[(Interval, f64)] {
        &self.pieces
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let k = self.pieces.partition_point(|(iv, _)| iv.hi < x);
        self.pieces[k.min(self.pieces.len() - 1)].1
    }

    /// Ellipticity constant: the largest δ ∈ (0,1] with δ ≤ ρ ≤ 1/δ.
    pub fn delta(&self) -> f64 {
        self.pieces
            .iter()
            .map(|&(_, v)| v.min(1.0 / v))
            .fold(1.0f64, f64::min)
    }

    /// Average of ρ over the cell `[x - h/2, x + h/2]` (exact for the
    /// piecewise-constant density). Grid schemes sample this instead of
    /// the pointwise value so density jumps on cell boundaries keep their
    /// second-order behavior.
    pub fn cell_average(&self, x: f64, h: f64) -> f64 {
        let window = Interval { lo: x - h / 2.0, hi: x + h / 2.0 };
        let mut acc = 0.0;
        let mut covered = 0.0;
        for (iv, v) in &self.pieces {
            let w = iv.overlap(&window);
            acc += v * w;
            covered += w;
        }
        if covered > 0.0 {
            acc / covered
        } else {
            self.value_at(x)
        }
    }

    pub fn is_constant_one(&self) -> bool {
        self.pieces.len() == 1 && (self.pieces[0].1 - 1.0).abs() < 1e-15
    }
}

/// One density piece of an eigenmode: `e(x) = a sin(k s) + b cos(k s)` with
/// `s = x - lo` and local wavenumber `k = ω √ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePiece {
    pub lo: f64,
    pub hi: f64,
    pub k: f64,
    pub a: f64,
    pub b: f64,
}

impl ModePiece {
    fn eval(&self, x: f64) -> f64 {
        let s = x - self.lo;
        self.a * (self.k * s).sin() + self.b * (self.k * s).cos()
    }

    /// ∫ ρ e² over this piece (exact antiderivatives).
    fn weighted_norm_sq(&self, rho: f64) -> f64 {
        let l = self.hi - self.lo;
        let k = self.k;
        let s2 = (2.0 * k * l).sin();
        let c2 = (2.0 * k * l).cos();
        let int_sin2 = l / 2.0 - s2 / (4.0 * k);
        let int_cos2 = l / 2.0 + s2 / (4.0 * k);
        let int_cross = (1.0 - c2) / (4.0 * k);
        rho * (self.a * self.a * int_sin2
            + self.b * self.b * int_cos2
            + 2.0 * self.a * self.b * int_cross)
    }

    /// Zeros with global coordinate in `[lo - δ, hi - δ)` intersected with
    /// the window `[x_lo, x_hi]`. The shifted half-open convention makes
    /// the per-piece ranges tile the interval, so a zero sitting on a piece
    /// interface is counted by exactly one of the two adjacent pieces. The
    /// zeros of `C sin(ks + φ)` are simple and separated by `π/k`, so the
    /// count is exact.
    fn zeros_within(&self, x_lo: f64, x_hi: f64) -> usize {
        const DELTA: f64 = 1e-9;
        let c = (self.a * self.a + self.b * self.b).sqrt();
        if c == 0.0 {
            return 0;
        }
        let phase = f64::atan2(self.b, self.a);
        let len = self.hi - self.lo;
        let mut count = 0;
        let m_lo = ((-DELTA * self.k + phase) / std::f64::consts::PI).floor() as i64 - 1;
        let m_hi = ((self.k * len + phase) / std::f64::consts::PI).ceil() as i64 + 1;
        for m in m_lo..=m_hi {
            // zeros at s = (mπ - phase)/k
            let s = (m as f64 * std::f64::consts::PI - phase) / self.k;
            let x = self.lo + s;
            if x >= self.lo - DELTA && x < self.hi - DELTA && x >= x_lo && x <= x_hi {
                count += 1;
            }
        }
        count
    }
}

/// A Dirichlet eigenpair: frequency ω (eigenvalue ω²) and the piecewise
/// closed-form mode, normalized in `L²(ρ dx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub omega: f64,
    pub pieces: Vec<ModePiece>,
    /// `∫ ρ e² dx` recomputed after normalization; 1 up to roundoff.
    pub norm_check: f64,
}

impl EigenPair {
    pub fn eval(&self, x: f64) -> f64 {
        let k = self
            .pieces
            .partition_point(|p| p.hi < x)
            .min(self.pieces.len() - 1);
        self.pieces[k].eval(x)
    }

    /// Number of zeros strictly inside (0,1). The Dirichlet zeros at the
    /// endpoints are excluded by a 1e-8 margin; interior zeros are
    /// separated by at least π/k, far wider than the margin at desk scale.
    pub fn interior_zeros(&self) -> usize {
        self.pieces.iter().map(|p| p.zeros_within(1e-8, 1.0 - 1e-8)).sum()
    }
}

/// Finite Dirichlet eigenbasis with its density.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    pub density: DensitySpec,
    pub pairs: Vec<EigenPair>,
}

impl Basis {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn omega(&self, j: usize) -> f64 {
        self.pairs[j].omega
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.omega).collect()
    }

    /// `∫ ρ e_i e_j dx` by adaptive quadrature on piece-aligned panels
    /// resolving the fastest oscillation.
    pub fn weighted_inner(&self, i: usize, j: usize) -> f64 {
        let mut total = 0.0;
        for (iv, rho) in self.density.pieces() {
            let kmax = (self.pairs[i].omega + self.pairs[j].omega) * rho.sqrt();
            let panels = ((iv.length() * kmax / std::f64::consts::PI).ceil() as usize + 3).max(4);
            let f = |x: f64| rho * self.pairs[i].eval(x) * self.pairs[j].eval(x);
            total += adaptive_simpson_panels(&f, iv.lo, iv.hi, 1e-13, panels);
        }
        total
    }
}

/// The constant-density basis: `ω_j = jπ`, `e_j = √2 sin(jπx)`.
pub fn sine_basis(j_max: usize) -> Basis {
    let density = DensitySpec::constant(1.0).expect("unit density is valid");
    let pairs = (1..=j_max)
        .map(|j| {
            let omega = j as f64 * std::f64::consts::PI;
            EigenPair {
                omega,
                pieces: vec![ModePiece {
                    lo: 0.0,
                    hi: 1.0,
                    k: omega,
                    a: std::f64::consts::SQRT_2,
                    b: 0.0,
                }],
                norm_check: 1.0,
            }
        })
        .collect();
    Basis { density, pairs }
}

/// Secular function `φ(ω) = e(1)` for the shooting solution with
/// `(e, e')(0) = (0, 1)`, propagated exactly across the pieces.
fn secular(density: &DensitySpec, omega: f64) -> f64 {
    let (v, _) = propagate(density, omega);
    v
}

fn propagate(density: &DensitySpec, omega: f64) -> (f64, f64) {
    let mut v = 0.0f64; // value
    let mut d = 1.0f64; // slope
    for (iv, rho) in density.pieces() {
        let k = omega * rho.sqrt();
        let l = iv.length();
        let (s, c) = ((k * l).sin(), (k * l).cos());
        let nv = v * c + d / k * s;
        let nd = -v * k * s + d * c;
        v = nv;
        d = nd;
    }
    (v, d)
}

/// First `j_max` Dirichlet eigenpairs of `e'' + ρ ω² e = 0` by transfer
/// matrices: bracket the secular roots on a grid of step `π δ / 4`, bisect,
/// build the piecewise mode, normalize in `L²(ρ dx)`.
pub fn sturm_liouville_basis(density: &DensitySpec, j_max: usize) -> Result<Basis> {
    if j_max == 0 {
        return Err(Error::InvalidInput("j_max must be at least 1".into()));
    }
    let mut step = std::f64::consts::PI * density.delta() / 4.0;
    for _attempt in 0..2 {
        match solve_with_step(density, j_max, step) {
            Ok(basis) => return Ok(basis),
            Err(Error::Numerical(_)) => {
                // bracketing-refinement retry
                step /= 4.0;
            }
            Err(e) => return Err(e),
        }
    }
    solve_with_step(density, j_max, step)
}

fn solve_with_step(density: &DensitySpec, j_max: usize, step: f64) -> Result<Basis> {
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(j_max);
    let mut lo = step * 1e-6;
    let mut flo = secular(density, lo);
    let mut omega_hi = lo;
    while pairs.len() < j_max {
        let hi = omega_hi + step;
        let fhi = secular(density, hi);
        if flo == 0.0 {
            // grid point hit a root exactly
            pairs.push(build_pair(density, lo)?);
        } else if flo.signum() != fhi.signum() {
            let root = bisect(density, lo, hi, flo);
            pairs.push(build_pair(density, root)?);
        }
        lo = hi;
        flo = fhi;
        omega_hi = hi;
        if omega_hi > 1e7 {
            return Err(Error::Numerical(format!(
                "no further eigenfrequencies found below {omega_hi}"
            )));
        }
    }
    // Sturm oscillation safety net: mode j must have exactly j-1 interior zeros
    for (idx, p) in pairs.iter().enumerate() {
        let z = p.interior_zeros();
        if z != idx {
            return Err(Error::Numerical(format!(
                "oscillation count mismatch: mode {} has {} interior zeros",
                idx + 1,
                z
            )));
        }
    }
    Ok(Basis { density: density.clone(), pairs })
}

fn bisect(density: &DensitySpec, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let slo = flo.signum();
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = secular(density, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == slo {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * (1.0 + mid.abs()) * 1e-3 {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn build_pair(density: &DensitySpec, omega: f64) -> Result<EigenPair> {
    let mut v = 0.0f64;
    let mut d = 1.0f64;
    let mut pieces = Vec::with_capacity(density.pieces().len());
    for (iv, rho) in density.pieces() {
        let k = omega * rho.sqrt();
        let l = iv.length();
        pieces.push(ModePiece { lo: iv.lo, hi: iv.hi, k, a: d / k, b: v });
        let (s, c) = ((k * l).sin(), (k * l).cos());
        let nv = v * c + d / k * s;
        let nd = -v * k * s + d * c;
        v = nv;
        d = nd;
    }
    let norm_sq: f64 = pieces
        .iter()
        .zip(density.pieces())
        .map(|(p, (_, rho))| p.weighted_norm_sq(*rho))
        .sum();
    if !(norm_sq > 0.0) {
        return Err(Error::Numerical(format!("mode at ω={omega} has vanishing norm")));
    }
    let scale = norm_sq.sqrt().recip();
    for p in &mut pieces {
        p.a *= scale;
        p.b *= scale;
    }
    let norm_check: f64 = pieces
        .iter()
        .zip(density.pieces())
        .map(|(p, (_, rho))| p.weighted_norm_sq(*rho))
        .sum();
    Ok(EigenPair { omega, pieces, norm_check })
}

/// Number of eigenfrequencies `ω_j ≤ μ`. Errors when μ exceeds the computed
/// spectrum (the count would silently saturate otherwise).
pub fn count_below(basis: &Basis, mu: f64) -> Result<usize> {
    if mu < 0.0 {
        return Err(Error::InvalidInput("μ must be nonnegative".into()));
    }
    match basis.pairs.last() {
        Some(last) if last.omega < mu => Err(Error::InvalidInput(format!(
            "μ = {mu} exceeds the computed spectrum (ω_J = {}); increase J",
            last.omega
        ))),
        None => Err(Error::InvalidInput("empty basis".into())),
        _ => Ok(basis.pairs.partition_point(|p| p.omega <= mu)),
    }
}
