//! Quantitative propagation of smallness for real-analytic functions.
//!
//! The chain of estimates implemented here bounds the sup norm of an
//! analytic function on a ball by its average over an arbitrary measurable
//! subset of positive measure, with an explicit interpolation certificate
//! `‖f‖ ≤ N · data^θ · M^{1-θ}`:
//!
//! 1. log-convexity of sup norms over concentric circles (three-circle
//!    theorem) with exponent `θ = log(r2/r)/log(r2/r1)`,
//! 2. a polynomial-interpolation bound on `B_{1/2}` from a measurable set
//!    `E ⊂ [-1/5, 1/5]` (`disc_interpolation_*`), minimized exactly over the degree,
//! 3. the interval version with quantified analyticity (`interval_smallness_bound`):
//!    pigeonhole cell selection, rescaling to the unit disc, then a chain
//!    of three-circle steps of length `⌈4/ρ⌉`,
//! 4. the measurable-set version on balls (`smallness_bound_*`): a Chebyshev
//!    subset to pass from averages to sup bounds, plus (in 2D) a segment
//!    reduction through a direction search.
//!
//! All constants are constructive; nothing here claims sharpness.

use crate::error::{Error, Result};
use crate::sets::{best_subinterval, ray_measure, Interval, MeasurableSet1D, Rect, RectSet};

/// Largest degree scanned by the interpolation-degree minimization. Beyond 400 the
/// Cauchy-remainder term 2·(7/8)^n is below 1.3e-23.
pub const INTERPOLATION_DEGREE_MAX: u32 = 400;

/// Per-step interpolation exponent of the three-circle chain with radii
/// (ρ/2, 3ρ/4, ρ): log(4/3)/log(2).
pub fn chain_theta_step() -> f64 {
    (4f64 / 3.0).ln() / 2f64.ln()
}

// ---------------------------------------------------------------------------
// domain types
// ---------------------------------------------------------------------------

/// Center of an analyticity ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    One(f64),
    Two(f64, f64),
}

/// Taylor-coefficient bound `|∂^α f(x)| ≤ M |α|! / (ρR)^{|α|}` valid for
/// `x ∈ B_{2R}(center)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticBound {
    pub m: f64,
    pub rho: f64,
    pub r: f64,
    pub center: Point,
}

impl AnalyticBound {
    pub fn new(m: f64, rho: f64, r: f64, center: Point) -> Result<AnalyticBound> {
        if !(m > 0.0) {
            return Err(Error::InvalidInput(format!("analytic bound needs M > 0, got {m}")));
        }
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidInput(format!("rho {rho} outside (0, 1]")));
        }
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!("reference radius {r} must be positive")));
        }
        Ok(AnalyticBound { m, rho, r, center })
    }
}

/// Derivative bound `|f^{(k)}(x)| ≤ M k! (2ρ)^{-k}` on `[0,1]` — the form
/// consumed by `interval_smallness_bound`. Such an `f` extends holomorphically to the
/// ρ-neighborhood of `[0,1]` with `|f| ≤ 2M` there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitIntervalBound {
    pub m: f64,
    pub rho: f64,
}

/// Interpolation certificate: `‖f‖_target ≤ N · data^θ · M^{1-θ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub n: f64,
    pub theta: f64,
}

impl Certificate {
    pub fn new(n: f64, theta: f64) -> Result<Certificate> {
        if !(n >= 1.0 - 1e-12) || !n.is_finite() {
            return Err(Error::InvalidInput(format!("certificate N = {n} must be ≥ 1")));
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::InvalidInput(format!("certificate θ = {theta} outside (0, 1]")));
        }
        Ok(Certificate { n, theta })
    }

    pub fn identity() -> Certificate {
        Certificate { n: 1.0, theta: 1.0 }
    }

    /// Evaluate the right-hand side `N · data^θ · M^{1-θ}`.
    pub fn eval(&self, data: f64, m: f64) -> f64 {
        self.n * data.powf(self.theta) * m.powf(1.0 - self.theta)
    }
}

/// If `A ≤ N₁ B^{θ₁} M^{1-θ₁}` and `B ≤ N₂ C^{θ₂} M^{1-θ₂}` (same `M`),
/// then `A ≤ N₁N₂^{θ₁} C^{θ₁θ₂} M^{1-θ₁θ₂}`.
pub fn compose(c1: &Certificate, c2: &Certificate) -> Certificate {
    Certificate { n: c1.n * c2.n.powf(c1.theta), theta: c1.theta * c2.theta }
}

// ---------------------------------------------------------------------------
// test-function families (exact evaluation)
// ---------------------------------------------------------------------------

/// One exponential-in-y sine mode `(a e^{ωy} + b e^{-ωy}) √2 sin(ωx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub a: f64,
    pub b: f64,
    pub omega: f64,
}

/// Closed-form test functions carrying verifiable analyticity bounds.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// `p(x) = Σ coeffs[k] x^k` (global monomial basis).
    Polynomial { coeffs: Vec<f64> },
    /// `u(x,y) = Σ (a_j e^{ω_j y} + b_j e^{-ω_j y}) √2 sin(ω_j x)`.
    TrigExponential { modes: Vec<Mode> },
}

impl TestFunction {
    pub fn eval1(&self, x: f64) -> f64 {
        match self {
            TestFunction::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
            }
            TestFunction::TrigExponential { .. } => {
                panic!("trig-exponential test functions are two-dimensional")
            }
        }
    }

    pub fn eval2(&self, x: f64, y: f64) -> f64 {
        match self {
            TestFunction::TrigExponential { modes } => modes
                .iter()
                .map(|m| {
                    (m.a * (m.omega * y).exp() + m.b * (-m.omega * y).exp())
                        * std::f64::consts::SQRT_2
                        * (m.omega * x).sin()
                })
                .sum(),
            TestFunction::Polynomial { .. } => panic!("polynomials here are one-dimensional"),
        }
    }
}

/// Verified analyticity bound for a polynomial on `B_{2R}(center) ⊂ ℝ` via
/// the Cauchy estimate on discs of radius ρR: M = Σ |c_j| (|center|+2R+ρR)^j.
pub fn polynomial_analytic_bound(
    coeffs: &[f64],
    center: f64,
    r: f64,
    rho: f64,
) -> Result<AnalyticBound> {
    let reach = center.abs() + 2.0 * r + rho * r;
    let m: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(j, &c)| c.abs() * reach.powi(j as i32))
        .sum();
    if m == 0.0 {
        return Err(Error::Infeasible("zero polynomial has degenerate bound".into()));
    }
    AnalyticBound::new(m, rho, r, Point::One(center))
}

/// Constructive (M, ρ) for a finite trig-exponential mode sum on the strip
/// `ℝ × [-5, 5]`: `M = Σ (|a_j|+|b_j|) √2 e^{5 ω_j}`, `ρ = min(1, 1/(2 ω_max))`,
/// reference radius 1. Every derivative of order k of a pure mode is bounded
/// by its amplitude times `ω^k ≤ (2ρ)^{-k} ≤ k! (ρ·1)^{-k}`.
pub fn taylor_bound_of_mode_sum(modes: &[Mode], center: (f64, f64)) -> Result<AnalyticBound> {
    if modes.is_empty() {
        return Err(Error::InvalidInput("empty mode list".into()));
    }
    let m: f64 = modes
        .iter()
        .map(|md| (md.a.abs() + md.b.abs()) * std::f64::consts::SQRT_2 * (5.0 * md.omega).exp())
        .sum();
    if m == 0.0 {
        return Err(Error::Infeasible("all mode amplitudes vanish; degenerate bound".into()));
    }
    let omega_max = modes.iter().map(|md| md.omega).fold(0.0f64, f64::max);
    if omega_max <= 0.0 {
        return Err(Error::InvalidInput("mode frequencies must be positive".into()));
    }
    let r = 1.0;
    if center.1.abs() + 2.0 * r > 5.0 {
        return Err(Error::InvalidInput(format!(
            "ball B_2({}, {}) leaves the strip |y| ≤ 5",
            center.0, center.1
        )));
    }
    let rho = (1.0 / (2.0 * omega_max)).min(1.0);
    AnalyticBound::new(m, rho, r, Point::Two(center.0, center.1))
}

// ---------------------------------------------------------------------------
// three-circle bound
// ---------------------------------------------------------------------------

/// Hadamard interpolation: given sup bounds `m1` on `B_{r1}` and `m2` on
/// `B_{r2}`, the sup on `B_r` is at most `m1^θ m2^{1-θ}` with
/// `θ = log(r2/r)/log(r2/r1)`.
pub fn three_circle_bound(m1: f64, m2: f64, r1: f64, r: f64, r2: f64) -> Result<(f64, f64)> {
    if !(0.0 < r1 && r1 <= r && r <= r2) {
        return Err(Error::InvalidInput(format!("radii out of order: {r1}, {r}, {r2}")));
    }
    if m1 < 0.0 || m2 < 0.0 {
        return Err(Error::InvalidInput("sup bounds must be nonnegative".into()));
    }
    if r == r1 {
        return Ok((m1, 1.0));
    }
    let theta = (r2 / r).ln() / (r2 / r1).ln();
    Ok((m1.powf(theta) * m2.powf(1.0 - theta), theta))
}

// ---------------------------------------------------------------------------
// interpolation bound from a measurable subset of [-1/5, 1/5]
// ---------------------------------------------------------------------------

/// Exact minimization of `ε (3/|E|)^n + 2 (7/8)^n` over `n = 0..=400`, for a
/// holomorphic `|f| ≤ 1` on the unit disc with `‖f‖_{L∞(E)} = ε`. Returns
/// the minimum and the minimizing degree.
pub fn disc_interpolation_bound(eps_e: f64, meas_e: f64) -> Result<(f64, u32)> {
    if !(eps_e >= 0.0) {
        return Err(Error::InvalidInput(format!("negative data norm {eps_e}")));
    }
    if !(meas_e > 0.0 && meas_e <= 0.4 + 1e-12) {
        return Err(Error::InvalidInput(format!("measure {meas_e} outside (0, 2/5]")));
    }
    let a = 3.0 / meas_e;
    let b = 0.875f64;
    let mut best = f64::INFINITY;
    let mut best_n = 0;
    let mut pa = 1.0f64;
    let mut pb = 1.0f64;
    for n in 0..=INTERPOLATION_DEGREE_MAX {
        // for eps = 0 the first term vanishes even where a^n overflows
        let first = if eps_e == 0.0 { 0.0 } else { eps_e * pa };
        let v = first + 2.0 * pb;
        if v < best {
            best = v;
            best_n = n;
        }
        pa *= a;
        pb *= b;
    }
    Ok((best, best_n))
}

/// Closed-form certificate dominating the scan: `γ = log(8/7)/log(24/(7|E|))`,
/// `N = 2 (3/|E| + 1) 2^{-γ}`, so that `disc_interpolation_bound(ε, |E|) ≤ N ε^γ` for
/// all ε ∈ [0, 1]. The domination is re-verified on a log grid of ε at
/// every call rather than trusted.
pub fn disc_interpolation_certificate(meas_e: f64) -> Result<Certificate> {
    if !(meas_e > 0.0 && meas_e <= 0.4 + 1e-12) {
        return Err(Error::InvalidInput(format!("measure {meas_e} outside (0, 2/5]")));
    }
    let gamma = (8f64 / 7.0).ln() / (24.0 / (7.0 * meas_e)).ln();
    let n = 2.0 * (3.0 / meas_e + 1.0) * 2f64.powf(-gamma);
    let cert = Certificate::new(n, gamma)?;
    for k in 0..=16 {
        let eps = 10f64.powi(-k);
        let (scan, _) = disc_interpolation_bound(eps, meas_e)?;
        let closed = cert.n * eps.powf(cert.theta);
        assert!(
            scan <= closed * (1.0 + 1e-12),
            "interpolation closed form undercuts the scan: eps={eps} scan={scan} closed={closed}"
        );
    }
    Ok(cert)
}

// ---------------------------------------------------------------------------
// interval estimate with quantified analyticity
// ---------------------------------------------------------------------------

/// Outcome of the `interval_smallness_bound` pipeline.
#[derive(Debug, Clone)]
pub struct IntervalSmallnessReport {
    /// Numeric bound on `‖f‖_{L∞[0,1]}`.
    pub bound: f64,
    /// Certificate (N, γ) with `‖f‖ ≤ N ε^γ M^{1-γ}`.
    pub certificate: Certificate,
    /// Selected pigeonhole cell.
    pub cell: Interval,
    /// Measure of the rescaled set inside `[-1/5, 1/5]`.
    pub rescaled_measure: f64,
    /// Number of three-circle steps `⌈4/ρ⌉`.
    pub chain_steps: u32,
}

/// Bound `‖f‖_{L∞[0,1]}` from `‖f‖_{L∞(E)} ≤ eps_e` for `f` with derivative
/// bound `ub` on `[0,1]`:
/// cell selection → affine rescale of `f/(2M)` to the unit disc → exact
/// interpolation-degree minimization → three-circle chain with radii (ρ/2, 3ρ/4, ρ) and
/// centers marching in steps of ρ/4.
pub fn interval_smallness_bound(
    ub: &UnitIntervalBound,
    e: &MeasurableSet1D,
    eps_e: f64,
) -> Result<IntervalSmallnessReport> {
    if !(ub.m > 0.0) || !(ub.rho > 0.0 && ub.rho <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "bad interval bound (M={}, rho={})",
            ub.m, ub.rho
        )));
    }
    if !(eps_e >= 0.0) {
        return Err(Error::InvalidInput("negative data norm".into()));
    }
    let amb = e.ambient();
    if amb.lo < -1e-12 || amb.hi > 1.0 + 1e-12 {
        return Err(Error::InvalidInput("E must live inside [0,1]".into()));
    }
    let chain_steps = (4.0 / ub.rho).ceil();
    if chain_steps > 1e6 {
        return Err(Error::Infeasible(format!(
            "chain of {chain_steps} three-circle steps is impractically long (rho = {})",
            ub.rho
        )));
    }
    let chain_steps = chain_steps as u32;

    let (cell, cell_meas) = best_subinterval(e, ub.rho)?;
    // rescale E ∩ I to the disc chart around the cell center; the cell has
    // length ≤ 2ρ/5, so the image lies in [-1/5, 1/5] with measure ≤ 2/5
    let rescaled_measure = (cell_meas / ub.rho).min(0.4);
    let eps_disc = eps_e / (2.0 * ub.m);
    let (s_raw, _) = disc_interpolation_bound(eps_disc, rescaled_measure)?;
    // max principle: |f/(2M)| ≤ 1 on the extension domain
    let s = s_raw.min(1.0);
    let theta_chain = chain_theta_step().powi(chain_steps as i32);
    let bound = 2.0 * ub.m * s.powf(theta_chain);

    let l1 = disc_interpolation_certificate(rescaled_measure)?;
    let gamma = l1.theta * theta_chain;
    let n = l1.n.powf(theta_chain) * 2f64.powf(1.0 - gamma);
    let certificate = Certificate::new(n, gamma)?;
    debug_assert!(
        eps_e == 0.0 || bound <= certificate.eval(eps_e, ub.m) * (1.0 + 1e-9),
        "numeric pipeline exceeded its own certificate"
    );
    Ok(IntervalSmallnessReport { bound, certificate, cell, rescaled_measure, chain_steps })
}

// ---------------------------------------------------------------------------
// Chebyshev subsets: from averages to sup bounds
// ---------------------------------------------------------------------------

/// Grid samples of `|f|` over a 1D set: cell midpoints with their cell
/// lengths as quadrature weights.
#[derive(Debug, Clone)]
pub struct Samples1D {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Samples1D {
    /// Weighted average of the sampled `|f|`.
    pub fn average(&self) -> f64 {
        let w: f64 = self.weights.iter().sum();
        self.values.iter().zip(&self.weights).map(|(&v, &wi)| v * wi).sum::<f64>() / w
    }
}

/// Default 1D sampling resolution: cells per unit length.
pub const GRID_RES_1D: usize = 1 << 14;

pub fn sample_on_set(e: &MeasurableSet1D, f: impl Fn(f64) -> f64, res_per_unit: usize) -> Samples1D {
    let cell = 1.0 / res_per_unit as f64;
    let mut xs = Vec::new();
    let mut values = Vec::new();
    let mut weights = Vec::new();
    for iv in e.intervals() {
        let n = ((iv.length() / cell).round() as usize).max(1);
        let w = iv.length() / n as f64;
        for k in 0..n {
            let x = iv.lo + (k as f64 + 0.5) * w;
            xs.push(x);
            values.push(f(x).abs());
            weights.push(w);
        }
    }
    Samples1D { xs, values, weights }
}

/// Chebyshev subset on a sampled set: keep the cells where `|f|/2` does not
/// exceed the average of `|f|`; at least half the (grid) measure survives
/// and `2·avg` dominates `|f|` there. Both postconditions are asserted on
/// every invocation.
pub fn chebyshev_subset(s: &Samples1D) -> (MeasurableSet1D, f64) {
    assert!(!s.xs.is_empty(), "chebyshev_subset needs a nonempty sample");
    let total_w: f64 = s.weights.iter().sum();
    let avg = s.average();
    let cap = 2.0 * avg;
    let mut kept_w = 0.0;
    let mut max_kept = 0.0f64;
    let mut pieces: Vec<[f64; 2]> = Vec::new();
    for ((&x, &v), &w) in s.xs.iter().zip(&s.values).zip(&s.weights) {
        if v / 2.0 <= avg {
            kept_w += w;
            max_kept = max_kept.max(v);
            let half = w / 2.0;
            // merge only exactly adjacent cells (same component of E);
            // bridging a real gap would inflate the subset beyond E
            match pieces.last_mut() {
                Some(last) if x - half <= last[1] + half * 1e-9 => last[1] = x + half,
                _ => pieces.push([x - half, x + half]),
            }
        }
    }
    assert!(
        2.0 * kept_w >= total_w * (1.0 - 1e-12),
        "chebyshev subset kept measure {kept_w} below half of {total_w}"
    );
    assert!(cap >= max_kept, "cap {cap} below retained sup {max_kept}");
    let lo = pieces.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let hi = pieces.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
    let set = MeasurableSet1D::new(&pieces, Interval { lo, hi })
        .expect("grid cells form valid intervals");
    (set, cap)
}

/// 2D grid samples over a rectangle union: cell centers and a common cell
/// geometry (dx, dy per rectangle row).
#[derive(Debug, Clone)]
pub struct Samples2D {
    pub cells: Vec<(f64, f64, f64, f64)>, // (x, y, dx, dy)
    pub values: Vec<f64>,
}

/// Default 2D sampling resolution per unit axis length.
pub const GRID_RES_2D: usize = 256;

pub fn sample_on_rects(
    e: &RectSet,
    f: impl Fn(f64, f64) -> f64,
    res_per_unit: usize,
) -> Samples2D {
    let mut cells = Vec::new();
    let mut values = Vec::new();
    // row-major within each rectangle so retained cells merge into runs
    for r in &e.rects {
        let nx = (((r.x1 - r.x0) * res_per_unit as f64).round() as usize).max(1);
        let ny = (((r.y1 - r.y0) * res_per_unit as f64).round() as usize).max(1);
        let dx = (r.x1 - r.x0) / nx as f64;
        let dy = (r.y1 - r.y0) / ny as f64;
        for j in 0..ny {
            for i in 0..nx {
                let x = r.x0 + (i as f64 + 0.5) * dx;
                let y = r.y0 + (j as f64 + 0.5) * dy;
                cells.push((x, y, dx, dy));
                values.push(f(x, y).abs());
            }
        }
    }
    Samples2D { cells, values }
}

/// 2D Chebyshev subset; retained cells are merged into per-row runs of
/// rectangles. Grid-measure and cap postconditions asserted as in 1D.
pub fn chebyshev_subset_2d(s: &Samples2D) -> (RectSet, f64) {
    assert!(!s.cells.is_empty(), "chebyshev_subset_2d needs a nonempty sample");
    let wsum: f64 = s.cells.iter().map(|c| c.2 * c.3).sum();
    let avg: f64 = s
        .cells
        .iter()
        .zip(&s.values)
        .map(|(c, &v)| v * c.2 * c.3)
        .sum::<f64>()
        / wsum;
    let cap = 2.0 * avg;
    let mut kept_w = 0.0;
    let mut max_kept = 0.0f64;
    let mut runs: Vec<Rect> = Vec::new();
    for (c, &v) in s.cells.iter().zip(&s.values) {
        if v / 2.0 <= avg {
            kept_w += c.2 * c.3;
            max_kept = max_kept.max(v);
            let (x, y, dx, dy) = *c;
            match runs.last_mut() {
                Some(last)
                    if (last.y0 - (y - dy / 2.0)).abs() < 1e-12
                        && (last.x1 - (x - dx / 2.0)).abs() < dx * 1e-9 =>
                {
                    last.x1 = x + dx / 2.0;
                }
                _ => runs.push(Rect {
                    x0: x - dx / 2.0,
                    x1: x + dx / 2.0,
                    y0: y - dy / 2.0,
                    y1: y + dy / 2.0,
                }),
            }
        }
    }
    assert!(
        2.0 * kept_w >= wsum * (1.0 - 1e-12),
        "chebyshev 2D kept measure {kept_w} below half of {wsum}"
    );
    assert!(cap >= max_kept, "cap {cap} below retained sup {max_kept}");
    (RectSet::new(runs), cap)
}

// ---------------------------------------------------------------------------
// smallness bounds on balls from measurable observation sets
// ---------------------------------------------------------------------------

/// Result of a propagation-of-smallness certificate computation.
#[derive(Debug, Clone)]
pub struct SmallnessReport {
    /// Numeric bound on the sup over the target ball.
    pub bound: f64,
    /// Certificate in terms of the average `data`: `‖f‖ ≤ N data^θ M^{1-θ}`.
    pub certificate: Certificate,
    /// Average of |f| over E used as data.
    pub data: f64,
    /// Ball the bound refers to: (center, radius).
    pub target_center: Point,
    pub target_radius: f64,
}

/// 1D: Chebyshev subset on E, then the interval estimate along the chart
/// `[center-R, center+R] → [0,1]`. The bound covers the full `B_R` chart.
pub fn smallness_bound_1d(
    ab: &AnalyticBound,
    e: &MeasurableSet1D,
    f: &TestFunction,
    res_per_unit: usize,
) -> Result<SmallnessReport> {
    let c = match ab.center {
        Point::One(c) => c,
        Point::Two(..) => {
            return Err(Error::InvalidInput("1D bound requires a 1D center".into()))
        }
    };
    let half = ab.r / 2.0;
    for iv in e.intervals() {
        if iv.lo < c - half - 1e-12 || iv.hi > c + half + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "E not contained in B_(R/2): [{}, {}] vs [{}, {}]",
                iv.lo,
                iv.hi,
                c - half,
                c + half
            )));
        }
    }
    if e.measure() <= 0.0 {
        return Err(Error::InvalidInput("observation set must have positive measure".into()));
    }
    let samples = sample_on_set(e, |x| f.eval1(x), res_per_unit);
    let data = samples.average();
    let (etilde, cap) = chebyshev_subset(&samples);
    // chart t = (x - (c-R)) / (2R); derivative bound gains (2R)^k, so the
    // interval form has rho_interval = rho/4
    let ehat = etilde.intersect(&Interval { lo: c - ab.r, hi: c + ab.r }).affine(c - ab.r, 2.0 * ab.r);
    let ub = UnitIntervalBound { m: ab.m, rho: ab.rho / 4.0 };
    let rep = interval_smallness_bound(&ub, &ehat, cap)?;
    // cap = 2·data composes into the data certificate
    let cert = Certificate::new(
        rep.certificate.n * 2f64.powf(rep.certificate.theta),
        rep.certificate.theta,
    )?;
    Ok(SmallnessReport {
        bound: rep.bound,
        certificate: cert,
        data,
        target_center: ab.center,
        target_radius: ab.r,
    })
}

/// Search geometry of the 2D bound.
#[derive(Debug, Clone, Copy)]
pub struct SearchGrid {
    /// Points per axis for the x-grid over the target ball.
    pub x_axis_points: usize,
    /// Number of uniformly spaced directions.
    pub directions: usize,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid { x_axis_points: 15, directions: 256 }
    }
}

/// 2D: Chebyshev subset of E, then for every grid point x of the target
/// ball `B_{R/2}` a direction search maximizing the trace measure of the
/// segment `{x + t z}`; the interval estimate runs along that segment. The
/// reported bound is the max over the grid, the certificate the one
/// attached to the maximizing point.
pub fn smallness_bound_2d(
    ab: &AnalyticBound,
    e: &RectSet,
    f: &TestFunction,
    res_per_unit: usize,
    grid: SearchGrid,
) -> Result<SmallnessReport> {
    let (cx, cy) = match ab.center {
        Point::Two(x, y) => (x, y),
        Point::One(_) => return Err(Error::InvalidInput("2D bound requires a 2D center".into())),
    };
    let half = ab.r / 2.0;
    for r in &e.rects {
        for (x, y) in [(r.x0, r.y0), (r.x0, r.y1), (r.x1, r.y0), (r.x1, r.y1)] {
            if ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() > half + 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "E corner ({x}, {y}) outside B_(R/2)"
                )));
            }
        }
    }
    let area: f64 = e.rects.iter().map(Rect::area).sum();
    if area <= 0.0 {
        return Err(Error::InvalidInput("observation set must have positive area".into()));
    }
    let samples = sample_on_rects(e, |x, y| f.eval2(x, y), res_per_unit);
    let wsum: f64 = samples.cells.iter().map(|c| c.2 * c.3).sum();
    let data = samples
        .cells
        .iter()
        .zip(&samples.values)
        .map(|(c, &v)| v * c.2 * c.3)
        .sum::<f64>()
        / wsum;
    let (etilde, cap) = chebyshev_subset_2d(&samples);
    // normalize to the unit geometry: coordinates (p - center)/R
    let norm_rects: Vec<Rect> = etilde
        .rects
        .iter()
        .map(|r| Rect {
            x0: (r.x0 - cx) / ab.r,
            x1: (r.x1 - cx) / ab.r,
            y0: (r.y0 - cy) / ab.r,
            y1: (r.y1 - cy) / ab.r,
        })
        .collect();
    let en = RectSet::new(norm_rects);
    // segment pullback: |d^k/dt^k f(x + tRz)| ≤ M k! (√2/ρ)^k, i.e. the
    // interval form with rho_segment = ρ/(2√2)
    let ub = UnitIntervalBound { m: ab.m, rho: ab.rho / (2.0 * std::f64::consts::SQRT_2) };
    let npts = grid.x_axis_points.max(2);
    let mut best_bound = 0.0f64;
    let mut best_cert: Option<Certificate> = None;
    for i in 0..npts {
        for j in 0..npts {
            let x = -0.5 + (i as f64 + 0.5) / npts as f64;
            let y = -0.5 + (j as f64 + 0.5) / npts as f64;
            if x * x + y * y > 0.25 {
                continue;
            }
            let mut best_trace: Option<MeasurableSet1D> = None;
            let mut best_meas = 0.0;
            for k in 0..grid.directions {
                let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / grid.directions as f64;
                let (m, tr) = ray_measure(&en, (x, y), (th.cos(), th.sin()));
                if m > best_meas {
                    best_meas = m;
                    best_trace = Some(tr);
                }
            }
            let (bound_x, cert_x) = match best_trace {
                Some(tr) if best_meas > 0.0 => {
                    let rep = interval_smallness_bound(&ub, &tr, cap)?;
                    (rep.bound, Some(rep.certificate))
                }
                // no sampled direction meets the subset; fall back to the
                // a-priori sup bound |f| ≤ M
                _ => (ab.m, None),
            };
            if bound_x > best_bound {
                best_bound = bound_x;
                best_cert = cert_x;
            }
        }
    }
    let cert = match best_cert {
        Some(c) => Certificate::new(c.n * 2f64.powf(c.theta), c.theta)?,
        // degenerate search: certificate from the trivial bound ‖f‖ ≤ M
        None => Certificate::identity(),
    };
    Ok(SmallnessReport {
        bound: best_bound,
        certificate: cert,
        data,
        target_center: ab.center,
        target_radius: ab.r / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn three_circle_monomial_equality() {
        // sup |z^2| over radii 1, 2, 4 is 1, 4, 16
        let (b, th) = three_circle_bound(1.0, 16.0, 1.0, 2.0, 4.0).unwrap();
        assert!((b - 4.0).abs() < 1e-12);
        assert!((th - 0.5).abs() < 1e-15);
        // identity case
        let (b2, th2) = three_circle_bound(3.0, 100.0, 1.0, 1.0, 4.0).unwrap();
        assert_eq!((b2, th2), (3.0, 1.0));
        // constant bound
        let (b3, _) = three_circle_bound(7.0, 7.0, 1.0, 2.5, 4.0).unwrap();
        assert!((b3 - 7.0).abs() < 1e-12);
        assert!(three_circle_bound(1.0, 1.0, 2.0, 1.0, 4.0).is_err());
    }

    #[test]
    fn three_circle_exact_for_all_low_powers() {
        for k in 1..=8 {
            for (r1, r, r2) in [(1.0, 2.0, 4.0), (0.5, 1.3, 3.7), (0.1, 0.1, 9.0)] {
                let m1 = r1_pow(r1, k);
                let m2 = r1_pow(r2, k);
                let (b, _) = three_circle_bound(m1, m2, r1, r, r2).unwrap();
                let truth = r1_pow(r, k);
                assert!(
                    (b - truth).abs() <= 1e-12 * truth,
                    "k={k} radii=({r1},{r},{r2}): {b} vs {truth}"
                );
            }
        }
    }

    fn r1_pow(r: f64, k: u32) -> f64 {
        r.powi(k as i32)
    }

    #[test]
    fn interpolation_scan_examples() {
        let (b, n) = disc_interpolation_bound(1.0, 0.4).unwrap();
        assert_eq!((b, n), (3.0, 0));
        // frozen from the exhaustive-scan oracle (mpmath, 40 digits):
        // min_n 1e-12·7.5^n + 2·0.875^n = 0.434510828025 at n = 12
        let (b2, n2) = disc_interpolation_bound(1e-12, 0.4).unwrap();
        assert!((b2 - 0.434510828025).abs() < 1e-9, "{b2}");
        assert_eq!(n2, 12);
        // vanishing data: the scan floors at the Cauchy term with n = 400
        let (b3, n3) = disc_interpolation_bound(0.0, 0.4).unwrap();
        assert_eq!(n3, INTERPOLATION_DEGREE_MAX);
        assert!((b3 - 2.0 * 0.875f64.powi(400)).abs() < 1e-30);
        assert!(b3 < 1e-22);
    }

    #[test]
    fn interpolation_monotonicity() {
        // nonincreasing in measure, nondecreasing in data
        let mut prev = f64::INFINITY;
        for m in [0.05, 0.1, 0.2, 0.3, 0.4] {
            let (b, _) = disc_interpolation_bound(1e-6, m).unwrap();
            assert!(b <= prev + 1e-15);
            prev = b;
        }
        let mut prev = 0.0;
        for k in (1..=12).rev() {
            let (b, _) = disc_interpolation_bound(10f64.powi(-k), 0.2).unwrap();
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn disc_interpolation_certificate_values() {
        let c = disc_interpolation_certificate(0.4).unwrap();
        assert!((c.theta - 0.062152883).abs() < 1e-8, "gamma = {}", c.theta);
        assert!((c.n - 16.28317308).abs() < 1e-6);
        // certificate dominates the scan at the example point
        let closed = c.n * 1e-12f64.powf(c.theta);
        assert!((closed - 2.9235091).abs() < 1e-5);
        assert!(closed >= disc_interpolation_bound(1e-12, 0.4).unwrap().0);
        // gamma increases with the measure
        let lo = disc_interpolation_certificate(0.05).unwrap();
        assert!(lo.theta < c.theta);
        // measure at the cap with unit data: bound ≥ 1
        assert!(c.eval(1.0, 1.0) >= 1.0);
    }

    #[test]
    fn compose_rules() {
        let id = Certificate::identity();
        let c = Certificate::new(5.0, 0.3).unwrap();
        let r = compose(&id, &c);
        assert!((r.n - 5.0).abs() < 1e-15 && (r.theta - 0.3).abs() < 1e-15);
        let a = Certificate::new(2.0, 0.5).unwrap();
        let b = Certificate::new(8.0, 0.5).unwrap();
        let ab = compose(&a, &b);
        assert!((ab.n - 2.0 * 8f64.sqrt()).abs() < 1e-12);
        assert!((ab.theta - 0.25).abs() < 1e-15);
    }

    #[test]
    fn compose_associative() {
        let cs = [
            Certificate::new(3.7, 0.21).unwrap(),
            Certificate::new(1.2, 0.93).unwrap(),
            Certificate::new(44.0, 0.5).unwrap(),
        ];
        let left = compose(&compose(&cs[0], &cs[1]), &cs[2]);
        let right = compose(&cs[0], &compose(&cs[1], &cs[2]));
        assert!((left.n - right.n).abs() <= 1e-12 * right.n);
        assert!((left.theta - right.theta).abs() <= 1e-15);
    }

    #[test]
    fn interval_bound_chain_step_count() {
        let ub = UnitIntervalBound { m: 1.0, rho: 0.5 };
        let e = MeasurableSet1D::unit(&[[0.0, 1.0]]).unwrap();
        let rep = interval_smallness_bound(&ub, &e, 1e-8).unwrap();
        assert_eq!(rep.chain_steps, 8);
        // sandwich: a sound bound sits between the data and the a-priori 2M
        assert!(rep.bound >= 1e-8);
        assert!(rep.bound <= 2.0 * ub.m);
        // frozen pipeline value: s = disc_interpolation_bound(5e-9, 0.4) = 0.7372742891…,
        // bound = 2·s^(θ^8) with θ = log(4/3)/log 2
        let s = disc_interpolation_bound(5e-9, 0.4).unwrap().0;
        let expect = 2.0 * s.powf(chain_theta_step().powi(8));
        assert!((rep.bound - expect).abs() < 1e-12);
        assert!((rep.bound - 1.9994633).abs() < 1e-6);
    }

    #[test]
    fn interval_bound_sound_on_constants() {
        let ub = UnitIntervalBound { m: 3.0, rho: 0.8 };
        let e = MeasurableSet1D::unit(&[[0.2, 0.3]]).unwrap();
        // f ≡ c has ‖f‖_E = c and sup = c
        let c = 3.0;
        let rep = interval_smallness_bound(&ub, &e, c).unwrap();
        assert!(rep.bound >= c);
    }

    #[test]
    fn interval_bound_rejects_tiny_rho() {
        let ub = UnitIntervalBound { m: 1.0, rho: 1e-7 };
        let e = MeasurableSet1D::unit(&[[0.0, 1.0]]).unwrap();
        assert!(matches!(interval_smallness_bound(&ub, &e, 0.5), Err(Error::Infeasible(_))));
    }

    #[test]
    fn chebyshev_examples() {
        // constant function keeps everything
        let e = MeasurableSet1D::unit(&[[0.2, 0.7]]).unwrap();
        let s = sample_on_set(&e, |_| 3.0, 4096);
        let (et, cap) = chebyshev_subset(&s);
        assert!((cap - 6.0).abs() < 1e-12);
        assert!((et.measure() - 0.5).abs() < 1e-3);

        // spike on (0.9, 1] is excluded, cap = 21.8
        let e2 = MeasurableSet1D::unit(&[[0.0, 1.0]]).unwrap();
        let s2 = sample_on_set(&e2, |x| if x <= 0.9 { 1.0 } else { 100.0 }, 1 << 14);
        let (et2, cap2) = chebyshev_subset(&s2);
        assert!((cap2 - 21.8).abs() < 0.05, "cap {cap2}");
        assert!((et2.measure() - 0.9).abs() < 1e-3);
        assert!(et2.intervals().last().unwrap().hi < 0.905);

        // f = x keeps everything with cap 1
        let s3 = sample_on_set(&e2, |x| x, 1 << 14);
        let (et3, cap3) = chebyshev_subset(&s3);
        assert!((cap3 - 1.0).abs() < 1e-3);
        assert!((et3.measure() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn taylor_bound_single_mode() {
        let modes = [Mode { a: 1.0, b: 0.0, omega: PI }];
        let ab = taylor_bound_of_mode_sum(&modes, (0.5, 0.5)).unwrap();
        assert!((ab.m - std::f64::consts::SQRT_2 * (5.0 * PI).exp()).abs() < 1e-6);
        assert!((ab.rho - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(taylor_bound_of_mode_sum(&[], (0.5, 0.5)).is_err());
        assert!(taylor_bound_of_mode_sum(
            &[Mode { a: 0.0, b: 0.0, omega: PI }],
            (0.5, 0.5)
        )
        .is_err());
    }

    #[test]
    fn taylor_bound_vs_finite_differences() {
        // two modes; check |∂^k u| on a grid against M k! (ρR)^{-k} up to
        // order 6, in both axis directions
        let modes = [
            Mode { a: 0.7, b: -0.2, omega: PI },
            Mode { a: -0.4, b: 0.1, omega: 2.0 * PI },
        ];
        let ab = taylor_bound_of_mode_sum(&modes, (0.5, 0.5)).unwrap();
        let f = TestFunction::TrigExponential { modes: modes.to_vec() };
        let h = 1e-2;
        for &(x, y) in &[(0.3, 0.4), (0.5, 0.5), (0.7, 0.2)] {
            for k in 1..=6usize {
                // k-th derivative via iterated central differences:
                // Δ^k f / h^k with Δ^k f = Σ (-1)^{k-i} C(k,i) f(x + (i - k/2) h)
                let mut dx = 0.0;
                let mut dy = 0.0;
                for i in 0..=k {
                    let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
                    let off = (i as f64 - k as f64 / 2.0) * h;
                    dx += sign * binomial(k, i) * f.eval2(x + off, y);
                    dy += sign * binomial(k, i) * f.eval2(x, y + off);
                }
                let fd_x = (dx / h.powi(k as i32)).abs();
                let fd_y = (dy / h.powi(k as i32)).abs();
                let cap = ab.m * factorial(k) / (ab.rho * ab.r).powi(k as i32);
                assert!(fd_x <= cap * 1.01, "k={k} at ({x},{y}): {fd_x} vs {cap}");
                assert!(fd_y <= cap * 1.01, "k={k} at ({x},{y}): {fd_y} vs {cap}");
            }
        }
    }

    fn binomial(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    #[test]
    fn smallness_1d_constant_soundness() {
        let coeffs = vec![0.25];
        let ab = polynomial_analytic_bound(&coeffs, 0.0, 0.25, 1.0).unwrap();
        let f = TestFunction::Polynomial { coeffs };
        let e = MeasurableSet1D::new(&[[-0.1, 0.05]], Interval { lo: -0.125, hi: 0.125 }).unwrap();
        let rep = smallness_bound_1d(&ab, &e, &f, GRID_RES_1D).unwrap();
        assert!(rep.bound >= 0.25, "bound {} below constant", rep.bound);
        assert!(rep.bound <= rep.certificate.eval(rep.data, ab.m) * (1.0 + 1e-9));
    }

    #[test]
    fn smallness_1d_chebyshev_polynomial() {
        // T_8 rescaled so its verified analytic bound has M = 1
        let t8 = [1.0, 0.0, -32.0, 0.0, 160.0, 0.0, -256.0, 0.0, 128.0];
        let raw = polynomial_analytic_bound(&t8, 0.0, 1.0, 1.0).unwrap();
        let coeffs: Vec<f64> = t8.iter().map(|c| c / raw.m).collect();
        let ab = polynomial_analytic_bound(&coeffs, 0.0, 1.0, 1.0).unwrap();
        assert!((ab.m - 1.0).abs() < 1e-12);
        let f = TestFunction::Polynomial { coeffs };
        let e = MeasurableSet1D::new(&[[-0.2, 0.2]], Interval { lo: -0.5, hi: 0.5 }).unwrap();
        let rep = smallness_bound_1d(&ab, &e, &f, GRID_RES_1D).unwrap();
        // dense-grid sup oracle over the covered half-ball
        let mut sup: f64 = 0.0;
        for k in 0..=4096 {
            let x = -0.5 + k as f64 / 4096.0;
            sup = sup.max(f.eval1(x).abs());
        }
        assert!(rep.bound >= sup, "bound {} < sup {}", rep.bound, sup);
    }

    #[test]
    fn smallness_2d_single_mode() {
        let modes = vec![Mode { a: 1.0, b: 0.0, omega: PI }];
        let ab = taylor_bound_of_mode_sum(&modes, (0.5, 0.5)).unwrap();
        let f = TestFunction::TrigExponential { modes };
        let e = RectSet::new(vec![Rect::new(0.3, 0.7, 0.3, 0.7).unwrap()]);
        let rep =
            smallness_bound_2d(&ab, &e, &f, GRID_RES_2D, SearchGrid::default()).unwrap();
        // grid sup over the target ball B_{1/2}(0.5, 0.5)
        let mut sup: f64 = 0.0;
        let n = 160;
        for i in 0..=n {
            for j in 0..=n {
                let x = 0.5 + (i as f64 / n as f64 - 0.5);
                let y = 0.5 + (j as f64 / n as f64 - 0.5);
                if (x - 0.5).powi(2) + (y - 0.5).powi(2) <= 0.25 {
                    sup = sup.max(f.eval2(x, y).abs());
                }
            }
        }
        assert!(rep.bound >= sup, "bound {} < sup {}", rep.bound, sup);
        assert!(rep.bound.is_finite());
        assert!((rep.target_radius - 0.5).abs() < 1e-15);
    }
}
