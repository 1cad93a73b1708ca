//! Measurable control/observation sets on the line and in the plane.
//!
//! Sets are finite unions of disjoint closed intervals (1D) or axis-aligned
//! rectangles (2D), so measures, intersections and segment traces are all
//! exact — no quadrature enters the geometric side of the estimates.

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Interval> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidInput(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Intersection length with another interval.
    pub fn overlap(&self, o: &Interval) -> f64 {
        (self.hi.min(o.hi) - self.lo.max(o.lo)).max(0.0)
    }
}

/// Finite union of disjoint closed intervals inside an ambient interval,
/// kept sorted. The universal representation of control regions ω and
/// observation sets E.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurableSet1D {
    intervals: Vec<Interval>,
    ambient: Interval,
}

impl MeasurableSet1D {
    /// Build from raw `[lo, hi]` pairs. Overlapping or touching pieces are
    /// merged; the result is sorted and disjoint.
    pub fn new(pairs: &[[f64; 2]], ambient: Interval) -> Result<MeasurableSet1D> {
        let mut iv = Vec::with_capacity(pairs.len());
        for p in pairs {
            let i = Interval::new(p[0], p[1])?;
            if i.lo < ambient.lo - 1e-15 || i.hi > ambient.hi + 1e-15 {
                return Err(Error::InvalidInput(format!(
                    "interval [{}, {}] outside ambient [{}, {}]",
                    i.lo, i.hi, ambient.lo, ambient.hi
                )));
            }
            iv.push(i);
        }
        iv.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        let mut merged: Vec<Interval> = Vec::with_capacity(iv.len());
        for i in iv {
            match merged.last_mut() {
                Some(last) if i.lo <= last.hi => last.hi = last.hi.max(i.hi),
                _ => merged.push(i),
            }
        }
        Ok(MeasurableSet1D { intervals: merged, ambient })
    }

    pub fn unit(pairs: &[[f64; 2]]) -> Result<MeasurableSet1D> {
        MeasurableSet1D::new(pairs, Interval { lo: 0.0, hi: 1.0 })
    }

    pub fn empty(ambient: Interval) -> MeasurableSet1D {
        MeasurableSet1D { intervals: Vec::new(), ambient }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn ambient(&self) -> Interval {
        self.ambient
    }

    /// Lebesgue measure: sum of the component lengths.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        // intervals are sorted; binary search by lower end
        let k = self.intervals.partition_point(|iv| iv.lo <= x);
        k > 0 && self.intervals[k - 1].contains(x)
    }

    pub fn inf(&self) -> Option<f64> {
        self.intervals.first().map(|i| i.lo)
    }

    /// Measure of the intersection with `[lo, hi]`.
    pub fn measure_within(&self, window: &Interval) -> f64 {
        self.intervals.iter().map(|i| i.overlap(window)).sum()
    }

    /// Infimum of the part of the set at or beyond `x0`, if any.
    pub fn inf_from(&self, x0: f64) -> Option<f64> {
        for iv in &self.intervals {
            if iv.hi >= x0 {
                return Some(iv.lo.max(x0));
            }
        }
        None
    }

    /// Affine image `t -> (t - shift) / scale`, with the ambient mapped the
    /// same way. `scale` must be positive.
    pub fn affine(&self, shift: f64, scale: f64) -> MeasurableSet1D {
        let map = |x: f64| (x - shift) / scale;
        MeasurableSet1D {
            intervals: self
                .intervals
                .iter()
                .map(|i| Interval { lo: map(i.lo), hi: map(i.hi) })
                .collect(),
            ambient: Interval { lo: map(self.ambient.lo), hi: map(self.ambient.hi) },
        }
    }

    /// Intersection with a window, re-anchored to that window as ambient.
    pub fn intersect(&self, window: &Interval) -> MeasurableSet1D {
        let mut out = Vec::new();
        for i in &self.intervals {
            let lo = i.lo.max(window.lo);
            let hi = i.hi.min(window.hi);
            if lo <= hi {
                out.push(Interval { lo, hi });
            }
        }
        MeasurableSet1D { intervals: out, ambient: *window }
    }
}

/// Symmetric fat-Cantor construction: at step k = 1..depth the open middle
/// of relative length `ratio^k` is removed from each remaining interval.
/// The measure is the product Π (1 - ratio^k), positive for ratio < 1/3,
/// while the limit set contains no interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FatCantorSpec {
    pub depth: u32,
    pub removal_ratio: f64,
}

impl FatCantorSpec {
    pub fn new(depth: u32, removal_ratio: f64) -> Result<FatCantorSpec> {
        if !(removal_ratio > 0.0 && removal_ratio < 1.0 / 3.0) {
            return Err(Error::InvalidInput(format!(
                "removal ratio {removal_ratio} outside (0, 1/3)"
            )));
        }
        Ok(FatCantorSpec { depth, removal_ratio })
    }

    /// Generate the set inside `ambient`.
    pub fn generate(&self, ambient: Interval) -> MeasurableSet1D {
        let mut pieces = vec![ambient];
        for k in 1..=self.depth {
            let frac = self.removal_ratio.powi(k as i32);
            let mut next = Vec::with_capacity(pieces.len() * 2);
            for p in pieces {
                let len = p.length();
                let gap = frac * len;
                let left = Interval { lo: p.lo, hi: p.lo + (len - gap) / 2.0 };
                let right = Interval { lo: p.hi - (len - gap) / 2.0, hi: p.hi };
                next.push(left);
                next.push(right);
            }
            pieces = next;
        }
        MeasurableSet1D { intervals: pieces, ambient }
    }

    /// Closed-form measure of the generated set relative to a unit ambient.
    pub fn measure_closed_form(&self) -> f64 {
        (1..=self.depth).map(|k| 1.0 - self.removal_ratio.powi(k as i32)).product()
    }
}

/// Greedy node placement used by the polynomial-interpolation step: the
/// first node is `inf E`, and each next node is the infimum of E past a gap
/// of `|E|/(n+1)`. Returns n+1 points in the closure of E, strictly
/// increasing, consecutive gaps ≥ `|E|/(n+1)`.
pub fn greedy_nodes(e: &MeasurableSet1D, n: usize) -> Result<Vec<f64>> {
    let me = e.measure();
    if me <= 0.0 {
        return Err(Error::InvalidInput("greedy_nodes: set has zero measure".into()));
    }
    let amb = e.ambient();
    if amb.lo < -0.2 - 1e-12 || amb.hi > 0.2 + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "greedy_nodes: E must live in [-1/5, 1/5], ambient is [{}, {}]",
            amb.lo, amb.hi
        )));
    }
    let gap = me / (n as f64 + 1.0);
    let mut nodes = Vec::with_capacity(n + 1);
    let mut x = e.inf().unwrap();
    nodes.push(x);
    for _ in 0..n {
        match e.inf_from(x + gap) {
            Some(nx) => {
                nodes.push(nx);
                x = nx;
            }
            None => {
                return Err(Error::Infeasible(format!(
                    "greedy_nodes: cannot place {} points with gap {gap}",
                    n + 1
                )))
            }
        }
    }
    Ok(nodes)
}

/// The best cell of the pigeonhole partition and its intersection measure.
///
/// `[0,1]` is split into cells of length `2ρ/5` anchored at 0 (the last cell
/// clipped at 1, `⌈5/(2ρ)⌉` cells in total); returns the cell of maximal
/// `|E ∩ I|`. That maximum is at least `|E| / ⌈5/(2ρ)⌉`.
pub fn best_subinterval(e: &MeasurableSet1D, rho: f64) -> Result<(Interval, f64)> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidInput(format!("best_subinterval: rho {rho} outside (0,1]")));
    }
    if e.measure() <= 0.0 {
        return Err(Error::InvalidInput("best_subinterval: set has zero measure".into()));
    }
    let cell = 2.0 * rho / 5.0;
    let ncells = (5.0 / (2.0 * rho)).ceil() as usize;
    let mut best = (Interval { lo: 0.0, hi: cell.min(1.0) }, -1.0);
    for k in 0..ncells {
        let lo = k as f64 * cell;
        let hi = ((k + 1) as f64 * cell).min(1.0);
        let iv = Interval { lo, hi };
        let m = e.measure_within(&iv);
        if m > best.1 {
            best = (iv, m);
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// 2D rectangle unions and segment traces
// ---------------------------------------------------------------------------

/// Axis-aligned rectangle `[x0,x1] × [y0,y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Rect> {
        if x0 > x1 || y0 > y1 {
            return Err(Error::InvalidInput(format!(
                "bad rectangle [{x0},{x1}]x[{y0},{y1}]"
            )));
        }
        Ok(Rect { x0, x1, y0, y1 })
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Parameter range `t` for which `p + t d` lies inside the rectangle
    /// (slab clipping; `d` need not be normalized).
    pub fn clip_ray(&self, p: (f64, f64), d: (f64, f64)) -> Option<(f64, f64)> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for (pos, dir, lo, hi) in
            [(p.0, d.0, self.x0, self.x1), (p.1, d.1, self.y0, self.y1)]
        {
            if dir == 0.0 {
                if pos < lo || pos > hi {
                    return None;
                }
            } else {
                let a = (lo - pos) / dir;
                let b = (hi - pos) / dir;
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                t0 = t0.max(a);
                t1 = t1.min(b);
            }
        }
        if t0 <= t1 {
            Some((t0, t1))
        } else {
            None
        }
    }
}

/// Finite union of axis-aligned rectangles (not necessarily disjoint;
/// traces and measures account for overlaps by interval merging).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RectSet {
    pub rects: Vec<Rect>,
}

impl RectSet {
    pub fn new(rects: Vec<Rect>) -> RectSet {
        RectSet { rects }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.rects
            .iter()
            .any(|r| r.x0 <= x && x <= r.x1 && r.y0 <= y && y <= r.y1)
    }
}

/// Trace of the unit-speed segment `{x + t z : t ∈ [0,1]}` through `e`:
/// returns the trace as a 1D set in `[0,1]` together with its measure.
pub fn ray_measure(e: &RectSet, x: (f64, f64), z: (f64, f64)) -> (f64, MeasurableSet1D) {
    let mut pieces: Vec<[f64; 2]> = Vec::new();
    for r in &e.rects {
        if let Some((t0, t1)) = r.clip_ray(x, z) {
            let lo = t0.max(0.0);
            let hi = t1.min(1.0);
            if lo <= hi {
                pieces.push([lo, hi]);
            }
        }
    }
    let set = MeasurableSet1D::new(&pieces, Interval { lo: 0.0, hi: 1.0 })
        .expect("trace pieces are valid by construction");
    (set.measure(), set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(pairs: &[[f64; 2]]) -> MeasurableSet1D {
        MeasurableSet1D::unit(pairs).unwrap()
    }

    #[test]
    fn measure_of_union() {
        assert!((unit(&[[0.0, 0.3], [0.5, 0.7]]).measure() - 0.5).abs() < 1e-15);
        assert_eq!(MeasurableSet1D::empty(Interval { lo: 0.0, hi: 1.0 }).measure(), 0.0);
    }

    #[test]
    fn fat_cantor_measure_matches_product() {
        let spec = FatCantorSpec::new(3, 0.25).unwrap();
        let set = spec.generate(Interval { lo: 0.0, hi: 1.0 });
        let expect = (1.0 - 0.25) * (1.0 - 0.0625) * (1.0 - 0.015625);
        assert!((set.measure() - expect).abs() < 1e-14);
        assert!((spec.measure_closed_form() - expect).abs() < 1e-15);
        assert_eq!(set.intervals().len(), 8);
        // no interior interval longer than the pieces themselves
        assert!(set.measure() > 0.0);
    }

    #[test]
    fn greedy_nodes_examples() {
        let amb = Interval { lo: -0.2, hi: 0.2 };
        let e = MeasurableSet1D::new(&[[-0.2, 0.2]], amb).unwrap();
        assert_eq!(greedy_nodes(&e, 1).unwrap(), vec![-0.2, 0.0]);
        assert_eq!(greedy_nodes(&e, 0).unwrap(), vec![-0.2]);

        let e2 = MeasurableSet1D::new(&[[-0.2, -0.1], [0.1, 0.2]], amb).unwrap();
        assert_eq!(greedy_nodes(&e2, 1).unwrap(), vec![-0.2, -0.1]);
    }

    #[test]
    fn greedy_nodes_gap_postcondition() {
        let amb = Interval { lo: -0.2, hi: 0.2 };
        let e = MeasurableSet1D::new(&[[-0.2, -0.15], [-0.05, 0.0], [0.1, 0.2]], amb).unwrap();
        for n in 0..6 {
            match greedy_nodes(&e, n) {
                Ok(nodes) => {
                    assert_eq!(nodes.len(), n + 1);
                    let gap = e.measure() / (n as f64 + 1.0);
                    for w in nodes.windows(2) {
                        assert!(w[1] - w[0] >= gap - 1e-12);
                    }
                    for &x in &nodes {
                        // in the closure of E
                        assert!(e.contains(x), "{x} not in E");
                    }
                }
                Err(Error::Infeasible(_)) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn greedy_always_feasible_with_shrinking_gap() {
        // the gap |E|/(n+1) shrinks with n, so the greedy rule succeeds for
        // every n (supply argument); the Infeasible path stays as a guard
        // against float pathologies only
        let amb = Interval { lo: -0.2, hi: 0.2 };
        let e = MeasurableSet1D::new(&[[-0.2, -0.199], [0.199, 0.2]], amb).unwrap();
        for n in [0, 1, 5, 30, 100] {
            let nodes = greedy_nodes(&e, n).unwrap();
            assert_eq!(nodes.len(), n + 1);
        }
    }

    #[test]
    fn best_subinterval_examples() {
        // uniform set, rho = 1: three cells 0.4/0.4/0.2, max intersection 0.4
        let e = unit(&[[0.0, 1.0]]);
        let (iv, m) = best_subinterval(&e, 1.0).unwrap();
        assert!((m - 0.4).abs() < 1e-15);
        assert!((iv.length() - 0.4).abs() < 1e-15);

        let e2 = unit(&[[0.0, 0.1]]);
        let (iv2, m2) = best_subinterval(&e2, 0.5).unwrap();
        assert_eq!((iv2.lo, iv2.hi), (0.0, 0.2));
        assert!((m2 - 0.1).abs() < 1e-15);
    }

    #[test]
    fn best_subinterval_beats_average_cell() {
        let spec = FatCantorSpec::new(3, 0.25).unwrap();
        let e = spec.generate(Interval { lo: 0.0, hi: 1.0 });
        for rho in [0.25, 0.5, 0.9, 1.0] {
            let (_, m) = best_subinterval(&e, rho).unwrap();
            let ncells = (5.0 / (2.0 * rho)).ceil();
            assert!(m >= e.measure() / ncells - 1e-12);
            // exhaustive scan oracle: recompute the max independently
            let cell = 2.0 * rho / 5.0;
            let mut brute: f64 = 0.0;
            let mut k = 0usize;
            loop {
                let lo = k as f64 * cell;
                if lo >= 1.0 {
                    break;
                }
                let iv = Interval { lo, hi: (lo + cell).min(1.0) };
                brute = brute.max(e.measure_within(&iv));
                k += 1;
            }
            assert!((m - brute).abs() < 1e-14);
        }
    }

    #[test]
    fn ray_measure_examples() {
        let square = RectSet::new(vec![Rect::new(0.0, 1.0, 0.0, 1.0).unwrap()]);
        let (m, _) = ray_measure(&square, (0.0, 0.0), (1.0, 0.0));
        assert!((m - 1.0).abs() < 1e-15);

        let half = RectSet::new(vec![Rect::new(0.5, 1.0, 0.0, 1.0).unwrap()]);
        let (m2, tr) = ray_measure(&half, (0.0, 0.0), (1.0, 0.0));
        assert!((m2 - 0.5).abs() < 1e-15);
        assert_eq!(tr.intervals().len(), 1);
        assert!((tr.intervals()[0].lo - 0.5).abs() < 1e-15);

        let d = std::f64::consts::FRAC_1_SQRT_2;
        let (m3, _) = ray_measure(&square, (0.0, 0.0), (d, d));
        assert!((m3 - 1.0).abs() < 1e-15, "diagonal clipped at t=1, got {m3}");
    }

    #[test]
    fn ray_overlapping_rects_merge() {
        let e = RectSet::new(vec![
            Rect::new(0.0, 0.6, 0.0, 1.0).unwrap(),
            Rect::new(0.4, 0.8, 0.0, 1.0).unwrap(),
        ]);
        let (m, _) = ray_measure(&e, (0.0, 0.5), (1.0, 0.0));
        assert!((m - 0.8).abs() < 1e-15);
    }

    #[test]
    fn direction_grid_finds_fat_trace() {
        // for rectangles with positive area inside the unit square there is
        // a sampled direction whose trace from the corner carries at least
        // measure/4
        let fams = [
            RectSet::new(vec![Rect::new(0.0, 1.0, 0.0, 1.0).unwrap()]),
            RectSet::new(vec![Rect::new(0.5, 1.0, 0.0, 1.0).unwrap()]),
            RectSet::new(vec![
                Rect::new(0.1, 0.3, 0.1, 0.9).unwrap(),
                Rect::new(0.6, 0.9, 0.2, 0.8).unwrap(),
            ]),
        ];
        for e in &fams {
            let area: f64 = e.rects.iter().map(Rect::area).sum();
            let best = (0..256)
                .map(|k| {
                    let th = std::f64::consts::PI / 2.0 * (k as f64 + 0.5) / 256.0;
                    ray_measure(e, (0.0, 0.0), (th.cos(), th.sin())).0
                })
                .fold(0.0f64, f64::max);
            assert!(best >= area / 4.0, "best trace {best} < |E|/4 = {}", area / 4.0);
        }
    }

    #[test]
    fn measure_monotone_and_additive() {
        let a = unit(&[[0.1, 0.2], [0.4, 0.6]]);
        let b = unit(&[[0.05, 0.25], [0.3, 0.7]]);
        assert!(a.measure() <= b.measure());
        let merged = unit(&[[0.1, 0.2], [0.4, 0.6], [0.7, 0.8]]);
        assert!(
            (merged.measure() - (a.measure() + 0.1)).abs() < 1e-15,
            "additivity over disjoint union"
        );
    }

    #[test]
    fn interval_order_is_validated() {
        assert!(Interval::new(0.3, 0.1).is_err());
        assert!(MeasurableSet1D::unit(&[[0.5, 0.2]]).is_err());
        assert!(MeasurableSet1D::unit(&[[-0.1, 0.5]]).is_err());
    }
}
