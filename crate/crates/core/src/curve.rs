//! Geometry of the degenerate curve (xi, |xi|^a): delta-neighborhoods,
//! separated sets, frequency blocks, the sharp loss exponent, and the
//! Minkowski-sum overlap count.

use rayon::prelude::*;

use crate::interval::IntervalUnion;
use crate::sublevel::{sublevel_set, SublevelQuery};
use crate::{Error, Result};

/// The curve exponent `a` of `Gamma_a = {(xi, |xi|^a) : |xi| <= 1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSpec {
    a: f64,
}

impl CurveSpec {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0) || a == 1.0 || !a.is_finite() {
            return Err(Error::InvalidCurve(a));
        }
        Ok(CurveSpec { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Curve height `|xi|^a`.
    pub fn height(&self, xi1: f64) -> f64 {
        xi1.abs().powf(self.a)
    }

    /// True iff `(xi1, xi2)` lies in the delta-neighborhood of the curve.
    pub fn in_neighborhood(&self, xi1: f64, xi2: f64, delta: f64) -> bool {
        xi1.abs() <= 1.0 && (xi2 - self.height(xi1)).abs() <= delta
    }
}

/// Decomposition parameters: thickness `delta`, block-scale exponent `b`,
/// and the separation multiplier `sigma` (spacing `sigma * delta^(1/b)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionSpec {
    pub delta: f64,
    pub b: f64,
    pub separation: f64,
}

impl DecompositionSpec {
    pub fn new(delta: f64, b: f64, separation: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidDecomposition(format!("delta = {delta} not in (0,1)")));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidDecomposition(format!("b = {b} must be positive")));
        }
        if !(separation >= 1.0) {
            return Err(Error::InvalidDecomposition(format!(
                "separation multiplier {separation} must be >= 1"
            )));
        }
        Ok(DecompositionSpec { delta, b, separation })
    }

    /// The default separation multiplier 2.
    pub fn standard(delta: f64, b: f64) -> Result<Self> {
        Self::new(delta, b, 2.0)
    }

    /// Block half-width `delta^(1/b)`.
    pub fn half_width(&self) -> f64 {
        self.delta.powf(1.0 / self.b)
    }

    /// Center spacing `sigma * delta^(1/b)`.
    pub fn spacing(&self) -> f64 {
        self.separation * self.half_width()
    }
}

/// A finite sorted set of block centers in `[-1, 1]` with a recorded minimum
/// gap.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedSet {
    points: Vec<f64>,
    spacing_floor: f64,
}

impl SeparatedSet {
    pub fn new(points: Vec<f64>, spacing_floor: f64) -> Result<Self> {
        for &p in &points {
            if !(-1.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("center {p} outside [-1, 1]")));
            }
        }
        for w in points.windows(2) {
            if w[1] - w[0] < spacing_floor * (1.0 - 1e-9) {
                return Err(Error::Domain(format!(
                    "gap {} below spacing floor {spacing_floor}",
                    w[1] - w[0]
                )));
            }
        }
        Ok(SeparatedSet { points, spacing_floor })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing_floor(&self) -> f64 {
        self.spacing_floor
    }
}

/// A frequency block `theta_omega`: the slab of the curve neighborhood with
/// first coordinate within `delta^(1/b)` of the center.
#[derive(Debug, Clone, Copy)]
pub struct Block {
    pub center: f64,
    pub half_width: f64,
    pub curve: CurveSpec,
    pub thickness: f64,
}

impl Block {
    pub fn contains(&self, xi1: f64, xi2: f64) -> bool {
        (xi1 - self.center).abs() <= self.half_width
            && self.curve.in_neighborhood(xi1, xi2, self.thickness)
    }
}

/// The sharp loss exponent `rho(a, b) = max{0, 1/b - 1/a, 1/b - 1/2}`.
pub fn rho(curve: &CurveSpec, b: f64) -> f64 {
    let inv_b = 1.0 / b;
    (inv_b - 1.0 / curve.a()).max(inv_b - 0.5).max(0.0)
}

/// The arithmetic progression `(sigma delta^(1/b)) Z` intersected with the
/// window. A window shorter than the spacing yields an empty set.
pub fn standard_separated_set(
    spec: &DecompositionSpec,
    window: (f64, f64),
) -> Result<SeparatedSet> {
    let (lo, hi) = window;
    if !(lo <= hi) || lo < -1.0 || hi > 1.0 {
        return Err(Error::Domain(format!("window [{lo}, {hi}] must be nonempty and in [-1, 1]")));
    }
    let s = spec.spacing();
    let k_min = (lo / s - 1e-9).ceil() as i64;
    let k_max = (hi / s + 1e-9).floor() as i64;
    // The extreme multiples of `s` can round a hair past the domain
    // boundary; clamp them back so the containment check stays exact.
    let points: Vec<f64> = (k_min..=k_max).map(|k| (k as f64 * s).clamp(-1.0, 1.0)).collect();
    SeparatedSet::new(points, s)
}

/// The segment set `L(xi)` parametrized by its first coordinate:
/// `{t in [0, xi1] : t^a + (xi1 - t)^a in xi2 + [-2 delta, 2 delta]}`,
/// a union of at most two intervals.
pub fn segment_set(xi: (f64, f64), curve: &CurveSpec, delta: f64) -> Result<IntervalUnion> {
    let (xi1, xi2) = xi;
    if !(0.0..=2.0).contains(&xi1) {
        return Err(Error::Domain(format!("xi1 = {xi1} outside [0, 2]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta = {delta} not in (0, 1)")));
    }
    if xi1 == 0.0 {
        // Degenerate segment: the single point t = 0, measure zero.
        return Ok(if xi2.abs() <= 2.0 * delta {
            IntervalUnion::single(0.0, 0.0)
        } else {
            IntervalUnion::empty()
        });
    }
    let q = SublevelQuery::new(curve.a(), xi1, xi2, 2.0 * delta)?;
    Ok(sublevel_set(&q))
}

/// Maximal overlap count of the Minkowski sums `theta_omega + theta_omega'`.
///
/// Probes all exact pair-sum points `(omega + omega', omega^a + omega'^a)`
/// plus a uniform `probe_grid x probe_grid` grid over the attained bounding
/// box, and returns the maximum over probes of the number of ordered pairs
/// whose Minkowski sum contains the probe. Centers must be nonnegative (the
/// sign reduction of the estimate).
pub fn overlap_count(
    omega_set: &SeparatedSet,
    curve: &CurveSpec,
    spec: &DecompositionSpec,
    probe_grid: usize,
) -> Result<usize> {
    let probes = probe_points(omega_set, curve, spec, probe_grid)?;
    let counts: Vec<usize> = probes
        .par_iter()
        .map(|&xi| count_pairs_at(xi, omega_set, curve, spec).unwrap_or(0))
        .collect();
    Ok(counts.into_iter().max().unwrap_or(0))
}

fn probe_points(
    omega_set: &SeparatedSet,
    curve: &CurveSpec,
    spec: &DecompositionSpec,
    probe_grid: usize,
) -> Result<Vec<(f64, f64)>> {
    let omegas = omega_set.points();
    if omegas.iter().any(|&w| w < 0.0) {
        return Err(Error::Domain("overlap_count requires nonnegative centers".into()));
    }
    let mut probes = Vec::new();
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &w in omegas {
        for &w2 in omegas {
            let p = (w + w2, curve.height(w) + curve.height(w2));
            lo = (lo.0.min(p.0), lo.1.min(p.1));
            hi = (hi.0.max(p.0), hi.1.max(p.1));
            probes.push(p);
        }
    }
    if probes.is_empty() {
        return Ok(probes);
    }
    // Pad the box by the attainable slack in each coordinate.
    let pad = (2.0 * spec.half_width(), 2.0 * spec.delta + 2.0 * spec.half_width());
    if probe_grid > 1 {
        for i in 0..probe_grid {
            for j in 0..probe_grid {
                let x = lo.0 - pad.0
                    + (hi.0 - lo.0 + 2.0 * pad.0) * i as f64 / (probe_grid - 1) as f64;
                let y = lo.1 - pad.1
                    + (hi.1 - lo.1 + 2.0 * pad.1) * j as f64 / (probe_grid - 1) as f64;
                if (0.0..=2.0).contains(&x) {
                    probes.push((x, y));
                }
            }
        }
    }
    Ok(probes)
}

fn count_pairs_at(
    xi: (f64, f64),
    omega_set: &SeparatedSet,
    curve: &CurveSpec,
    spec: &DecompositionSpec,
) -> Result<usize> {
    let w = spec.half_width();
    let segment = segment_set(xi, curve, spec.delta)?;
    if segment.is_empty() {
        return Ok(0);
    }
    let mut count = 0usize;
    for &om in omega_set.points() {
        for &om2 in omega_set.points() {
            // t is the first coordinate of theta_omega; xi1 - t of theta_omega'.
            let lo = (om - w).max(xi.0 - om2 - w).max(xi.0 - 1.0).max(0.0);
            let hi = (om + w).min(xi.0 - om2 + w).min(1.0).min(xi.0);
            if lo <= hi && segment.meets(lo, hi) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Slow independent oracle for [`overlap_count`]: membership of a probe in a
/// Minkowski sum is decided by dense sampling of the first coordinate instead
/// of the segment-set machinery. Intended for small sets only.
pub fn overlap_count_slow(
    omega_set: &SeparatedSet,
    curve: &CurveSpec,
    spec: &DecompositionSpec,
    probe_grid: usize,
    samples: usize,
) -> Result<usize> {
    let probes = probe_points(omega_set, curve, spec, probe_grid)?;
    let w = spec.half_width();
    let counts: Vec<usize> = probes
        .par_iter()
        .map(|&(x1, x2)| {
            let mut count = 0usize;
            for &om in omega_set.points() {
                for &om2 in omega_set.points() {
                    let lo = (om - w).max(x1 - om2 - w).max(x1 - 1.0).max(0.0);
                    let hi = (om + w).min(x1 - om2 + w).min(1.0).min(x1);
                    if lo > hi {
                        continue;
                    }
                    let hit = (0..=samples).any(|i| {
                        let t = lo + (hi - lo) * i as f64 / samples as f64;
                        let e = curve.height(t) + curve.height(x1 - t);
                        (x2 - e).abs() <= 2.0 * spec.delta
                    });
                    if hit {
                        count += 1;
                    }
                }
            }
            count
        })
        .collect();
    Ok(counts.into_iter().max().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn curve_validation() {
        assert!(CurveSpec::new(1.0).is_err());
        assert!(CurveSpec::new(0.0).is_err());
        assert!(CurveSpec::new(-2.0).is_err());
        assert!(CurveSpec::new(0.5).is_ok());
    }

    #[test]
    fn rho_cases() {
        let rho2 = |a: f64, b: f64| rho(&CurveSpec::new(a).unwrap(), b);
        assert_eq!(rho2(2.0, 2.0), 0.0);
        assert_abs_diff_eq!(rho2(4.0, 2.0), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(rho2(1.5, 1.0), 0.5, epsilon = 1e-15);
        // b >= max(a, 2) forces all three max-arguments <= 0.
        assert_eq!(rho2(3.0, 3.5), 0.0);
        assert_eq!(rho2(0.5, 2.0), 0.0);
    }

    #[test]
    fn rho_zero_iff_b_dominates() {
        for i in 1..=100 {
            for j in 1..=100 {
                let a = 0.06 * i as f64;
                if (a - 1.0).abs() < 1e-12 {
                    continue;
                }
                let b = 0.06 * j as f64;
                let r = rho(&CurveSpec::new(a).unwrap(), b);
                assert!(r >= 0.0);
                let zero = b >= a && b >= 2.0;
                assert_eq!(r == 0.0, zero, "a={a} b={b} rho={r}");
            }
        }
    }

    #[test]
    fn standard_set_examples() {
        // delta = 1/4, b = 2, sigma = 2: spacing 1 on [0,1] -> {0, 1}.
        let spec = DecompositionSpec::standard(0.25, 2.0).unwrap();
        let set = standard_separated_set(&spec, (0.0, 1.0)).unwrap();
        assert_eq!(set.points(), &[0.0, 1.0]);

        // delta = 2^-8, b = 2: spacing 1/8 on [-1,1] -> 17 points.
        let spec = DecompositionSpec::standard(2f64.powi(-8), 2.0).unwrap();
        let set = standard_separated_set(&spec, (-1.0, 1.0)).unwrap();
        assert_eq!(set.len(), 17);
        assert_abs_diff_eq!(set.spacing_floor(), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn standard_set_narrow_window() {
        // sigma = 1 progression around 1/2 (the extremizer window).
        let delta = 2f64.powi(-6);
        let spec = DecompositionSpec::new(delta, 1.0, 1.0).unwrap();
        let c = 0.25;
        let half = c * delta.sqrt();
        let set = standard_separated_set(&spec, (0.5 - half, 0.5 + half)).unwrap();
        // Enumerate by formula: multiples of delta in the window.
        let s = delta;
        let k_min = ((0.5 - half) / s).ceil() as i64;
        let k_max = ((0.5 + half) / s).floor() as i64;
        assert_eq!(set.len() as i64, k_max - k_min + 1);
        // Window shorter than spacing: empty, not an error.
        let tiny = standard_separated_set(&spec, (0.5 + 1e-6, 0.5 + 2e-6)).unwrap();
        assert!(tiny.is_empty());
    }

    #[test]
    fn segment_set_parabola_closed_form() {
        // a=2, xi=(1, 1/2): t^2 + (1-t)^2 - 1/2 = 2(t - 1/2)^2, band 2 delta
        // gives [1/2 - sqrt(delta), 1/2 + sqrt(delta)] = [0.4, 0.6].
        let curve = CurveSpec::new(2.0).unwrap();
        let set = segment_set((1.0, 0.5), &curve, 0.01).unwrap();
        assert_eq!(set.count(), 1);
        let (lo, hi) = set.intervals()[0];
        assert_abs_diff_eq!(lo, 0.4, epsilon = 1e-9);
        assert_abs_diff_eq!(hi, 0.6, epsilon = 1e-9);
        assert_abs_diff_eq!(set.measure(), 0.2, epsilon = 1e-9);
    }

    #[test]
    fn segment_set_out_of_range_level() {
        let curve = CurveSpec::new(2.0).unwrap();
        let set = segment_set((1.0, 10.0), &curve, 0.01).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn segment_set_two_intervals_vs_dense_oracle() {
        let curve = CurveSpec::new(3.0).unwrap();
        let delta = 0.01;
        let set = segment_set((1.0, 0.9), &curve, delta).unwrap();
        assert_eq!(set.count(), 2);
        let n = 1_000_000usize;
        let mut hits = 0usize;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let e = t.powf(3.0) + (1.0 - t).powf(3.0);
            if (e - 0.9).abs() <= 2.0 * delta {
                hits += 1;
            }
        }
        let oracle = hits as f64 / n as f64;
        assert!((set.measure() - oracle).abs() < 3e-6);
    }

    #[test]
    fn segment_set_rejects_bad_xi1() {
        let curve = CurveSpec::new(2.0).unwrap();
        assert!(segment_set((-0.1, 0.0), &curve, 0.01).is_err());
        assert!(segment_set((2.1, 0.0), &curve, 0.01).is_err());
    }

    #[test]
    fn segment_measure_bound_randomized() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for &a in &[0.5, 1.5, 2.0, 3.0, 4.5] {
            let curve = CurveSpec::new(a).unwrap();
            let c_a = crate::calibration::sublevel_bound_constant(a);
            for _ in 0..20_000 {
                let xi1: f64 = rng.random_range(1e-3..2.0);
                let delta: f64 = 2f64.powf(rng.random_range(-14.0..-2.0));
                let span = 2.0 * xi1.powf(a).max((xi1 / 2.0).powf(a));
                let xi2: f64 = rng.random_range(0.0..2.0 * span);
                let m = segment_set((xi1, xi2), &curve, delta).unwrap().measure();
                let bound = c_a * xi1 * 1f64.min((2.0 * delta).sqrt() * xi1.powf(-a / 2.0));
                assert!(
                    m <= bound * (1.0 + 1e-9),
                    "a={a} xi1={xi1} xi2={xi2} delta={delta}: {m} > {bound}"
                );
            }
        }
    }

    #[test]
    fn overlap_singleton_is_one() {
        let curve = CurveSpec::new(2.0).unwrap();
        let spec = DecompositionSpec::standard(2f64.powi(-6), 2.0).unwrap();
        let set = SeparatedSet::new(vec![0.25], spec.spacing()).unwrap();
        assert_eq!(overlap_count(&set, &curve, &spec, 32).unwrap(), 1);
    }

    #[test]
    fn overlap_empty_is_zero() {
        let curve = CurveSpec::new(2.0).unwrap();
        let spec = DecompositionSpec::standard(2f64.powi(-6), 2.0).unwrap();
        let set = SeparatedSet::new(vec![], spec.spacing()).unwrap();
        assert_eq!(overlap_count(&set, &curve, &spec, 32).unwrap(), 0);
    }

    #[test]
    fn overlap_monotone_under_adding_points() {
        let curve = CurveSpec::new(4.0).unwrap();
        let delta = 2f64.powi(-8);
        let spec = DecompositionSpec::standard(delta, 2.0).unwrap();
        let full = standard_separated_set(&spec, (0.0, 1.0)).unwrap();
        let partial = SeparatedSet::new(
            full.points().iter().copied().step_by(2).collect(),
            spec.spacing(),
        )
        .unwrap();
        let n_full = overlap_count(&full, &curve, &spec, 64).unwrap();
        let n_partial = overlap_count(&partial, &curve, &spec, 64).unwrap();
        assert!(n_full >= n_partial, "{n_full} < {n_partial}");
    }

    #[test]
    fn overlap_fast_matches_slow_path() {
        let delta = 2f64.powi(-7);
        for &(a, b) in &[(2.0, 2.0), (4.0, 2.0), (1.5, 1.5)] {
            let curve = CurveSpec::new(a).unwrap();
            let spec = DecompositionSpec::standard(delta, b).unwrap();
            let mut set = standard_separated_set(&spec, (0.0, 1.0)).unwrap();
            if set.len() > 32 {
                set = SeparatedSet::new(
                    set.points().iter().copied().take(32).collect(),
                    spec.spacing(),
                )
                .unwrap();
            }
            let fast = overlap_count(&set, &curve, &spec, 48).unwrap();
            let slow = overlap_count_slow(&set, &curve, &spec, 48, 8192).unwrap();
            assert_eq!(fast, slow, "a={a} b={b}");
        }
    }

    #[test]
    fn overlap_bounded_in_nondegenerate_regime() {
        // a = b = 2: N(delta) stays O(1) across the ladder.
        let curve = CurveSpec::new(2.0).unwrap();
        let mut max_seen = 0;
        for k in [6, 8, 10, 12] {
            let spec = DecompositionSpec::standard(2f64.powi(-k), 2.0).unwrap();
            let set = standard_separated_set(&spec, (0.0, 1.0)).unwrap();
            let n = overlap_count(&set, &curve, &spec, 64).unwrap();
            max_seen = max_seen.max(n);
        }
        assert!(max_seen <= 8, "overlap grew to {max_seen}");
    }
}
