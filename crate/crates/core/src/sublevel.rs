//! Sublevel sets of `u(t) = t^a + (r-t)^a - c` and the convexity inequalities
//! behind the quadruple dichotomy.
//!
//! Since `u''(t) = a(a-1)(t^(a-2) + (r-t)^(a-2))` has the sign of `a-1` on
//! `(0, r)`, the function is convex or concave and every sublevel set
//! `{|u| <= lambda}` is a union of at most two intervals. Endpoints are
//! located by monotone bisection on each side of the symmetry point `t = r/2`;
//! the second derivative is never evaluated.

use crate::calibration::{self, BISECTION_TOL};
use crate::fit::{loglog_fit, FitResult, Ladder};
use crate::interval::IntervalUnion;
use crate::{curve::CurveSpec, Error, Result};

/// A sublevel query for `U_{a,r}(c, lambda) = {t in [0,r] : |t^a + (r-t)^a - c| <= lambda}`.
#[derive(Debug, Clone, Copy)]
pub struct SublevelQuery {
    pub a: f64,
    pub r: f64,
    pub c: f64,
    pub lambda: f64,
}

impl SublevelQuery {
    pub fn new(a: f64, r: f64, c: f64, lambda: f64) -> Result<Self> {
        if a <= 0.0 || a == 1.0 || !a.is_finite() {
            return Err(Error::InvalidCurve(a));
        }
        if r <= 0.0 || lambda <= 0.0 || !r.is_finite() || !lambda.is_finite() || !c.is_finite() {
            return Err(Error::Domain(format!(
                "sublevel query needs r > 0, lambda > 0; got r = {r}, lambda = {lambda}"
            )));
        }
        Ok(SublevelQuery { a, r, c, lambda })
    }

    /// `u(t) = t^a + (r-t)^a - c`.
    pub fn u(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.r);
        t.powf(self.a) + (self.r - t).powf(self.a) - self.c
    }

    /// Value of `u` at the extremum `t = r/2`.
    pub fn extremal_value(&self) -> f64 {
        2.0 * (self.r / 2.0).powf(self.a) - self.c
    }
}

/// Bisects for `f(t) = y` on `[lo, hi]`, assuming `f` monotone with
/// `y` between `f(lo)` and `f(hi)`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, y: f64) -> f64 {
    let increasing = f(hi) >= f(lo);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let above = f(mid) >= y;
        if above == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Preimage of `[-lambda, lambda]` under the monotone branch of `u` on
/// `[0, r/2]`, as `Some((lo, hi))` or `None` when empty.
fn branch_preimage(q: &SublevelQuery) -> Option<(f64, f64)> {
    let half = q.r / 2.0;
    let v0 = q.u(0.0);
    let vm = q.extremal_value();
    let (vmin, vmax) = if v0 <= vm { (v0, vm) } else { (vm, v0) };
    if vmin > q.lambda || vmax < -q.lambda {
        return None;
    }
    let u = |t: f64| q.u(t);
    // Entry point: where u first enters the band walking from t = 0.
    let lo = if (-q.lambda..=q.lambda).contains(&v0) {
        0.0
    } else if v0 > q.lambda {
        bisect(u, 0.0, half, q.lambda)
    } else {
        bisect(u, 0.0, half, -q.lambda)
    };
    // Exit point: where u leaves the band before t = r/2 (if it does).
    let hi = if (-q.lambda..=q.lambda).contains(&vm) {
        half
    } else if vm > q.lambda {
        bisect(u, lo, half, q.lambda)
    } else {
        bisect(u, lo, half, -q.lambda)
    };
    Some((lo, hi))
}

/// Computes `U_{a,r}(c, lambda)` exactly as a union of at most two intervals.
pub fn sublevel_set(q: &SublevelQuery) -> IntervalUnion {
    match branch_preimage(q) {
        None => IntervalUnion::empty(),
        Some((lo, hi)) => {
            // Mirror across the symmetry point; touching halves merge.
            IntervalUnion::from_pairs(vec![(lo, hi), (q.r - hi, q.r - lo)])
        }
    }
}

/// Checks `|U_{a,r}(c, lambda)| <= constant * r * min(1, lambda^(1/2) r^(-a/2))`.
pub fn sublevel_bound_check(q: &SublevelQuery, constant: f64) -> bool {
    let measure = sublevel_set(q).measure();
    let bound = constant * q.r * 1f64.min(q.lambda.sqrt() * q.r.powf(-q.a / 2.0));
    measure <= bound * (1.0 + 1e-12)
}

/// Regresses `log |U|` against `log lambda` over the dyadic ladder
/// `lambda in {2^-4, ..., 2^-16}` at the level `c`.
///
/// At the extremal level the slope is the van der Corput `k = 2` exponent
/// `1/2`; at a boundary level with nonvanishing first derivative it is `1`.
pub fn vdc_sublevel_measure_scaling(a: f64, r: f64, c: f64) -> Result<FitResult> {
    let mut pts = Vec::new();
    for k in 4..=16 {
        let lambda = 2f64.powi(-k);
        let q = SublevelQuery::new(a, r, c, lambda)?;
        let m = sublevel_set(&q).measure();
        if m > 0.0 {
            pts.push((lambda, m));
        }
    }
    Ok(loglog_fit(&Ladder::new(pts, format!("vdc a={a} r={r} c={c}"))?))
}

/// An ordered quadruple on `[0, 1]` with equal pair sums:
/// `xi1 >= xi3 >= xi4 >= xi2` and `xi1 + xi2 = xi3 + xi4`.
#[derive(Debug, Clone, Copy)]
pub struct QuadrupleSample {
    pub xi1: f64,
    pub xi2: f64,
    pub xi3: f64,
    pub xi4: f64,
    /// The common pair sum `xi1 + xi2`.
    pub m: f64,
}

impl QuadrupleSample {
    /// Builds a sample from `(xi1, xi2, xi3)`, deriving `xi4 = xi1 + xi2 - xi3`
    /// so the sum constraint holds exactly.
    pub fn new(xi1: f64, xi2: f64, xi3: f64) -> Result<Self> {
        let xi4 = xi1 + xi2 - xi3;
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(in_unit(xi1) && in_unit(xi2) && in_unit(xi3) && in_unit(xi4)) {
            return Err(Error::Domain("quadruple coordinates must lie in [0, 1]".into()));
        }
        if !(xi1 >= xi3 && xi3 >= xi4 && xi4 >= xi2) {
            return Err(Error::Domain(
                "quadruple must satisfy xi1 >= xi3 >= xi4 >= xi2".into(),
            ));
        }
        Ok(QuadrupleSample { xi1, xi2, xi3, xi4, m: xi1 + xi2 })
    }

    /// `xi1^a + xi2^a - xi3^a - xi4^a`.
    pub fn energy_gap(&self, a: f64) -> f64 {
        self.xi1.powf(a) + self.xi2.powf(a) - self.xi3.powf(a) - self.xi4.powf(a)
    }
}

/// Mean-value lower bound for `a in [2, 3]`:
/// `xi1^a + xi2^a - xi3^a - xi4^a >= (a(a-1)/2) M^(a-2) (xi1-xi3)(xi1-xi4)`.
pub fn appendix_b_lower_bound_check(s: &QuadrupleSample, a: f64) -> Result<bool> {
    if !(2.0..=3.0).contains(&a) {
        return Err(Error::Domain(format!("lower bound check requires a in [2, 3], got {a}")));
    }
    let lhs = s.energy_gap(a);
    let rhs = 0.5 * a * (a - 1.0)
        * s.m.powf(a - 2.0)
        * (s.xi1 - s.xi3)
        * (s.xi1 - s.xi4);
    let tol = 1e-12 * s.m.powf(a).max(f64::MIN_POSITIVE);
    Ok(lhs >= rhs - tol)
}

/// `d/dt [t^alpha + (m-t)^alpha] = alpha (t^(alpha-1) - (m-t)^(alpha-1))`.
fn f_prime(t: f64, alpha: f64, m: f64) -> f64 {
    alpha * (t.powf(alpha - 1.0) - (m - t).powf(alpha - 1.0))
}

/// Pointwise driver for the `a > 3` reduction: checks
/// `f'(t; a) >= (M/2)(a/(a-2)) f'(t; a-1)` on a 1000-point grid of `[M/2, M]`.
pub fn appendix_b_reduction_check(s: &QuadrupleSample, a: f64) -> Result<bool> {
    if a <= 3.0 {
        return Err(Error::Domain(format!("reduction check requires a > 3, got {a}")));
    }
    if !(0.0 < s.m && s.m <= 2.0) {
        return Err(Error::Precondition(format!("reduction check requires M in (0, 2], got {}", s.m)));
    }
    let factor = 0.5 * s.m * a / (a - 2.0);
    let tol = 1e-12 * a * s.m.powf(a - 1.0).max(1.0);
    let grid = 1000;
    for i in 0..=grid {
        let t = s.m / 2.0 + (s.m / 2.0) * (i as f64) / (grid as f64);
        if f_prime(t, a, s.m) < factor * f_prime(t, a - 1.0, s.m) - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Near-solution dichotomy. Preconditions: `|energy gap| <= delta` and
/// `M >= delta^(1/min(a,2))`; violations are reported as
/// [`Error::Precondition`], distinct from an inequality failure (`Ok(false)`).
///
/// For `a >= 2` checks `min(|xi1-xi3|, |xi1-xi4|) <= C delta^(1/a)`; for
/// `a < 2` checks `|xi1-xi3| <= C delta^(1/2)`, with the frozen `C = 4`.
pub fn appendix_b_dichotomy_check(
    s: &QuadrupleSample,
    curve: &CurveSpec,
    delta: f64,
) -> Result<bool> {
    let a = curve.a();
    if s.energy_gap(a).abs() > delta {
        return Err(Error::Precondition(format!(
            "energy gap {:.3e} exceeds delta {delta:.3e}",
            s.energy_gap(a)
        )));
    }
    let m_floor = delta.powf(1.0 / a.min(2.0));
    if s.m < m_floor {
        return Err(Error::Precondition(format!(
            "pair sum M = {:.3e} below floor {m_floor:.3e}",
            s.m
        )));
    }
    let c = calibration::DICHOTOMY_C;
    let ok = if a >= 2.0 {
        (s.xi1 - s.xi3).min(s.xi1 - s.xi4) <= c * delta.powf(1.0 / a)
    } else {
        s.xi1 - s.xi3 <= c * delta.sqrt()
    };
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parabola_closed_form() {
        // a=2, r=1: u = 2(t - 1/2)^2 + 1/2 - c; at c = 1/2, |u| <= lambda is
        // an interval of measure sqrt(2 lambda).
        let q = SublevelQuery::new(2.0, 1.0, 0.5, 0.02).unwrap();
        let set = sublevel_set(&q);
        assert_eq!(set.count(), 1);
        let (lo, hi) = set.intervals()[0];
        assert_abs_diff_eq!(lo, 0.4, epsilon = 1e-9);
        assert_abs_diff_eq!(hi, 0.6, epsilon = 1e-9);
        assert_abs_diff_eq!(set.measure(), 0.2, epsilon = 1e-9);
    }

    #[test]
    fn full_interval_when_lambda_dominates() {
        // Range of t^2 + (1-t)^2 on [0,1] is [1/2, 1]; lambda = 1 covers it.
        let q = SublevelQuery::new(2.0, 1.0, 0.75, 1.0).unwrap();
        let set = sublevel_set(&q);
        assert_eq!(set.count(), 1);
        assert_abs_diff_eq!(set.measure(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn concave_case_against_dense_grid() {
        // a = 1/2, r = 1, c = sqrt(2): extremal level; expected measure
        // 2 sqrt(lambda sqrt(2)) from the quadratic approximation.
        let q = SublevelQuery::new(0.5, 1.0, std::f64::consts::SQRT_2, 0.01).unwrap();
        let set = sublevel_set(&q);
        assert_eq!(set.count(), 1);
        let n = 10_000_000usize;
        let mut hits = 0usize;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            if q.u(t).abs() <= q.lambda {
                hits += 1;
            }
        }
        let grid_measure = hits as f64 / n as f64;
        assert!((set.measure() - grid_measure).abs() <= 1e-3);
        // Closed form: squaring sqrt(t) + sqrt(1-t) = sqrt(2) - lambda gives
        // measure = 2 sqrt(1/4 - ((1 - 2 sqrt(2) lambda + lambda^2) / 2)^2).
        let g = (1.0 - 2.0 * std::f64::consts::SQRT_2 * q.lambda + q.lambda * q.lambda) / 2.0;
        let exact = 2.0 * (0.25 - g * g).sqrt();
        assert_abs_diff_eq!(set.measure(), exact, epsilon = 1e-9);
    }

    #[test]
    fn two_interval_case() {
        // a=3, level near the endpoint values: band around c excludes the
        // dip at t = 1/2, leaving two symmetric intervals.
        let q = SublevelQuery::new(3.0, 1.0, 0.9, 0.01).unwrap();
        let set = sublevel_set(&q);
        assert_eq!(set.count(), 2);
        let ivs = set.intervals();
        // symmetry about 1/2
        assert_abs_diff_eq!(ivs[0].0, 1.0 - ivs[1].1, epsilon = 1e-9);
        assert_abs_diff_eq!(ivs[0].1, 1.0 - ivs[1].0, epsilon = 1e-9);
    }

    #[test]
    fn measure_monotone_in_lambda() {
        let mut prev = 0.0;
        for k in (1..=20).rev() {
            let q = SublevelQuery::new(2.7, 0.8, 0.3, 2f64.powi(-k)).unwrap();
            let m = sublevel_set(&q).measure();
            assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn bound_check_parabola_family() {
        for k in 0..=10 {
            let lambda = 2f64.powi(-k);
            let q = SublevelQuery::new(2.0, 1.0, 0.5, lambda).unwrap();
            assert!(sublevel_bound_check(&q, 2.0));
        }
    }

    #[test]
    fn bound_check_saturated_min() {
        let q = SublevelQuery::new(3.0, 0.4, 0.1, 50.0).unwrap();
        assert_abs_diff_eq!(sublevel_set(&q).measure(), 0.4, epsilon = 1e-12);
        assert!(sublevel_bound_check(&q, 1.0));
    }

    #[test]
    fn randomized_bound_audit() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let mut a: f64 = rng.random_range(0.2..6.0);
            if (a - 1.0).abs() < 1e-3 {
                a = 1.1;
            }
            let r: f64 = rng.random_range(1e-3..1.0);
            let lambda: f64 = 2f64.powf(rng.random_range(-16.0..2.0));
            let span = 2.0 * r.powf(a).max((r / 2.0).powf(a));
            let c: f64 = rng.random_range(-span..2.0 * span);
            let q = SublevelQuery::new(a, r, c, lambda).unwrap();
            let cbound = crate::calibration::sublevel_bound_constant(a);
            assert!(
                sublevel_bound_check(&q, cbound),
                "violation at a={a} r={r} c={c} lambda={lambda}: |U|={} bound C={cbound}",
                sublevel_set(&q).measure()
            );
        }
    }

    #[test]
    fn agrees_with_dense_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grid = 200_000usize;
        for _ in 0..50 {
            let mut a: f64 = rng.random_range(0.2..6.0);
            if (a - 1.0).abs() < 1e-2 {
                a = 1.5;
            }
            let r: f64 = rng.random_range(0.1..1.0);
            let c: f64 = rng.random_range(0.0..2.0 * r.powf(a).max(1.0));
            let lambda: f64 = 2f64.powf(rng.random_range(-8.0..0.0));
            let q = SublevelQuery::new(a, r, c, lambda).unwrap();
            let set = sublevel_set(&q);
            let mut hits = 0usize;
            for i in 0..=grid {
                let t = r * i as f64 / grid as f64;
                if q.u(t).abs() <= lambda {
                    hits += 1;
                }
            }
            let oracle = hits as f64 * r / grid as f64;
            assert!(
                (set.measure() - oracle).abs() <= 2.0 * r / grid as f64 + 1e-9,
                "a={a} r={r} c={c} lambda={lambda}: {} vs {oracle}",
                set.measure()
            );
            assert!(set.count() <= 2);
            for &(lo, hi) in set.intervals() {
                assert!(lo >= -1e-12 && hi <= r + 1e-12);
            }
        }
    }

    #[test]
    fn second_derivative_sign_audit() {
        // u''(t) = a(a-1)(t^(a-2) + (r-t)^(a-2)) has the sign of a-1.
        for &a in &[0.3, 0.7, 1.5, 2.0, 3.7, 5.9] {
            let r = 0.9;
            for i in 1..200 {
                let t = r * i as f64 / 200.0;
                let upp = a * (a - 1.0) * (t.powf(a - 2.0) + (r - t).powf(a - 2.0));
                assert_eq!(upp.signum(), (a - 1.0).signum(), "a={a} t={t}");
            }
        }
    }

    #[test]
    fn vdc_scaling_extremal_level() {
        let fit = vdc_sublevel_measure_scaling(2.0, 1.0, 0.5).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-3, "slope {}", fit.slope);

        let fit = vdc_sublevel_measure_scaling(0.5, 1.0, std::f64::consts::SQRT_2).unwrap();
        assert!((fit.slope - 0.5).abs() < 0.01, "slope {}", fit.slope);
    }

    #[test]
    fn vdc_scaling_boundary_level() {
        // c = u(0) = r^a: first-derivative regime, linear crossings.
        let fit = vdc_sublevel_measure_scaling(3.0, 1.0, 1.0).unwrap();
        assert!((fit.slope - 1.0).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn quadruple_construction() {
        let s = QuadrupleSample::new(0.8, 0.2, 0.6).unwrap();
        assert_abs_diff_eq!(s.xi4, 0.4, epsilon = 0.0);
        assert!(QuadrupleSample::new(0.8, 0.2, 0.1).is_err()); // ordering
        assert!(QuadrupleSample::new(0.8, 0.5, 0.2).is_err()); // xi4 > 1
    }

    #[test]
    fn lower_bound_degenerate_equality() {
        let s = QuadrupleSample::new(0.7, 0.3, 0.7).unwrap();
        assert!(appendix_b_lower_bound_check(&s, 2.5).unwrap());
    }

    #[test]
    fn lower_bound_a2_closed_form() {
        // a = 2 with xi2 = xi3 + xi4 - xi1: LHS = 2 (xi1-xi3)(xi1-xi4) exactly,
        // twice the mean-value bound (a(a-1)/2) M^0 (..) = (..).
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let xi1: f64 = rng.random_range(0.5..1.0);
            let xi3: f64 = rng.random_range(0.25..xi1);
            let xi4: f64 = rng.random_range(0.0..xi3);
            let xi2 = xi3 + xi4 - xi1;
            if xi2 < 0.0 || xi2 > xi4 {
                continue;
            }
            let s = QuadrupleSample::new(xi1, xi2, xi3).unwrap();
            let lhs = s.energy_gap(2.0);
            assert_abs_diff_eq!(
                lhs,
                2.0 * (xi1 - xi3) * (xi1 - xi4),
                epsilon = 1e-12
            );
            assert!(appendix_b_lower_bound_check(&s, 2.0).unwrap());
        }
    }

    #[test]
    fn reduction_trivial_at_midpoint() {
        let s = QuadrupleSample::new(0.5, 0.5, 0.5).unwrap();
        assert!(appendix_b_reduction_check(&s, 4.0).unwrap());
    }

    #[test]
    fn reduction_rejects_small_a() {
        let s = QuadrupleSample::new(0.5, 0.5, 0.5).unwrap();
        assert!(appendix_b_reduction_check(&s, 2.5).is_err());
    }

    #[test]
    fn dichotomy_diagonal_passes() {
        let curve = CurveSpec::new(3.0).unwrap();
        let s = QuadrupleSample::new(0.6, 0.4, 0.6).unwrap();
        assert!(appendix_b_dichotomy_check(&s, &curve, 2f64.powi(-12)).unwrap());
    }

    #[test]
    fn dichotomy_reports_precondition_distinctly() {
        let curve = CurveSpec::new(3.0).unwrap();
        // Far off-diagonal: huge energy gap, must be a precondition error,
        // not Ok(false).
        let s = QuadrupleSample::new(1.0, 0.0, 0.5).unwrap();
        match appendix_b_dichotomy_check(&s, &curve, 1e-6) {
            Err(Error::Precondition(_)) => {}
            other => panic!("expected precondition error, got {other:?}"),
        }
    }
}
