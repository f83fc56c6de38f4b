//! L^4 space-time norms of fractional exponential sums
//! `u(x, t) = sum_k c_k exp(i(kx + |k|^a t))` on the torus, and the
//! Strichartz exponent dichotomy.
//!
//! Convention: the propagator phase is `exp(i |k|^a t)`; growth exponents are
//! convention-independent.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::curve::CurveSpec;
use crate::fft::C64;
use crate::fit::{loglog_fit, FitResult, Ladder};
use crate::{Error, Result};

/// Fourier data `c_k`, `k in [-N, N]`.
#[derive(Debug, Clone)]
pub struct TorusData {
    coeffs: Vec<C64>,
    n: usize,
}

impl TorusData {
    /// `coeffs[j]` is `c_{j - N}`; requires `N >= 1` and length `2N + 1`.
    pub fn new(n: usize, coeffs: Vec<C64>) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("frequency cap N must be >= 1".into()));
        }
        if coeffs.len() != 2 * n + 1 {
            return Err(Error::Domain(format!(
                "expected {} coefficients for N = {n}, got {}",
                2 * n + 1,
                coeffs.len()
            )));
        }
        Ok(TorusData { coeffs, n })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(i64) -> C64) -> Result<Self> {
        let coeffs = (-(n as i64)..=n as i64).map(&mut f).collect();
        Self::new(n, coeffs)
    }

    /// Dirichlet data `c_k = 1` for `|k| <= N`.
    pub fn dirichlet(n: usize) -> Result<Self> {
        Self::from_fn(n, |_| C64::new(1.0, 0.0))
    }

    /// Concentrated data `c_k = 1` on `|k - N/2| <= half_width`, mirroring
    /// the wave-packet progressions near `xi1 = 1/2`.
    pub fn concentrated(n: usize, half_width: f64) -> Result<Self> {
        let center = n as f64 / 2.0;
        Self::from_fn(n, |k| {
            if (k as f64 - center).abs() <= half_width {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// The time-coherent concentrated window `|k - N/2| <= c N^(1 - a/2)`:
    /// the quadratic energy spread of such a block is O(c^2), so every
    /// equal-sum quadruple stays coherent over `|t| <= 1`. This is the
    /// extremal width for the `a < 2` growth exponent `(1 - a/2)/4`.
    pub fn concentrated_coherent(n: usize, c: f64, curve: &CurveSpec) -> Result<Self> {
        Self::concentrated(n, c * (n as f64).powf(1.0 - curve.a() / 2.0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, k: i64) -> C64 {
        self.coeffs[(k + self.n as i64) as usize]
    }

    /// `L^2(T)` norm of the data: `sqrt(2 pi sum |c_k|^2)`.
    pub fn l2(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (2.0 * std::f64::consts::PI * s).sqrt()
    }

    /// Sobolev norm `(2 pi sum <k>^(2s) |c_k|^2)^(1/2)`, `<k> = (1+k^2)^(1/2)`.
    pub fn hs(&self, s: f64) -> f64 {
        let total: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let k = j as f64 - self.n as f64;
                (1.0 + k * k).powf(s) * c.norm_sqr()
            })
            .sum();
        (2.0 * std::f64::consts::PI * total).sqrt()
    }
}

/// Norm bundle for one data set.
#[derive(Debug, Clone)]
pub struct NormReport {
    pub l4_spacetime: f64,
    pub l2_data: f64,
    data: TorusData,
}

impl NormReport {
    pub fn hs_data(&self, s: f64) -> f64 {
        self.data.hs(s)
    }

    pub fn ratio(&self, s: f64) -> f64 {
        self.l4_spacetime / self.hs_data(s)
    }
}

/// Default t-sample count `ceil(8 N^a)` (at least 16): 8 points per
/// oscillation of `|u|^4` over `[-1, 1]`.
pub fn default_t_samples(n: usize, curve: &CurveSpec) -> usize {
    ((8.0 * (n as f64).powf(curve.a())).ceil() as usize).max(16)
}

/// Integral of `|u|^4` over the x-torus at one t, exact by FFT quadrature
/// (`m >= 4N + 1` resolves the degree-4N trigonometric polynomial |u|^4).
fn x_integral_l4(
    data: &TorusData,
    phases: &[C64],
    fft: &std::sync::Arc<dyn rustfft::Fft<f64>>,
    buf: &mut [C64],
) -> f64 {
    let m = buf.len();
    buf.fill(C64::new(0.0, 0.0));
    for (j, (&c, &ph)) in data.coeffs.iter().zip(phases.iter()).enumerate() {
        let k = j as i64 - data.n as i64;
        let bin = k.rem_euclid(m as i64) as usize;
        buf[bin] += c * ph;
    }
    fft.process(buf);
    let s: f64 = buf.iter().map(|v| { let q = v.norm_sqr(); q * q }).sum();
    2.0 * std::f64::consts::PI * s / m as f64
}

fn l4_over_t_range(
    data: &TorusData,
    curve: &CurveSpec,
    t_samples: usize,
    x_fft: usize,
    t_lo: f64,
    t_hi: f64,
    trapezoid: bool,
) -> Result<f64> {
    let n = data.n;
    if x_fft < 4 * n + 1 {
        return Err(Error::Precondition(format!(
            "x_fft = {x_fft} below the exactness floor 4N + 1 = {}",
            4 * n + 1
        )));
    }
    let freqs: Vec<f64> = (-(n as i64)..=n as i64)
        .map(|k| (k.unsigned_abs() as f64).powf(curve.a()))
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(x_fft);
    let mut buf = vec![C64::new(0.0, 0.0); x_fft];
    let steps = t_samples;
    let dt = (t_hi - t_lo) / steps as f64;
    let points = if trapezoid { steps + 1 } else { steps };
    let mut acc = 0.0;
    let mut phases = vec![C64::new(0.0, 0.0); 2 * n + 1];
    for j in 0..points {
        let t = t_lo + dt * j as f64;
        for (p, &w) in phases.iter_mut().zip(freqs.iter()) {
            let ph = w * t;
            *p = Complex::new(ph.cos(), ph.sin());
        }
        let v = x_integral_l4(data, &phases, &fft, &mut buf);
        let wgt = if trapezoid && (j == 0 || j == steps) { 0.5 } else { 1.0 };
        acc += wgt * v;
    }
    Ok((acc * dt).powf(0.25))
}

/// `(int_{-1}^{1} int_T |u|^4 dx dt)^(1/4)` by exact FFT quadrature in x and
/// trapezoid rule in t.
///
/// Guard: overriding the t resolution below `2 N^a` samples is rejected (the
/// integrand oscillates at scale `N^-a`).
pub fn spacetime_l4(
    data: &TorusData,
    curve: &CurveSpec,
    t_samples: usize,
    x_fft: usize,
) -> Result<f64> {
    let floor = 2.0 * (data.n as f64).powf(curve.a());
    if (t_samples as f64) < floor {
        return Err(Error::OscillationGuard(t_samples, floor));
    }
    l4_over_t_range(data, curve, t_samples, x_fft, -1.0, 1.0, true)
}

/// The fully periodic norm `(int_0^{2pi} int_T |u|^4 dx dt)^(1/4)` by
/// rectangle rule in t; exact for integer `a` once
/// `t_samples > 4 N^a` (the t-degree of `|u|^4`).
pub fn spacetime_l4_periodic(
    data: &TorusData,
    curve: &CurveSpec,
    t_samples: usize,
    x_fft: usize,
) -> Result<f64> {
    l4_over_t_range(
        data,
        curve,
        t_samples,
        x_fft,
        0.0,
        2.0 * std::f64::consts::PI,
        false,
    )
}

/// Full norm report at default resolutions.
pub fn norm_report(data: &TorusData, curve: &CurveSpec) -> Result<NormReport> {
    let t = default_t_samples(data.n, curve);
    let l4 = spacetime_l4(data, curve, t, 4 * data.n + 1)?;
    Ok(NormReport { l4_spacetime: l4, l2_data: data.l2(), data: data.clone() })
}

/// The data family of the exponent ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFamily {
    Dirichlet,
    /// Time-coherent window `c_k = 1` on `|k - N/2| <= N^(1 - a/2) / 2`.
    Concentrated,
}

/// Fits `log(l4_spacetime / l2_data)` against `log N` over the ladder.
///
/// The predicted slope is `0` for `a >= 2` and `(1 - a/2)/4` for
/// `a in (0, 2) \ {1}`.
pub fn strichartz_exponent_fit(
    curve: &CurveSpec,
    family: DataFamily,
    n_ladder: &[usize],
) -> Result<FitResult> {
    if n_ladder.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "need >= 4 ladder values, got {}",
            n_ladder.len()
        )));
    }
    let mut pts = Vec::new();
    for &n in n_ladder {
        let data = match family {
            DataFamily::Dirichlet => TorusData::dirichlet(n)?,
            DataFamily::Concentrated => TorusData::concentrated_coherent(n, 0.5, curve)?,
        };
        let t = default_t_samples(n, curve);
        let l4 = spacetime_l4(&data, curve, t, 4 * n + 1)?;
        pts.push((n as f64, l4 / data.l2()));
    }
    Ok(loglog_fit(&Ladder::new(pts, format!("strichartz a={}", curve.a()))?))
}

/// Predicted sharp growth exponent for the `L^4` / `L^2` ratio.
pub fn predicted_exponent(curve: &CurveSpec) -> f64 {
    if curve.a() >= 2.0 {
        0.0
    } else {
        (1.0 - curve.a() / 2.0) / 4.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    #[test]
    fn single_frequency_is_flat() {
        // |u| = 1 everywhere: L^4 norm over [-1,1] x T is (2 * 2pi)^(1/4).
        let data = TorusData::from_fn(3, |k| {
            if k == 2 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let curve = CurveSpec::new(2.0).unwrap();
        let v = spacetime_l4(&data, &curve, 100, 13).unwrap();
        assert_abs_diff_eq!(v, (2.0 * TWO_PI).powf(0.25), epsilon = 1e-10);
    }

    /// Independent combinatorial oracle for the periodic Dirichlet norm:
    /// the number of quadruples `k1 + k2 = k3 + k4`, `k1^2 + k2^2 = k3^2 +
    /// k4^2` in `[-N, N]` (sum and sum-of-squares determine the multiset).
    fn zygmund_diagonal_count(n: i64) -> u64 {
        let m = (2 * n + 1) as u64;
        2 * m * m - m
    }

    #[test]
    fn zygmund_identity_matches_diagonal_count() {
        let curve = CurveSpec::new(2.0).unwrap();
        for n in [2usize, 4, 8, 16] {
            let data = TorusData::dirichlet(n).unwrap();
            let t_samples = 4 * n * n + 1;
            let v = spacetime_l4_periodic(&data, &curve, t_samples, 4 * n + 1).unwrap();
            let expect = TWO_PI * TWO_PI * zygmund_diagonal_count(n as i64) as f64;
            assert!(
                (v.powi(4) - expect).abs() <= 1e-6 * expect,
                "N={n}: {} vs {expect}",
                v.powi(4)
            );
        }
    }

    #[test]
    fn brute_force_count_matches_closed_form() {
        // Verify the 2M^2 - M formula by explicit quadruple enumeration.
        for n in [2i64, 3, 5] {
            let mut count = 0u64;
            for k1 in -n..=n {
                for k2 in -n..=n {
                    for k3 in -n..=n {
                        for k4 in -n..=n {
                            if k1 + k2 == k3 + k4 && k1 * k1 + k2 * k2 == k3 * k3 + k4 * k4 {
                                count += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(count, zygmund_diagonal_count(n));
        }
    }

    #[test]
    fn x_quadrature_exactness() {
        let curve = CurveSpec::new(2.0).unwrap();
        let data = TorusData::dirichlet(8).unwrap();
        let a = spacetime_l4(&data, &curve, 1024, 33).unwrap();
        let b = spacetime_l4(&data, &curve, 1024, 66).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn t_refinement_converged() {
        let curve = CurveSpec::new(2.0).unwrap();
        let data = TorusData::dirichlet(12).unwrap();
        let t = default_t_samples(12, &curve);
        let a = spacetime_l4(&data, &curve, t, 49).unwrap();
        let b = spacetime_l4(&data, &curve, 2 * t, 49).unwrap();
        assert!((a - b).abs() < 1e-4 * a, "{a} vs {b}");
    }

    #[test]
    fn oscillation_guard_triggers() {
        let curve = CurveSpec::new(2.0).unwrap();
        let data = TorusData::dirichlet(64).unwrap();
        assert!(matches!(
            spacetime_l4(&data, &curve, 100, 257),
            Err(Error::OscillationGuard(..))
        ));
    }

    #[test]
    fn modulation_and_scaling_invariance() {
        let curve = CurveSpec::new(0.5).unwrap();
        let data = TorusData::concentrated(64, 1.0).unwrap();
        let th = 0.7f64;
        let rot = TorusData::new(
            64,
            (-(64i64)..=64)
                .map(|k| data.coeff(k) * C64::new(th.cos(), th.sin()))
                .collect(),
        )
        .unwrap();
        let scaled = TorusData::new(
            64,
            (-(64i64)..=64).map(|k| data.coeff(k) * 3.0).collect(),
        )
        .unwrap();
        let t = default_t_samples(64, &curve);
        let v = spacetime_l4(&data, &curve, t, 257).unwrap();
        let vr = spacetime_l4(&rot, &curve, t, 257).unwrap();
        let vs = spacetime_l4(&scaled, &curve, t, 257).unwrap();
        assert_abs_diff_eq!(v, vr, epsilon = 1e-12 * v);
        assert_abs_diff_eq!(3.0 * v, vs, epsilon = 1e-10 * v);
        // ratio(s) unchanged under scaling
        let r = norm_report(&data, &curve).unwrap();
        let rs = norm_report(&scaled, &curve).unwrap();
        assert_abs_diff_eq!(r.ratio(0.3), rs.ratio(0.3), epsilon = 1e-9);
    }

    #[test]
    fn dirichlet_a2_slope_zero() {
        let curve = CurveSpec::new(2.0).unwrap();
        let fit =
            strichartz_exponent_fit(&curve, DataFamily::Dirichlet, &[8, 16, 32, 64, 128])
                .unwrap();
        assert!(fit.slope.abs() < 0.03, "slope {}", fit.slope);
    }

    #[test]
    fn dirichlet_a4_slope_zero() {
        let curve = CurveSpec::new(4.0).unwrap();
        let fit = strichartz_exponent_fit(&curve, DataFamily::Dirichlet, &[4, 8, 16, 24])
            .unwrap();
        assert!(fit.slope.abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn concentrated_a_half_slope() {
        let curve = CurveSpec::new(0.5).unwrap();
        let ladder: Vec<usize> = (6..=12).map(|k| 1usize << k).collect();
        let fit = strichartz_exponent_fit(&curve, DataFamily::Concentrated, &ladder).unwrap();
        let target = predicted_exponent(&curve);
        assert_abs_diff_eq!(target, 0.1875, epsilon = 1e-15);
        assert!((fit.slope - target).abs() < 0.06, "slope {}", fit.slope);
    }
}
