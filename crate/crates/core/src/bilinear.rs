//! The exact bilinear extension identity, the bilinear block Strichartz
//! bound, and the weighted orthogonal square-function functional.
//!
//! Extension operator: `Ef(x1, x2) = int f(xi) exp(i(x1 xi + x2 phi(xi))) dxi`
//! with `phi(xi) = |xi|^a`.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::curve::CurveSpec;
use crate::fft::{next_pow2_at_least, C64};
use crate::{Error, Result};

/// Complex density sampled at the midpoints of a uniform grid over a stated
/// support interval.
#[derive(Debug, Clone)]
pub struct LineDensity {
    pub lo: f64,
    pub step: f64,
    pub samples: Vec<C64>,
}

impl LineDensity {
    /// `n` midpoint samples of `f` on `[lo, hi]`.
    pub fn from_fn(lo: f64, hi: f64, n: usize, mut f: impl FnMut(f64) -> C64) -> Result<Self> {
        if !(hi > lo) || n == 0 {
            return Err(Error::Domain(format!("bad density support [{lo}, {hi}] / n = {n}")));
        }
        let step = (hi - lo) / n as f64;
        let samples = (0..n).map(|j| f(lo + step * (j as f64 + 0.5))).collect();
        Ok(LineDensity { lo, step, samples })
    }

    pub fn indicator(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::from_fn(lo, hi, n, |_| C64::new(1.0, 0.0))
    }

    pub fn gaussian(lo: f64, hi: f64, n: usize, center: f64, sigma: f64) -> Result<Self> {
        Self::from_fn(lo, hi, n, |xi| {
            C64::new((-((xi - center) / sigma).powi(2) / 2.0).exp(), 0.0)
        })
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.step * self.samples.len() as f64
    }

    pub fn xi(&self, j: usize) -> f64 {
        self.lo + self.step * (j as f64 + 0.5)
    }

    /// `int |f|^2` by the midpoint rule.
    pub fn l2_sq(&self) -> f64 {
        self.step * self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }
}

fn phi(curve: &CurveSpec, xi: f64) -> f64 {
    curve.height(xi)
}

/// `phi'(xi) = a |xi|^(a-1) sgn(xi)`.
fn phi_prime(curve: &CurveSpec, xi: f64) -> f64 {
    let a = curve.a();
    a * xi.abs().powf(a - 1.0) * xi.signum()
}

/// Quadrature resolution for the identity check.
#[derive(Debug, Clone, Copy)]
pub struct IdentityQuad {
    /// Truncation radius of the outer integral (over the second spatial
    /// variable).
    pub x2_radius: f64,
    /// Trapezoid sample count on `[0, radius]` (the integrand is even).
    pub x2_samples: usize,
}

/// Outcome of the identity check.
#[derive(Debug, Clone, Copy)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub relerr: f64,
    /// Estimated truncated tail of the left side (added into `lhs`).
    pub tail: f64,
}

/// Geometry scan over the pair of supports: the range of the group-velocity
/// gap `|phi'(xi) - phi'(eta)|` and the range of the energy sum
/// `phi(xi) + phi(eta)`.
struct PairGeometry {
    jmin: f64,
    jmax: f64,
    e_width: f64,
}

fn validate_pair(f: &LineDensity, g: &LineDensity, curve: &CurveSpec) -> Result<PairGeometry> {
    if (f.step - g.step).abs() > 1e-12 * f.step {
        return Err(Error::Precondition("densities must share one grid step".into()));
    }
    let gap = (g.lo - f.hi()).max(f.lo - g.hi());
    if !(gap > 0.0) {
        return Err(Error::Precondition(format!("supports must be separated, gap = {gap}")));
    }
    let pf: Vec<f64> = (0..f.samples.len()).map(|j| phi_prime(curve, f.xi(j))).collect();
    let pg: Vec<f64> = (0..g.samples.len()).map(|k| phi_prime(curve, g.xi(k))).collect();
    let hf: Vec<f64> = (0..f.samples.len()).map(|j| phi(curve, f.xi(j))).collect();
    let hg: Vec<f64> = (0..g.samples.len()).map(|k| phi(curve, g.xi(k))).collect();
    let mut jmin = f64::INFINITY;
    let mut jmax = 0.0f64;
    let mut e_lo = f64::INFINITY;
    let mut e_hi = f64::NEG_INFINITY;
    for j in 0..f.samples.len() {
        for k in 0..g.samples.len() {
            let d = (pf[j] - pg[k]).abs();
            jmin = jmin.min(d);
            jmax = jmax.max(d);
            let e = hf[j] + hg[k];
            e_lo = e_lo.min(e);
            e_hi = e_hi.max(e);
        }
    }
    if !(jmin > 1e-9) {
        return Err(Error::DivisionGuard(jmin));
    }
    Ok(PairGeometry { jmin, jmax, e_width: (e_hi - e_lo).max(1e-6) })
}

/// `(2 pi)^2 int int |f|^2 |g|^2 / |phi'(xi1) - phi'(xi2)|` (the right side
/// of the identity), by midpoint quadrature.
fn pushforward_rhs(f: &LineDensity, g: &LineDensity, curve: &CurveSpec) -> f64 {
    let two_pi_sq = (2.0 * std::f64::consts::PI).powi(2);
    let mut acc = 0.0;
    for (j, fv) in f.samples.iter().enumerate() {
        if fv.norm_sqr() == 0.0 {
            continue;
        }
        let pj = phi_prime(curve, f.xi(j));
        for (k, gv) in g.samples.iter().enumerate() {
            let denom = (pj - phi_prime(curve, g.xi(k))).abs();
            acc += fv.norm_sqr() * gv.norm_sqr() / denom;
        }
    }
    two_pi_sq * acc * f.step * g.step
}

/// `int_R |Ef Eg|^2 dx1` at fixed `x2`, by Plancherel in `x1`: the product's
/// `x1`-spectrum is the convolution `H`, and the full-period sum of `|H|^2`
/// is computed with zero-padded FFTs.
struct RowEngine {
    m: usize,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    ifft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    bf: Vec<C64>,
    bg: Vec<C64>,
    phases_f: Vec<f64>,
    phases_g: Vec<f64>,
}

impl RowEngine {
    fn new(f: &LineDensity, g: &LineDensity, curve: &CurveSpec) -> RowEngine {
        let m = next_pow2_at_least((f.samples.len() + g.samples.len()) as f64);
        let mut planner = FftPlanner::new();
        RowEngine {
            m,
            fft: planner.plan_fft_forward(m),
            ifft: planner.plan_fft_inverse(m),
            bf: vec![C64::new(0.0, 0.0); m],
            bg: vec![C64::new(0.0, 0.0); m],
            phases_f: (0..f.samples.len()).map(|j| phi(curve, f.xi(j))).collect(),
            phases_g: (0..g.samples.len()).map(|j| phi(curve, g.xi(j))).collect(),
        }
    }

    fn row_integral(&mut self, f: &LineDensity, g: &LineDensity, x2: f64) -> f64 {
        self.bf.fill(C64::new(0.0, 0.0));
        self.bg.fill(C64::new(0.0, 0.0));
        for (j, &v) in f.samples.iter().enumerate() {
            let ph = x2 * self.phases_f[j];
            self.bf[j] = v * Complex::new(ph.cos(), ph.sin());
        }
        for (j, &v) in g.samples.iter().enumerate() {
            let ph = x2 * self.phases_g[j];
            self.bg[j] = v * Complex::new(ph.cos(), ph.sin());
        }
        self.fft.process(&mut self.bf);
        self.fft.process(&mut self.bg);
        for (a, &b) in self.bf.iter_mut().zip(self.bg.iter()) {
            *a *= b;
        }
        self.ifft.process(&mut self.bf);
        // The inverse FFT carries a factor m; the convolution values are
        // bf / m.
        let s: f64 = self.bf.iter().map(|v| v.norm_sqr()).sum();
        2.0 * std::f64::consts::PI * f.step.powi(3) * s / (self.m as f64).powi(2)
    }
}

/// Automatic resolution for the outer (`x2`) trapezoid.
///
/// The radius is capped where the midpoint rule in `xi` stops resolving the
/// convolution phase (one radian per cell at the fastest group-velocity gap);
/// past the cap the exact `A / x2^2` far-field law is extrapolated from the
/// last quarter of the samples. The step resolves both the fastest
/// oscillation of the row integral and the `1/jmin` decay scale.
pub fn auto_identity_quad(
    f: &LineDensity,
    g: &LineDensity,
    curve: &CurveSpec,
) -> Result<IdentityQuad> {
    let geo = validate_pair(f, g, curve)?;
    let radius = (1500.0 / geo.jmin).min(1.0 / (f.step * geo.jmax));
    let dt = (2.0 * std::f64::consts::PI / (16.0 * geo.e_width)).min(1.0 / (32.0 * geo.jmin));
    let samples = ((radius / dt).ceil() as usize).clamp(256, 2_000_000);
    Ok(IdentityQuad { x2_radius: radius, x2_samples: samples })
}

/// Checks the exact bilinear identity: numerically integrates
/// `|Ef Eg|^2` over the plane (Plancherel in `x1`, truncated trapezoid in
/// `x2`, extrapolated `A/x2^2` far field) against the weighted frequency
/// integral.
pub fn bilinear_identity_check(
    f: &LineDensity,
    g: &LineDensity,
    curve: &CurveSpec,
    quad: Option<IdentityQuad>,
) -> Result<IdentityReport> {
    // Canonical argument order makes the check exactly symmetric in (f, g).
    let (f, g) = if g.lo < f.lo { (g, f) } else { (f, g) };
    validate_pair(f, g, curve)?;
    let rhs = pushforward_rhs(f, g, curve);
    if rhs == 0.0 {
        return Ok(IdentityReport { lhs: 0.0, rhs: 0.0, relerr: 0.0, tail: 0.0 });
    }
    let quad = match quad {
        Some(q) => q,
        None => auto_identity_quad(f, g, curve)?,
    };
    let mut engine = RowEngine::new(f, g, curve);
    let n = quad.x2_samples;
    let h = quad.x2_radius / n as f64;
    let real_data = f.samples.iter().chain(g.samples.iter()).all(|v| v.im == 0.0);
    // For real densities the row integral is even in x2; otherwise the two
    // half lines are integrated separately.
    let signs: &[f64] = if real_data { &[1.0] } else { &[1.0, -1.0] };
    let sym = if real_data { 2.0 } else { 1.0 };
    let mut body = 0.0;
    let mut tail = 0.0;
    let tail_window = (n / 4).max(1);
    for &sgn in signs {
        let mut acc = 0.0;
        let mut tail_acc = 0.0;
        for i in 0..=n {
            let x2 = sgn * h * i as f64;
            let v = engine.row_integral(f, g, x2);
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * v;
            if i + tail_window > n {
                tail_acc += v * x2 * x2;
            }
        }
        body += sym * acc * h;
        // Far field: I(x2) -> A / x2^2 (integration by parts off the
        // support endpoints; no stationary points on separated supports).
        let a_coeff = tail_acc / tail_window as f64;
        tail += sym * a_coeff / quad.x2_radius;
    }
    let lhs = body + tail;
    Ok(IdentityReport { lhs, rhs, relerr: (lhs - rhs).abs() / rhs, tail })
}

/// Report of the two block-norm computations.
#[derive(Debug, Clone, Copy)]
pub struct BlockNormReport {
    /// `|| Ef Eg ||_{L^2_{t,x}}` from the pushforward quadrature.
    pub pushforward: f64,
    /// Same quantity from direct space-time quadrature.
    pub spacetime: f64,
    pub relgap: f64,
    pub f_l2_sq: f64,
    pub g_l2_sq: f64,
}

/// Unit-coefficient block density on `[k - 1/2, k + 1/2]`.
fn unit_block(k: i64, samples: usize) -> Result<LineDensity> {
    LineDensity::indicator(k as f64 - 0.5, k as f64 + 0.5, samples)
}

/// `|| (e^{it(-d^2)^{a/2}} f)(e^{it(-d^2)^{a/2}} g) ||_{L^2_{t,x}}` for
/// unit blocks at `k` and `j`, computed by space-time quadrature and by the
/// change-of-variables pushforward, cross-checked.
pub fn bilinear_block_norm(
    k: i64,
    j: i64,
    curve: &CurveSpec,
    samples_per_block: usize,
) -> Result<BlockNormReport> {
    if curve.a() < 2.0 {
        return Err(Error::Precondition(format!("a = {} must be >= 2", curve.a())));
    }
    if (k - j).abs() <= 4 || k * j <= 0 || k.abs() < 2 || j.abs() < 2 {
        return Err(Error::Precondition(format!(
            "blocks (k, j) = ({k}, {j}) must satisfy |k-j| > 4, kj > 0, |k|,|j| >= 2"
        )));
    }
    let (lo, hi) = if k < j { (k, j) } else { (j, k) };
    let f = unit_block(lo, samples_per_block)?;
    let g = unit_block(hi, samples_per_block)?;
    let report = bilinear_identity_check(&f, &g, curve, None)?;
    Ok(BlockNormReport {
        pushforward: report.rhs.sqrt(),
        spacetime: report.lhs.sqrt(),
        relgap: (report.lhs.sqrt() - report.rhs.sqrt()).abs() / report.rhs.sqrt(),
        f_l2_sq: f.l2_sq(),
        g_l2_sq: g.l2_sq(),
    })
}

/// The orthogonal functional's time weight `w(t) = (1 + |t|)^{-m}`,
/// truncated at `|t| <= T`.
#[derive(Debug, Clone, Copy)]
pub struct WeightSpec {
    pub m: f64,
    pub t_radius: f64,
}

impl WeightSpec {
    pub fn new(m: f64, t_radius: f64) -> Result<Self> {
        if !(m >= 2.0) || !(t_radius > 0.0) {
            return Err(Error::Domain(format!("bad weight spec m = {m}, T = {t_radius}")));
        }
        Ok(WeightSpec { m, t_radius })
    }

    pub fn standard() -> Self {
        WeightSpec { m: 100.0, t_radius: 4.0 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        (1.0 + t.abs()).powf(-self.m)
    }

    /// Upper bound on the discarded `|t| > T` mass of the weight.
    pub fn tail_bound(&self) -> f64 {
        2.0 * (1.0 + self.t_radius).powf(1.0 - self.m) / (self.m - 1.0)
    }
}

/// Coefficients on a uniform 1-D frequency grid (`xi = index * step`) with a
/// set of unit-width sharp blocks `[k - 1/2, k + 1/2)`.
#[derive(Debug, Clone)]
pub struct BlockData {
    pub step: f64,
    pub j_start: i64,
    pub coeffs: Vec<C64>,
    pub blocks: Vec<i64>,
}

impl BlockData {
    pub fn new(step: f64, j_start: i64, coeffs: Vec<C64>, blocks: Vec<i64>) -> Result<Self> {
        if !(step > 0.0) || coeffs.is_empty() || blocks.is_empty() {
            return Err(Error::Domain("empty block data".into()));
        }
        let mut sorted = blocks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != blocks.len() {
            return Err(Error::Domain("duplicate block indices".into()));
        }
        Ok(BlockData { step, j_start, coeffs, blocks })
    }

    /// Unit coefficients on the blocks `1..=k_count`.
    pub fn unit_blocks(k_count: usize, step: f64) -> Result<Self> {
        let lo = 0.5;
        let hi = k_count as f64 + 0.5;
        let j_start = (lo / step).ceil() as i64;
        let j_end = (hi / step).ceil() as i64; // exclusive
        let coeffs = vec![C64::new(1.0, 0.0); (j_end - j_start) as usize];
        Self::new(step, j_start, coeffs, (1..=k_count as i64).collect())
    }

    pub fn xi(&self, idx: usize) -> f64 {
        (self.j_start + idx as i64) as f64 * self.step
    }

    /// Indices (into `coeffs`) of the sharp block `[k - 1/2, k + 1/2)`.
    pub fn block_indices(&self, k: i64) -> std::ops::Range<usize> {
        let lo = (k as f64 - 0.5) / self.step;
        let hi = (k as f64 + 0.5) / self.step;
        let i_lo = (lo.ceil() as i64 - self.j_start).clamp(0, self.coeffs.len() as i64) as usize;
        let i_hi = (hi.ceil() as i64 - self.j_start).clamp(0, self.coeffs.len() as i64) as usize;
        i_lo..i_hi
    }

    /// `||box_k f||_2^2 = step * sum |c|^2` over the block.
    pub fn block_l2_sq(&self, k: i64) -> f64 {
        let r = self.block_indices(k);
        self.step * self.coeffs[r].iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn total_l2_sq(&self) -> f64 {
        self.step * self.coeffs.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }
}

/// `|| (sum_k |e^{it(-d^2)^{a/2}} box_k f|^2)^{1/2} ||_{L^4(w dt dx)}
/// / (sum_k ||box_k f||_2^4)^{1/4}`.
///
/// The propagator is evaluated per t-sample by folded 1-D FFTs over a
/// periodic x-cell of length `2 pi / step >= 64 pi`; `x_points = 0` /
/// `t_samples = 0` select automatic resolutions.
pub fn orthogonal_ratio(
    data: &BlockData,
    curve: &CurveSpec,
    weight: &WeightSpec,
    x_points: usize,
    t_samples: usize,
) -> Result<f64> {
    if curve.a() <= 2.0 {
        return Err(Error::Precondition(format!("a = {} must be > 2", curve.a())));
    }
    if data.total_l2_sq() == 0.0 {
        return Err(Error::Precondition("all-zero block data".into()));
    }
    let cell = 2.0 * std::f64::consts::PI / data.step;
    if cell < 64.0 * std::f64::consts::PI {
        return Err(Error::Precondition(format!(
            "x-cell {cell} below 64 pi; decrease the frequency step"
        )));
    }
    // |u_k|^2 has x-frequencies within [-1, 1] on the step lattice; the
    // fourth power doubles that, so > 4/step points integrate S^2 exactly.
    let m = if x_points == 0 {
        next_pow2_at_least(8.0 / data.step)
    } else {
        x_points
    };
    if (m as f64) < 4.0 / data.step {
        return Err(Error::Precondition(format!("x_points = {m} cannot resolve S^2")));
    }
    // Fastest within-block oscillation of |u_k|^2 in t.
    let mut e_width_max = 0.0f64;
    for &k in &data.blocks {
        let r = data.block_indices(k);
        if r.is_empty() {
            continue;
        }
        let es: Vec<f64> = r.clone().map(|i| phi(curve, data.xi(i))).collect();
        let (lo, hi) = es
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &e| (l.min(e), h.max(e)));
        e_width_max = e_width_max.max(hi - lo);
    }
    let nt = if t_samples == 0 {
        let rate = (2.0 * e_width_max).max(1.0);
        (((2.0 * weight.t_radius * rate) * 8.0 / (2.0 * std::f64::consts::PI)).ceil() as usize)
            .clamp(64, 4_000_000)
    } else {
        t_samples
    };
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(m);
    let mut buf = vec![C64::new(0.0, 0.0); m];
    let mut s_acc = vec![0.0f64; m];
    let dt = 2.0 * weight.t_radius / nt as f64;
    let mut num4 = 0.0;
    for it in 0..=nt {
        let t = -weight.t_radius + dt * it as f64;
        s_acc.fill(0.0);
        for &k in &data.blocks {
            let r = data.block_indices(k);
            if r.is_empty() {
                continue;
            }
            buf.fill(C64::new(0.0, 0.0));
            for i in r {
                let ph = t * phi(curve, data.xi(i));
                let bin = (self_mod(data.j_start + i as i64, m as i64)) as usize;
                buf[bin] += data.coeffs[i] * Complex::new(ph.cos(), ph.sin()) * data.step;
            }
            fft.process(&mut buf);
            for (s, v) in s_acc.iter_mut().zip(buf.iter()) {
                *s += v.norm_sqr();
            }
        }
        let row: f64 = s_acc.iter().map(|&s| s * s).sum();
        let wt = if it == 0 || it == nt { 0.5 } else { 1.0 };
        num4 += wt * weight.eval(t) * row;
    }
    let num4 = num4 * dt * cell / m as f64;
    let den4: f64 = data.blocks.iter().map(|&k| data.block_l2_sq(k).powi(2)).sum();
    if !(den4 > 0.0) {
        return Err(Error::DivisionGuard(den4));
    }
    Ok(num4.powf(0.25) / den4.powf(0.25))
}

fn self_mod(x: i64, m: i64) -> i64 {
    x.rem_euclid(m)
}
