//! Discrete model of fields `F` with Fourier support in the curve
//! neighborhood `Gamma_a(delta)`: lattice spectra, FFT synthesis on the dual
//! torus, L^2/L^4 norms, square functions, the empirical ratio, and the
//! wave-packet extremizer constructors.
//!
//! The discrete-periodic lattice IS the model (a torus of large period); all
//! norms are exact quadratures over that model, not approximations of the
//! real-plane object.

use std::io::Write as _;

use rand::Rng;

use crate::calibration::DEFAULT_MEMORY_CAP;
use crate::curve::{CurveSpec, DecompositionSpec, SeparatedSet, standard_separated_set};
use crate::fft::{inverse_fft_2d, next_pow2_at_least, C64};
use crate::window::Window;
use crate::{Error, Result};

/// Uniform frequency lattice over the box
/// `[-1 - delta^(1/b), 1 + delta^(1/b)] x [-delta, 1 + delta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqGrid {
    pub lo1: f64,
    pub d1: f64,
    pub n1: usize,
    pub lo2: f64,
    pub d2: f64,
    pub n2: usize,
}

impl FreqGrid {
    pub fn xi1(&self, i1: usize) -> f64 {
        self.lo1 + self.d1 * i1 as f64
    }

    pub fn xi2(&self, i2: usize) -> f64 {
        self.lo2 + self.d2 * i2 as f64
    }
}

/// One lattice column of spectrum: a dense run of values starting at row
/// `start`.
#[derive(Debug, Clone, Default)]
struct Column {
    start: usize,
    vals: Vec<C64>,
}

/// A lattice spectrum supported in `Gamma_a(delta)`.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub curve: CurveSpec,
    pub delta: f64,
    pub grid: FreqGrid,
    cols: Vec<Column>,
}

/// Default lattice sizes: `n2 = 4/delta` and `n1 = max(n2, 4/delta^(1/b))`,
/// each rounded up to a power of two (at least 4 rows/columns per block
/// dimension).
pub fn default_sizes(spec: &DecompositionSpec) -> (usize, usize) {
    let n2 = next_pow2_at_least(4.0 / spec.delta);
    let n1 = n2.max(next_pow2_at_least(4.0 / spec.half_width()));
    (n1, n2)
}

fn make_grid(spec: &DecompositionSpec, n1: usize, n2: usize) -> FreqGrid {
    let w = spec.half_width();
    let (lo1, hi1) = (-1.0 - w, 1.0 + w);
    let (lo2, hi2) = (-spec.delta, 1.0 + spec.delta);
    FreqGrid {
        lo1,
        d1: (hi1 - lo1) / n1 as f64,
        n1,
        lo2,
        d2: (hi2 - lo2) / n2 as f64,
        n2,
    }
}

impl SpectralField {
    /// Builds a masked field by evaluating `f` at every lattice point inside
    /// `Gamma_a(delta)` (other lattice points are identically zero).
    pub fn from_fn(
        curve: CurveSpec,
        spec: &DecompositionSpec,
        n1: usize,
        n2: usize,
        mut f: impl FnMut(f64, f64) -> C64,
    ) -> Result<Self> {
        if !n1.is_power_of_two() || !n2.is_power_of_two() {
            return Err(Error::Domain(format!("grid sizes ({n1}, {n2}) must be powers of two")));
        }
        let grid = make_grid(spec, n1, n2);
        if (n2 as f64) < 4.0 / spec.delta {
            return Err(Error::Domain(format!(
                "n2 = {n2} below the 4/delta = {} row-resolution floor",
                4.0 / spec.delta
            )));
        }
        let delta = spec.delta;
        let mut cols = vec![Column::default(); n1];
        for (i1, col) in cols.iter_mut().enumerate() {
            let xi1 = grid.xi1(i1);
            if xi1.abs() > 1.0 {
                continue;
            }
            let h = curve.height(xi1);
            let r_lo = ((h - delta - grid.lo2) / grid.d2).ceil().max(0.0) as usize;
            let r_hi_f = ((h + delta - grid.lo2) / grid.d2).floor();
            if r_hi_f < r_lo as f64 {
                continue;
            }
            let r_hi = (r_hi_f as usize).min(n2 - 1);
            col.start = r_lo;
            col.vals = (r_lo..=r_hi)
                .map(|i2| {
                    let xi2 = grid.xi2(i2);
                    if (xi2 - h).abs() <= delta {
                        f(xi1, xi2)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect();
        }
        Ok(SpectralField { curve, delta, grid, cols })
    }

    /// Random masked field: independent uniform coefficients on the square
    /// `[-1, 1]^2` of the complex plane at every admissible lattice point.
    pub fn random(
        curve: CurveSpec,
        spec: &DecompositionSpec,
        n1: usize,
        n2: usize,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        Self::from_fn(curve, spec, n1, n2, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    /// Re-applies the support mask, zeroing anything outside `Gamma_a(delta)`
    /// (idempotent; fields built through [`Self::from_fn`] are unchanged).
    pub fn mask(&mut self) {
        let (grid, curve, delta) = (self.grid, self.curve, self.delta);
        for (i1, col) in self.cols.iter_mut().enumerate() {
            let xi1 = grid.xi1(i1);
            let keep_col = xi1.abs() <= 1.0;
            for (k, v) in col.vals.iter_mut().enumerate() {
                let xi2 = grid.xi2(col.start + k);
                if !keep_col || (xi2 - curve.height(xi1)).abs() > delta {
                    *v = C64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Iterates `(i1, i2, value)` over stored (possibly zero) coefficients.
    pub fn iter_coeffs(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.cols.iter().enumerate().flat_map(|(i1, col)| {
            col.vals.iter().enumerate().map(move |(k, &v)| (i1, col.start + k, v))
        })
    }

    /// Number of stored nonzero coefficients.
    pub fn nnz(&self) -> usize {
        self.iter_coeffs().filter(|&(_, _, v)| v != C64::new(0.0, 0.0)).count()
    }

    /// Frequency-side squared l^2 mass `sum |c|^2`.
    pub fn l2_freq_sq(&self) -> f64 {
        self.iter_coeffs().map(|(_, _, v)| v.norm_sqr()).sum()
    }

    /// Squared l^2 mass restricted to the columns of one block.
    pub fn l2_freq_sq_cols(&self, cols: &[usize]) -> f64 {
        cols.iter()
            .map(|&i1| self.cols[i1].vals.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Directly evaluates the exponential sum
    /// `F(x) = sum_k c_k exp(i x . xi_k)` at one spatial point (oracle; cost
    /// proportional to the number of coefficients).
    pub fn eval_direct(&self, x1: f64, x2: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i1, i2, v) in self.iter_coeffs() {
            let ph = x1 * self.grid.xi1(i1) + x2 * self.grid.xi2(i2);
            acc += v * C64::new(ph.cos(), ph.sin());
        }
        acc
    }

    /// FFT synthesis on the dual spatial lattice of size
    /// `(oversample n1, oversample n2)` over one period cell.
    pub fn synthesize(&self, oversample: usize) -> Result<SpatialField> {
        let mut ws = SynthWorkspace::allocate(&self.grid, oversample)?;
        self.synthesize_with(&mut ws, None);
        Ok(SpatialField { m1: ws.m1, m2: ws.m2, weight: ws.weight, values: ws.buf })
    }

    /// Fills `ws.buf` with the synthesized samples (second index major).
    fn synthesize_with(&self, ws: &mut SynthWorkspace, cols: Option<&[usize]>) {
        ws.buf.fill(C64::new(0.0, 0.0));
        let mut rows = Vec::new();
        let mut place = |i1: usize, col: &Column| {
            if col.vals.is_empty() {
                return;
            }
            rows.push(i1);
            let base = i1 * ws.m2;
            for (k, &v) in col.vals.iter().enumerate() {
                ws.buf[base + col.start + k] = v;
            }
        };
        match cols {
            Some(list) => {
                for &i1 in list {
                    place(i1, &self.cols[i1]);
                }
            }
            None => {
                for (i1, col) in self.cols.iter().enumerate() {
                    place(i1, col);
                }
            }
        }
        inverse_fft_2d(&mut ws.buf, &mut ws.scratch, ws.m1, ws.m2, Some(&rows));
    }
}

/// Reusable synthesis buffers for one grid/oversample combination.
struct SynthWorkspace {
    m1: usize,
    m2: usize,
    weight: f64,
    buf: Vec<C64>,
    scratch: Vec<C64>,
}

impl SynthWorkspace {
    fn allocate(grid: &FreqGrid, oversample: usize) -> Result<SynthWorkspace> {
        if oversample < 2 {
            return Err(Error::Domain(format!("oversample {oversample} must be >= 2")));
        }
        let m1 = oversample * grid.n1;
        let m2 = oversample * grid.n2;
        let total = m1 * m2;
        if total > DEFAULT_MEMORY_CAP {
            return Err(Error::MemoryGuard { requested: total, cap: DEFAULT_MEMORY_CAP });
        }
        // Period cell: (2 pi / d1) x (2 pi / d2); uniform quadrature weight.
        let cell = (2.0 * std::f64::consts::PI / grid.d1)
            * (2.0 * std::f64::consts::PI / grid.d2);
        Ok(SynthWorkspace {
            m1,
            m2,
            weight: cell / total as f64,
            buf: vec![C64::new(0.0, 0.0); total],
            scratch: vec![C64::new(0.0, 0.0); total],
        })
    }
}

/// Spatial samples of a synthesized field over one period cell, stored with
/// the second coordinate major (`values[j2 * m1 + j1]`), plus the uniform
/// quadrature weight.
pub struct SpatialField {
    pub m1: usize,
    pub m2: usize,
    pub weight: f64,
    pub values: Vec<C64>,
}

/// `(sum w |F|^4)^(1/4)` over the period cell.
pub fn l4_norm(spatial: &SpatialField) -> f64 {
    let s: f64 = spatial.values.iter().map(|v| { let q = v.norm_sqr(); q * q }).sum();
    (spatial.weight * s).powf(0.25)
}

/// `(sum w |F|^2)^(1/2)` over the period cell.
pub fn l2_norm(spatial: &SpatialField) -> f64 {
    let s: f64 = spatial.values.iter().map(|v| v.norm_sqr()).sum();
    (spatial.weight * s).sqrt()
}

/// Assignment of lattice columns to blocks: each column belongs to the
/// nearest center within `delta^(1/b)`, hence to at most one block.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub omegas: SeparatedSet,
    /// For each block, the lattice columns assigned to it.
    block_cols: Vec<Vec<usize>>,
}

impl BlockDecomposition {
    pub fn new(field: &SpectralField, omegas: SeparatedSet, spec: &DecompositionSpec) -> Self {
        let w = spec.half_width();
        let mut block_cols = vec![Vec::new(); omegas.len()];
        for i1 in 0..field.grid.n1 {
            let xi1 = field.grid.xi1(i1);
            let pts = omegas.points();
            let j = pts.partition_point(|&p| p < xi1);
            let mut best: Option<(f64, usize)> = None;
            for cand in [j.wrapping_sub(1), j] {
                if let Some(&p) = pts.get(cand) {
                    let d = (xi1 - p).abs();
                    if d <= w && best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, cand));
                    }
                }
            }
            if let Some((_, b)) = best {
                block_cols[b].push(i1);
            }
        }
        BlockDecomposition { omegas, block_cols }
    }

    pub fn block_columns(&self, b: usize) -> &[usize] {
        &self.block_cols[b]
    }

    pub fn num_blocks(&self) -> usize {
        self.block_cols.len()
    }

    /// True iff every nonzero coefficient of `field` lies in some block.
    pub fn covers(&self, field: &SpectralField) -> bool {
        let mut assigned = vec![false; field.grid.n1];
        for cols in &self.block_cols {
            for &i1 in cols {
                assigned[i1] = true;
            }
        }
        field
            .iter_coeffs()
            .all(|(i1, _, v)| v == C64::new(0.0, 0.0) || assigned[i1])
    }
}

/// `|| (sum_omega |F_omega|^2)^(1/2) ||_4`: synthesizes each block by a
/// column-masked inverse FFT and accumulates `|F_omega|^2` pointwise.
pub fn square_function_norm(
    field: &SpectralField,
    decomp: &BlockDecomposition,
    oversample: usize,
) -> Result<f64> {
    let mut ws = SynthWorkspace::allocate(&field.grid, oversample)?;
    let total = ws.m1 * ws.m2;
    let mut acc = vec![0.0f64; total];
    for b in 0..decomp.num_blocks() {
        let cols = decomp.block_columns(b);
        if cols.iter().all(|&i1| field.cols[i1].vals.is_empty()) {
            continue;
        }
        field.synthesize_with(&mut ws, Some(cols));
        for (a, v) in acc.iter_mut().zip(ws.buf.iter()) {
            *a += v.norm_sqr();
        }
    }
    let s: f64 = acc.iter().map(|&q| q * q).sum();
    Ok((ws.weight * s).powf(0.25))
}

/// `l4_norm(F) / square_function_norm(F)` on a common oversampled grid.
pub fn empirical_ratio(
    field: &SpectralField,
    decomp: &BlockDecomposition,
    oversample: usize,
) -> Result<f64> {
    let l4 = l4_norm(&field.synthesize(oversample)?);
    let sq = square_function_norm(field, decomp, oversample)?;
    if !(sq > 1e-150) {
        return Err(Error::DivisionGuard(sq));
    }
    Ok(l4 / sq)
}

/// The wave-packet regimes of the sharpness constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `a <= 2`, `b` in `[1, 2]`: progression of packets around `xi1 = 1/2`
    /// inside a `c sqrt(delta)` window, packet width `delta`.
    ShallowProgression,
    /// `a <= 2`, `b < 1`: same window, packet width `delta^(1/b)` in `xi1`.
    NarrowBlockProgression,
    /// `b >= max(a, 2)`: a single packet (both sides of the estimate agree).
    SinglePacket,
    /// `a > 2`, `1 <= b <= a`: progression on `[0, c delta^(1/a)]` with
    /// spacing `delta^(1/b)`.
    SteepProgression,
    /// `a > 2`, `b > a`: single packet.
    SteepSinglePacket,
}

impl Regime {
    /// The regime the case split assigns to `(a, b)`.
    pub fn infer(curve: &CurveSpec, b: f64) -> Regime {
        let a = curve.a();
        if a <= 2.0 {
            if b < 1.0 {
                Regime::NarrowBlockProgression
            } else if b <= 2.0 {
                Regime::ShallowProgression
            } else {
                Regime::SinglePacket
            }
        } else if b <= a {
            Regime::SteepProgression
        } else {
            Regime::SteepSinglePacket
        }
    }
}

/// Extremizer description: regime, tuning constant `c`, and the window.
#[derive(Debug, Clone, Copy)]
pub struct WavePacketExtremizer {
    pub regime: Regime,
    pub c: f64,
    pub window: &'static Window,
}

impl WavePacketExtremizer {
    pub fn new(regime: Regime, c: f64) -> Result<Self> {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::Domain(format!("tuning constant c = {c} not in (0, 1]")));
        }
        Ok(WavePacketExtremizer { regime, c, window: Window::standard() })
    }

    /// Calibrated constructor: `c` is the largest `2^-k` for which every
    /// packet pair-sum stays within `delta/10` of the anchor energy
    /// (`2 (omega + omega')/2)^a` near `xi1 = 1/2`; `0` in the steep case).
    pub fn calibrated(regime: Regime, curve: &CurveSpec, spec: &DecompositionSpec) -> Result<Self> {
        let c = calibrate_c(regime, curve, spec)?;
        Self::new(regime, c)
    }
}

/// Enumerates the packet centers of a regime.
fn packet_centers(
    regime: Regime,
    ext_c: f64,
    curve: &CurveSpec,
    spec: &DecompositionSpec,
) -> Result<SeparatedSet> {
    let unit = DecompositionSpec::new(spec.delta, spec.b, 1.0)?;
    match regime {
        Regime::SinglePacket | Regime::SteepSinglePacket => SeparatedSet::new(vec![0.0], 0.0),
        Regime::ShallowProgression | Regime::NarrowBlockProgression => {
            let half = ext_c * spec.delta.sqrt();
            let set = standard_separated_set(&unit, (0.5 - half, 0.5 + half))?;
            if set.is_empty() {
                // Window shorter than the spacing: degenerate to one packet.
                return SeparatedSet::new(vec![0.5], 0.0);
            }
            Ok(set)
        }
        Regime::SteepProgression => {
            let hi = (ext_c * spec.delta.powf(1.0 / curve.a())).min(1.0);
            let set = standard_separated_set(&unit, (0.0, hi))?;
            if set.is_empty() {
                return SeparatedSet::new(vec![0.0], 0.0);
            }
            Ok(set)
        }
    }
}

fn pair_sum_deviation(set: &SeparatedSet, curve: &CurveSpec, anchor_midpoint: bool) -> f64 {
    let mut worst = 0.0f64;
    for &w in set.points() {
        for &w2 in set.points() {
            let e = curve.height(w) + curve.height(w2);
            let anchor = if anchor_midpoint {
                2.0 * curve.height((w + w2) / 2.0)
            } else {
                0.0
            };
            worst = worst.max((e - anchor).abs());
        }
    }
    worst
}

/// The largest `c` in `{2^-1, ..., 2^-20}` passing the `delta/10` pair-sum
/// containment test for the regime's packet set.
pub fn calibrate_c(regime: Regime, curve: &CurveSpec, spec: &DecompositionSpec) -> Result<f64> {
    if matches!(regime, Regime::SinglePacket | Regime::SteepSinglePacket) {
        return Ok(0.25);
    }
    let midpoint = !matches!(regime, Regime::SteepProgression);
    let mut c = 0.5;
    for _ in 1..=20 {
        let set = packet_centers(regime, c, curve, spec)?;
        if pair_sum_deviation(&set, curve, midpoint) <= spec.delta / 10.0 {
            return Ok(c);
        }
        c *= 0.5;
    }
    Ok(c)
}

/// Builds the regime's extremizer field and its natural block decomposition.
pub fn build_extremizer(
    ext: &WavePacketExtremizer,
    spec: &DecompositionSpec,
    curve: &CurveSpec,
    n1: usize,
    n2: usize,
) -> Result<(SpectralField, BlockDecomposition)> {
    if Regime::infer(curve, spec.b) != ext.regime {
        return Err(Error::Precondition(format!(
            "regime {:?} inconsistent with (a, b) = ({}, {})",
            ext.regime,
            curve.a(),
            spec.b
        )));
    }
    let centers = packet_centers(ext.regime, ext.c, curve, spec)?;
    // Packet width in xi1: delta^(1/b) when b < 1, else delta.
    let w1 = if spec.b < 1.0 { spec.half_width() } else { spec.delta };
    let amp = 1.0 / (w1 * spec.delta);
    let win = ext.window;
    let field = SpectralField::from_fn(*curve, spec, n1, n2, |xi1, xi2| {
        let mut v = 0.0;
        for &om in centers.points() {
            if (xi1 - om).abs() <= w1 / 2.0 {
                v += amp * win.eval((xi1 - om) / w1) * win.eval((xi2 - curve.height(om)) / spec.delta);
            }
        }
        C64::new(v, 0.0)
    })?;
    let decomp = BlockDecomposition::new(&field, centers, spec);
    Ok((field, decomp))
}

/// Writes a spatial or spectral array dump: a 48-byte header (magic "RSFF",
/// version, the two lattice sizes, then the four frequency-box bounds as
/// doubles) followed by row-major complex64 (f32 re/im) pairs, little-endian.
pub fn dump_complex64(
    path: &std::path::Path,
    n1: usize,
    n2: usize,
    grid: &FreqGrid,
    values: impl Iterator<Item = C64>,
) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(f);
    out.write_all(b"RSFF")?;
    out.write_all(&1u32.to_le_bytes())?;
    out.write_all(&(n1 as u32).to_le_bytes())?;
    out.write_all(&(n2 as u32).to_le_bytes())?;
    for v in [
        grid.lo1,
        grid.lo1 + grid.d1 * grid.n1 as f64,
        grid.lo2,
        grid.lo2 + grid.d2 * grid.n2 as f64,
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    for v in values {
        out.write_all(&(v.re as f32).to_le_bytes())?;
        out.write_all(&(v.im as f32).to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}
