//! Counting near-solutions of the perturbed system
//! `xi1 + xi2 = xi3 + xi4`, `xi1^a + xi2^a = xi3^a + xi4^a + O(delta)`
//! over separated sets: the discrete counting problem behind the L^4
//! expansion.

use std::collections::HashMap;

use crate::calibration::{COUNT_BRUTE_CAP, COUNT_FAST_CAP};
use crate::curve::{CurveSpec, DecompositionSpec, SeparatedSet};
use crate::{Error, Result};

/// A counting query: the point set, the curve, and the two tolerances.
#[derive(Debug, Clone)]
pub struct CountQuery {
    pub omegas: SeparatedSet,
    pub curve: CurveSpec,
    /// Tolerance on `|xi1 + xi2 - xi3 - xi4|`.
    pub sum_tol: f64,
    /// Tolerance on `|xi1^a + xi2^a - xi3^a - xi4^a|` (the O(delta) window).
    pub energy_tol: f64,
}

impl CountQuery {
    pub fn new(
        omegas: SeparatedSet,
        curve: CurveSpec,
        sum_tol: f64,
        energy_tol: f64,
    ) -> Result<Self> {
        if !(sum_tol > 0.0) || !(energy_tol > 0.0) {
            return Err(Error::Domain(format!(
                "tolerances must be positive, got sum_tol={sum_tol} energy_tol={energy_tol}"
            )));
        }
        Ok(CountQuery { omegas, curve, sum_tol, energy_tol })
    }

    /// The default tolerances: `sum_tol` = the set spacing (equal sums means
    /// equal bins) and `energy_tol = 4 delta`.
    pub fn standard(
        omegas: SeparatedSet,
        curve: CurveSpec,
        spec: &DecompositionSpec,
    ) -> Result<Self> {
        Self::new(omegas, curve, spec.spacing(), 4.0 * spec.delta)
    }
}

/// Ordered-quadruple counts split into the diagonal (`{xi1,xi2} = {xi3,xi4}`
/// as multisets) and the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountResult {
    pub total: u64,
    pub diagonal: u64,
}

impl CountResult {
    pub fn offdiagonal(&self) -> u64 {
        self.total - self.diagonal
    }
}

fn pair_key(x: f64, y: f64) -> (u64, u64) {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    (lo.to_bits(), hi.to_bits())
}

/// Diagonal count: ordered quadruples whose two pairs are equal as value
/// multisets (these always satisfy any positive tolerances).
fn diagonal_count(points: &[f64]) -> u64 {
    let mut buckets: HashMap<(u64, u64), u64> = HashMap::new();
    for &x in points {
        for &y in points {
            *buckets.entry(pair_key(x, y)).or_insert(0) += 1;
        }
    }
    buckets.values().map(|&n| n * n).sum()
}

struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    fn add(&mut self, mut i: usize) {
        i += 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of inserted indices `<= i` (pass `i + 1` elements prefix).
    fn prefix(&self, mut i: usize) -> u64 {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Exact ordered-quadruple count in `O(M^2 log M)`: enumerate all pairs,
/// sort by sum, slide a window in the sum coordinate, and count the energy
/// band inside each window with a Fenwick tree over energy ranks.
pub fn count_fast(q: &CountQuery) -> Result<CountResult> {
    let m = q.omegas.len();
    if m > COUNT_FAST_CAP {
        return Err(Error::CapExceeded(m, COUNT_FAST_CAP));
    }
    if m == 0 {
        return Ok(CountResult { total: 0, diagonal: 0 });
    }
    let pts = q.omegas.points();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(m * m);
    for &x in pts {
        for &y in pts {
            pairs.push((x + y, q.curve.height(x) + q.curve.height(y)));
        }
    }
    pairs.sort_by(|p, r| p.0.total_cmp(&r.0).then(p.1.total_cmp(&r.1)));
    let n = pairs.len();
    let sums: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut energies: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    energies.sort_by(f64::total_cmp);
    energies.dedup();

    // For query i, the answer is F(hi_i) - F(lo_i - 1) where F(k) counts
    // pairs j <= k (in sum order) with energy in the band of pair i.
    // Answer both prefix queries offline during one insertion sweep.
    let mut queries: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for (i, p) in pairs.iter().enumerate() {
        let lo = sums.partition_point(|&s| s < p.0 - q.sum_tol);
        let hi = sums.partition_point(|&s| s <= p.0 + q.sum_tol);
        queries[hi - 1].push((i, 1));
        if lo > 0 {
            queries[lo - 1].push((i, -1));
        }
    }
    let mut fen = Fenwick::new(energies.len());
    let mut total: i64 = 0;
    for (k, p) in pairs.iter().enumerate() {
        let rank = energies.partition_point(|&e| e < p.1);
        fen.add(rank);
        for &(i, sign) in &queries[k] {
            let e = pairs[i].1;
            let r_hi = energies.partition_point(|&v| v <= e + q.energy_tol);
            let r_lo = energies.partition_point(|&v| v < e - q.energy_tol);
            total += sign * (fen.prefix(r_hi) - fen.prefix(r_lo)) as i64;
        }
    }
    Ok(CountResult { total: total as u64, diagonal: diagonal_count(pts) })
}

/// `O(M^4)` direct enumeration oracle with the same contract as
/// [`count_fast`].
pub fn count_bruteforce(q: &CountQuery) -> Result<CountResult> {
    let m = q.omegas.len();
    if m > COUNT_BRUTE_CAP {
        return Err(Error::CapExceeded(m, COUNT_BRUTE_CAP));
    }
    let pts = q.omegas.points();
    let mut total = 0u64;
    let mut diagonal = 0u64;
    for &x1 in pts {
        for &x2 in pts {
            let s = x1 + x2;
            let e = q.curve.height(x1) + q.curve.height(x2);
            for &x3 in pts {
                for &x4 in pts {
                    let s2 = x3 + x4;
                    let e2 = q.curve.height(x3) + q.curve.height(x4);
                    if (s - s2).abs() <= q.sum_tol && (e - e2).abs() <= q.energy_tol {
                        total += 1;
                        if pair_key(x1, x2) == pair_key(x3, x4) {
                            diagonal += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(CountResult { total, diagonal })
}
