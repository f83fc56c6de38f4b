//! Finite unions of disjoint closed intervals with exact endpoints.

/// A finite union of disjoint, sorted, closed intervals on the real line.
///
/// Carrier for sublevel sets `U_{a,r}(c, lambda)` and line-segment sets
/// `L(xi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    /// The empty union.
    pub fn empty() -> Self {
        IntervalUnion { intervals: Vec::new() }
    }

    /// Builds a union from arbitrary `(lo, hi)` pairs, dropping inverted
    /// pairs and merging overlapping or touching intervals.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.retain(|&(lo, hi)| lo <= hi && lo.is_finite() && hi.is_finite());
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (lo, hi) in pairs {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        IntervalUnion { intervals: merged }
    }

    pub fn single(lo: f64, hi: f64) -> Self {
        Self::from_pairs(vec![(lo, hi)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= t && t <= hi)
    }

    /// Intersection with a single closed interval.
    pub fn intersect(&self, lo: f64, hi: f64) -> IntervalUnion {
        let mut out = Vec::new();
        for &(a, b) in &self.intervals {
            let l = a.max(lo);
            let h = b.min(hi);
            if l <= h {
                out.push((l, h));
            }
        }
        IntervalUnion { intervals: out }
    }

    /// True iff the union meets the closed interval `[lo, hi]`.
    pub fn meets(&self, lo: f64, hi: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a.max(lo) <= b.min(hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_touching_intervals() {
        let u = IntervalUnion::from_pairs(vec![(0.0, 1.0), (1.0, 2.0), (3.0, 4.0)]);
        assert_eq!(u.count(), 2);
        assert_eq!(u.measure(), 3.0);
    }

    #[test]
    fn drops_inverted_pairs() {
        let u = IntervalUnion::from_pairs(vec![(2.0, 1.0)]);
        assert!(u.is_empty());
        assert_eq!(u.measure(), 0.0);
    }

    #[test]
    fn intersect_and_meets() {
        let u = IntervalUnion::from_pairs(vec![(0.0, 1.0), (2.0, 3.0)]);
        assert!(u.meets(0.5, 0.6));
        assert!(!u.meets(1.2, 1.8));
        let v = u.intersect(0.5, 2.5);
        assert_eq!(v.intervals(), &[(0.5, 1.0), (2.0, 2.5)]);
        assert!(u.contains(2.0));
        assert!(!u.contains(1.5));
    }
}
