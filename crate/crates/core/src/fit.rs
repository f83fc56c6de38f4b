//! Log-log regression for turning ladders of measurements into exponents.

use crate::{Error, Result};

/// A ladder of `(scale, value)` measurements, both positive, scales strictly
/// monotone.
#[derive(Debug, Clone)]
pub struct Ladder {
    points: Vec<(f64, f64)>,
    label: String,
}

impl Ladder {
    pub fn new(points: Vec<(f64, f64)>, label: impl Into<String>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::DegenerateFit(format!(
                "ladder needs at least 3 points, got {}",
                points.len()
            )));
        }
        let increasing = points.windows(2).all(|w| w[0].0 < w[1].0);
        let decreasing = points.windows(2).all(|w| w[0].0 > w[1].0);
        if !increasing && !decreasing {
            return Err(Error::DegenerateFit("scales must be strictly monotone".into()));
        }
        for &(s, v) in &points {
            if s <= 0.0 || v <= 0.0 || !s.is_finite() || !v.is_finite() {
                return Err(Error::DegenerateFit(format!(
                    "nonpositive or non-finite ladder point ({s}, {v})"
                )));
            }
        }
        Ok(Ladder { points, label: label.into() })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Drops the `n` coarsest points (smallest scale), keeping at least 3.
    pub fn drop_coarsest(&self, n: usize) -> Result<Ladder> {
        let mut pts = self.points.clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.len() < n + 3 {
            return Err(Error::DegenerateFit("too few points left after trim".into()));
        }
        Ladder::new(pts.split_off(n), self.label.clone())
    }
}

/// Slope/intercept/max-residual of a least-squares line in log-log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub max_residual: f64,
    pub n: usize,
}

/// Least-squares line through `(log scale, log value)`.
pub fn loglog_fit(ladder: &Ladder) -> FitResult {
    let logs: Vec<(f64, f64)> =
        ladder.points().iter().map(|&(s, v)| (s.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let mx = sx / n;
    let my = sy / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let max_residual = logs
        .iter()
        .map(|&(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0, f64::max);
    FitResult { slope, intercept, max_residual, n: logs.len() }
}

/// True iff the fitted slope is within `tol` of `target`.
pub fn exponent_match(fit: &FitResult, target: f64, tol: f64) -> bool {
    (fit.slope - target).abs() <= tol
}
