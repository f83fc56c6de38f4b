//! The tabulated smooth flat-top window `phi` with
//! `1_[-1/4,1/4] <= phi <= 1_[-1/2,1/2]`.
//!
//! `phi` is identically 1 on `[-1/4, 1/4]`, vanishes outside `(-1/2, 1/2)`,
//! and transitions through the standard smooth partition ratio
//! `g(s) / (g(s) + g(1-s))` with `g(s) = exp(-1/s)`, which makes it C-infinity.
//! Values are tabulated once at 2^16 + 1 points on `[0, 1/2]` and read back
//! through cubic (Catmull-Rom) interpolation.

use std::sync::OnceLock;

/// Number of table intervals on `[0, 1/2]`.
pub const TABLE_SIZE: usize = 1 << 16;

#[derive(Debug)]
pub struct Window {
    table: Vec<f64>,
}

fn g(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// The exact window formula, used to build the table and as a test oracle.
pub fn exact(x: f64) -> f64 {
    let x = x.abs();
    if x <= 0.25 {
        1.0
    } else if x >= 0.5 {
        0.0
    } else {
        // s runs from 1 at |x| = 1/4 down to 0 at |x| = 1/2.
        let s = (0.5 - x) * 4.0;
        g(s) / (g(s) + g(1.0 - s))
    }
}

impl Window {
    fn build() -> Window {
        let table = (0..=TABLE_SIZE)
            .map(|i| exact(0.5 * i as f64 / TABLE_SIZE as f64))
            .collect();
        Window { table }
    }

    /// The shared standard window.
    pub fn standard() -> &'static Window {
        static CELL: OnceLock<Window> = OnceLock::new();
        CELL.get_or_init(Window::build)
    }

    /// Window value by cubic interpolation of the table.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        if x >= 0.5 {
            return 0.0;
        }
        let u = x * 2.0 * TABLE_SIZE as f64;
        let i = (u as usize).min(TABLE_SIZE - 1);
        let t = u - i as f64;
        let at = |j: i64| {
            let j = (i as i64 + j).clamp(0, TABLE_SIZE as i64) as usize;
            self.table[j]
        };
        let (p0, p1, p2, p3) = (at(-1), at(0), at(1), at(2));
        // Catmull-Rom spline through the four neighbors.
        let v = 0.5
            * (2.0 * p1
                + (p2 - p0) * t
                + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t
                + (3.0 * p1 - 3.0 * p2 + p3 - p0) * t * t * t);
        v.clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn indicator_bounds() {
        let w = Window::standard();
        for i in 0..=4000 {
            let x = -0.6 + 1.2 * i as f64 / 4000.0;
            let v = w.eval(x);
            assert!((0.0..=1.0).contains(&v));
            if x.abs() <= 0.25 {
                assert_eq!(v, 1.0, "x={x}");
            }
            if x.abs() >= 0.5 {
                assert_eq!(v, 0.0, "x={x}");
            }
        }
    }

    #[test]
    fn symmetry_and_monotone_shoulder() {
        let w = Window::standard();
        let mut last = 1.0;
        for i in 0..=1000 {
            let x = 0.25 + 0.25 * i as f64 / 1000.0;
            assert_eq!(w.eval(x), w.eval(-x));
            let v = w.eval(x);
            assert!(v <= last + 1e-12, "not decreasing at {x}");
            last = v;
        }
    }

    #[test]
    fn interpolation_matches_exact_formula() {
        let w = Window::standard();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100_000 {
            let x: f64 = rng.random_range(-0.55..0.55);
            assert!((w.eval(x) - exact(x)).abs() < 1e-10, "x={x}");
        }
    }
}
