//! Numerical laboratory for the L^4 reverse square function estimate on
//! degenerate curves (xi, |xi|^a) and its consequences: sharp loss exponents,
//! Minkowski-sum overlap counts, sublevel-set measures, wave-packet
//! extremizers, fractional torus Strichartz norms, and bilinear/orthogonal
//! Strichartz functionals.
//!
//! All field-level claims are made about the discrete periodic model: the
//! frequency lattice defines a torus and every norm is an exact quadrature of
//! the corresponding trigonometric polynomial on that torus.

pub mod bilinear;
pub mod calibration;
pub mod curve;
pub mod error;
pub mod fft;
pub mod field;
pub mod fit;
pub mod interval;
pub mod quadruples;
pub mod sublevel;
pub mod torus;
pub mod window;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
