//! Thin 2-D FFT helpers over rustfft.

use num_complex::Complex;
use rustfft::FftPlanner;

pub type C64 = Complex<f64>;

/// Blocked out-of-place transpose: `dst[j * rows + i] = src[i * cols + j]`.
pub fn transpose(src: &[C64], dst: &mut [C64], rows: usize, cols: usize) {
    const B: usize = 64;
    assert_eq!(src.len(), rows * cols);
    assert_eq!(dst.len(), rows * cols);
    for i0 in (0..rows).step_by(B) {
        for j0 in (0..cols).step_by(B) {
            for i in i0..(i0 + B).min(rows) {
                for j in j0..(j0 + B).min(cols) {
                    dst[j * rows + i] = src[i * cols + j];
                }
            }
        }
    }
}

/// Unnormalized 2-D inverse DFT of an `m1 x m2` array stored row-major with
/// the first index major (`buf[i1 * m2 + i2]`).
///
/// On return `buf` holds the transform with the SECOND index major
/// (`buf[j2 * m1 + j1]`); `scratch` is clobbered. `nonzero_rows`, when given,
/// lists the only `i1` rows that may contain nonzero input, letting the first
/// pass skip empty rows.
pub fn inverse_fft_2d(
    buf: &mut [C64],
    scratch: &mut [C64],
    m1: usize,
    m2: usize,
    nonzero_rows: Option<&[usize]>,
) {
    assert_eq!(buf.len(), m1 * m2);
    assert_eq!(scratch.len(), m1 * m2);
    let mut planner = FftPlanner::new();
    let fft2 = planner.plan_fft_inverse(m2);
    match nonzero_rows {
        Some(rows) => {
            for &i1 in rows {
                fft2.process(&mut buf[i1 * m2..(i1 + 1) * m2]);
            }
        }
        None => {
            for i1 in 0..m1 {
                fft2.process(&mut buf[i1 * m2..(i1 + 1) * m2]);
            }
        }
    }
    transpose(buf, scratch, m1, m2);
    let fft1 = planner.plan_fft_inverse(m1);
    for j2 in 0..m2 {
        fft1.process(&mut scratch[j2 * m1..(j2 + 1) * m1]);
    }
    buf.copy_from_slice(scratch);
}

/// Smallest power of two `>= x` (for a positive finite `x`).
pub fn next_pow2_at_least(x: f64) -> usize {
    let mut n = 1usize;
    while (n as f64) < x {
        n *= 2;
    }
    n
}
