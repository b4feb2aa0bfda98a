//! Direct-summation Fourier transforms, `O(M²)` per axis.
//!
//! These share no code with the fast transforms and back the certificate
//! checker in [`crate::kclose::verify_report`].

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::grid::{unit_root, GridFunction, Spectrum};

/// One axis of `out[k] = scale · Σ_j x[j] e^{sign·2πi jk/M}` over the symmetric
/// window, `k = -M/2 .. M/2`.
fn axis_sum(x: &[Complex64], roots: &[Complex64], sign: i64, scale: f64, to_window: bool) -> Vec<Complex64> {
    let m = x.len();
    let half = (m / 2) as i64;
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); m];
    for (o, slot) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &v) in x.iter().enumerate() {
            // With `to_window` the output index is a frequency; otherwise the
            // input index is.
            let (k, j) = if to_window {
                (o as i64 - half, i as i64)
            } else {
                (i as i64 - half, o as i64)
            };
            let idx = (sign * k * j).rem_euclid(m as i64) as usize;
            acc += v * roots[idx];
        }
        *slot = acc * scale;
    }
    out
}

fn roots(m: usize) -> Vec<Complex64> {
    (0..m as i64).map(|j| unit_root(m, j)).collect()
}

fn separable(data: &[Complex64], m: usize, two_d: bool, sign: i64, scale: f64, to_window: bool) -> Vec<Complex64> {
    let r = roots(m);
    if !two_d {
        return axis_sum(data, &r, sign, scale, to_window);
    }
    let mut rows: Vec<Complex64> = Vec::with_capacity(m * m);
    for row in data.chunks_exact(m) {
        rows.extend(axis_sum(row, &r, sign, scale, to_window));
    }
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); m * m];
    let mut column = alloc::vec![Complex64::new(0.0, 0.0); m];
    for c in 0..m {
        for i in 0..m {
            column[i] = rows[i * m + c];
        }
        let t = axis_sum(&column, &r, sign, scale, to_window);
        for i in 0..m {
            out[i * m + c] = t[i];
        }
    }
    out
}

pub fn to_spectrum(f: &GridFunction) -> Spectrum {
    let d = *f.domain();
    let m = d.size();
    let coeffs = separable(f.samples(), m, d.dimension() == 2, -1, 1.0 / m as f64, true);
    Spectrum::new(d, coeffs).expect("direct transform of finite samples is finite")
}

pub fn from_spectrum(s: &Spectrum) -> GridFunction {
    let d = *s.domain();
    let m = d.size();
    let samples = separable(s.coeffs(), m, d.dimension() == 2, 1, 1.0, false);
    GridFunction::new(d, samples).expect("direct transform of finite coefficients is finite")
}
