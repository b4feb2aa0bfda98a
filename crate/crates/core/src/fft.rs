//! Iterative radix-2 transforms. Unnormalized in both directions.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

/// `e^{-2πi j/n}` for `j < n/2`, each entry evaluated directly so no error
/// accumulates along the table.
fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n / 2)
        .map(|j| {
            let t = -2.0 * PI * j as f64 / n as f64;
            Complex64::new(libm::cos(t), libm::sin(t))
        })
        .collect()
}

fn bit_reverse(data: &mut [Complex64]) {
    let n = data.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
}

fn transform_with(data: &mut [Complex64], table: &[Complex64], inverse: bool) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }
    bit_reverse(data);
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let mut w = table[k * stride];
                if inverse {
                    w = w.conj();
                }
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// `X[k] = Σ_j x[j] e^{∓2πi jk/n}`; the sign is `+` when `inverse`.
pub(crate) fn transform(data: &mut [Complex64], inverse: bool) {
    let table = twiddles(data.len());
    transform_with(data, &table, inverse);
}

/// Row-column transform of an `m × m` row-major array.
pub(crate) fn transform_2d(data: &mut [Complex64], m: usize, inverse: bool) {
    let table = twiddles(m);
    for row in data.chunks_exact_mut(m) {
        transform_with(row, &table, inverse);
    }
    let mut column = alloc::vec![Complex64::new(0.0, 0.0); m];
    for c in 0..m {
        for r in 0..m {
            column[r] = data[r * m + c];
        }
        transform_with(&mut column, &table, inverse);
        for r in 0..m {
            data[r * m + c] = column[r];
        }
    }
}
