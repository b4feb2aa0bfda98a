//! Transforms and multipliers against a naive O(N²) oracle written from the
//! defining sums with `f64::sin_cos`.

use kclose_core::operators::{harmonic_conjugate, riesz_neg, riesz_pos};
use kclose_core::{Axis, Complex64, GridDomain, GridFunction, Spectrum};
use std::f64::consts::TAU;

const TOL: f64 = 1e-12;

fn cis(t: f64) -> Complex64 {
    let (s, c) = t.sin_cos();
    Complex64::new(c, s)
}

/// Coefficient of frequency (k, l) over the symmetric window.
fn oracle_coeff(f: &[Complex64], m: usize, dim: usize, k: isize, l: isize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    if dim == 1 {
        for (j, v) in f.iter().enumerate() {
            acc += v * cis(-TAU * (k as f64) * (j as f64) / m as f64);
        }
        acc / m as f64
    } else {
        for j1 in 0..m {
            for j2 in 0..m {
                let t = (k as f64 * j1 as f64 + l as f64 * j2 as f64) / m as f64;
                acc += f[j1 * m + j2] * cis(-TAU * t);
            }
        }
        acc / (m * m) as f64
    }
}

fn oracle_synth(m: usize, dim: usize, coeff: impl Fn(isize, isize) -> Complex64) -> Vec<Complex64> {
    let half = (m / 2) as isize;
    let ks: Vec<isize> = (-half..half).collect();
    if dim == 1 {
        (0..m)
            .map(|j| ks.iter().map(|&k| coeff(k, 0) * cis(TAU * (k as f64) * j as f64 / m as f64)).sum())
            .collect()
    } else {
        let mut out = Vec::with_capacity(m * m);
        for j1 in 0..m {
            for j2 in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for &k in &ks {
                    for &l in &ks {
                        let t = (k as f64 * j1 as f64 + l as f64 * j2 as f64) / m as f64;
                        acc += coeff(k, l) * cis(TAU * t);
                    }
                }
                out.push(acc);
            }
        }
        out
    }
}

/// Small deterministic pseudo-random sequence, kept local so the oracle does
/// not depend on any crate under test.
fn lcg(seed: &mut u64) -> f64 {
    *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
}

fn random_samples(n: usize, seed: u64, real: bool) -> Vec<Complex64> {
    let mut s = seed;
    (0..n)
        .map(|_| {
            let re = lcg(&mut s);
            let im = if real { 0.0 } else { lcg(&mut s) };
            Complex64::new(re, im)
        })
        .collect()
}

fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn domains() -> Vec<GridDomain> {
    vec![
        GridDomain::circle(8).unwrap(),
        GridDomain::circle(16).unwrap(),
        GridDomain::torus(8).unwrap(),
        GridDomain::torus(16).unwrap(),
    ]
}

#[test]
fn spectrum_matches_oracle() {
    for (i, d) in domains().into_iter().enumerate() {
        let f = GridFunction::new(d, random_samples(d.len(), 11 + i as u64, false)).unwrap();
        let spec = f.to_spectrum();
        let mut worst: f64 = 0.0;
        for (k, l, c) in spec.iter() {
            let o = oracle_coeff(f.samples(), d.size(), d.dimension(), k, l);
            worst = worst.max((c - o).norm());
        }
        assert!(worst <= TOL, "M={} dim={} err={worst:e}", d.size(), d.dimension());
    }
}

#[test]
fn synthesis_matches_oracle() {
    for (i, d) in domains().into_iter().enumerate() {
        let coeffs = random_samples(d.len(), 101 + i as u64, false);
        let spec = Spectrum::new(d, coeffs).unwrap();
        let grid = spec.to_grid();
        let oracle = oracle_synth(d.size(), d.dimension(), |k, l| spec.coeff(k, l));
        assert!(max_err(grid.samples(), &oracle) <= TOL);
        let back = grid.to_spectrum();
        assert!(max_err(back.coeffs(), spec.coeffs()) <= TOL);
    }
}

fn oracle_multiplier(f: &GridFunction, axis: Axis, mult: impl Fn(isize) -> Complex64) -> Vec<Complex64> {
    let d = f.domain();
    let (m, dim) = (d.size(), d.dimension());
    oracle_synth(m, dim, |k, l| {
        let freq = if axis == Axis::First { k } else { l };
        oracle_coeff(f.samples(), m, dim, k, l) * mult(freq)
    })
}

#[test]
fn riesz_projections_match_oracle() {
    for (i, d) in domains().into_iter().enumerate() {
        let f = GridFunction::new(d, random_samples(d.len(), 201 + i as u64, false)).unwrap();
        let axes: &[Axis] = if d.dimension() == 1 { &[Axis::First] } else { &[Axis::First, Axis::Second] };
        for &axis in axes {
            let neg = oracle_multiplier(&f, axis, |k| Complex64::new(if k <= -1 { 1.0 } else { 0.0 }, 0.0));
            let pos = oracle_multiplier(&f, axis, |k| Complex64::new(if k >= 0 { 1.0 } else { 0.0 }, 0.0));
            assert!(max_err(riesz_neg(&f, axis).unwrap().samples(), &neg) <= TOL);
            assert!(max_err(riesz_pos(&f, axis).unwrap().samples(), &pos) <= TOL);
        }
    }
}

#[test]
fn harmonic_conjugate_matches_oracle() {
    for (i, d) in domains().into_iter().enumerate() {
        let u = GridFunction::new(d, random_samples(d.len(), 301 + i as u64, true)).unwrap();
        let nyq = -((d.size() / 2) as isize);
        let axes: &[Axis] = if d.dimension() == 1 { &[Axis::First] } else { &[Axis::First, Axis::Second] };
        for &axis in axes {
            let o = oracle_multiplier(&u, axis, |k| {
                if k == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -(k.signum() as f64))
                }
            });
            let h = harmonic_conjugate(&u, axis).unwrap();
            assert!(max_err(h.samples(), &o) <= TOL, "M={} axis={axis:?}", d.size());
        }
    }
}

#[test]
fn direct_module_agrees_with_oracle() {
    let d = GridDomain::torus(8).unwrap();
    let f = GridFunction::new(d, random_samples(d.len(), 7, false)).unwrap();
    let spec = kclose_core::direct::to_spectrum(&f);
    for (k, l, c) in spec.iter() {
        assert!((c - oracle_coeff(f.samples(), 8, 2, k, l)).norm() <= TOL);
    }
}
