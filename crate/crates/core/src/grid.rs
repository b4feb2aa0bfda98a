//! Uniform grids over `𝕋` and `𝕋²`, sampled functions, and their spectra.
//!
//! Sample `j` sits at angle `2πj/M` along each axis. Two-dimensional samples
//! are stored row-major with the first variable as the row index. The
//! measure is normalized so that quadrature is the arithmetic mean.
//!
//! Spectra are stored over the symmetric window `[-M/2, M/2)` per axis, so a
//! coefficient `ĉ(k)` lives at offset `k + M/2`. Half-line masks are then
//! contiguous index ranges.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A uniform grid on the circle (`dimension == 1`) or the bi-torus
/// (`dimension == 2`) with `M` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridDomain {
    dimension: usize,
    size: usize,
}

impl GridDomain {
    pub const MIN_SIZE: usize = 8;

    pub fn new(dimension: usize, size: usize) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::Domain(format!(
                "grid dimension must be 1 or 2, got {dimension}"
            )));
        }
        if size < Self::MIN_SIZE || !size.is_power_of_two() {
            return Err(Error::Domain(format!(
                "grid size must be a power of two and at least {}, got {size}",
                Self::MIN_SIZE
            )));
        }
        Ok(Self { dimension, size })
    }

    pub fn circle(size: usize) -> Result<Self> {
        Self::new(1, size)
    }

    pub fn torus(size: usize) -> Result<Self> {
        Self::new(2, size)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Points per axis.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Total number of samples, `M^d`.
    pub fn len(&self) -> usize {
        if self.dimension == 1 {
            self.size
        } else {
            self.size * self.size
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mass of a single grid cell: `1/M` or `1/M²`.
    pub fn measure_weight(&self) -> f64 {
        1.0 / self.len() as f64
    }

    /// Angle of grid index `j` along one axis.
    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.size as f64
    }

    /// Integral against the normalized measure.
    pub fn quadrature<I: IntoIterator<Item = f64>>(&self, values: I) -> f64 {
        values.into_iter().sum::<f64>() / self.len() as f64
    }

    /// Frequencies of the symmetric window along one axis.
    pub fn frequencies(&self) -> impl Iterator<Item = isize> + Clone {
        let half = (self.size / 2) as isize;
        -half..half
    }

    pub fn nyquist(&self) -> isize {
        -((self.size / 2) as isize)
    }

    /// Storage offset of frequency `k` inside the window; `None` outside it.
    pub fn frequency_offset(&self, k: isize) -> Option<usize> {
        let half = (self.size / 2) as isize;
        if (-half..half).contains(&k) {
            Some((k + half) as usize)
        } else {
            None
        }
    }

    pub(crate) fn check_same(&self, other: &GridDomain) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }
}

/// `e^{2πi j/m}` with the index reduced first, so equal residues give
/// bit-identical samples.
pub fn unit_root(m: usize, j: i64) -> Complex64 {
    let r = j.rem_euclid(m as i64) as usize;
    // Exact values on the axes.
    if 4 * r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 4 * r == m {
        return Complex64::new(0.0, 1.0);
    }
    if 2 * r == m {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * r == 3 * m {
        return Complex64::new(0.0, -1.0);
    }
    let t = 2.0 * PI * r as f64 / m as f64;
    Complex64::new(libm::cos(t), libm::sin(t))
}

/// Pointwise operations on grid functions. Binary variants carry their
/// second operand.
#[derive(Debug, Clone, Copy)]
pub enum Pointwise<'a> {
    Add(&'a GridFunction),
    Sub(&'a GridFunction),
    Mul(&'a GridFunction),
    Div(&'a GridFunction),
    Abs,
    /// `min{λ, |f|}` (real-valued).
    MinWith(f64),
    /// `f/|f|` with `0/0 = 0`.
    Sgn,
}

/// `z/|z|`, with `sgn 0 = 0`.
pub fn sgn(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        ZERO
    } else {
        z / r
    }
}

/// Complex samples on a [`GridDomain`]; the discrete stand-in for an element
/// of `L^p(μ)`. Samples are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: GridDomain,
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(domain: GridDomain, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != domain.len() {
            return Err(Error::SizeMismatch {
                expected: domain.len(),
                actual: samples.len(),
            });
        }
        if let Some(index) = samples.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { domain, samples })
    }

    /// Construction for values already known to be finite and of the right
    /// length.
    pub(crate) fn from_parts(domain: GridDomain, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), domain.len());
        Self { domain, samples }
    }

    pub fn from_real(domain: GridDomain, values: Vec<f64>) -> Result<Self> {
        Self::new(domain, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(domain: GridDomain, c: Complex64) -> Self {
        Self::from_parts(domain, alloc::vec![c; domain.len()])
    }

    pub fn zeros(domain: GridDomain) -> Self {
        Self::constant(domain, ZERO)
    }

    /// Samples `f(θ)` on a one-dimensional grid.
    pub fn from_fn_1d<F: Fn(f64) -> Complex64>(domain: GridDomain, f: F) -> Result<Self> {
        if domain.dimension() != 1 {
            return Err(Error::Domain("from_fn_1d needs a one-dimensional grid".into()));
        }
        Self::new(domain, (0..domain.size()).map(|j| f(domain.angle(j))).collect())
    }

    /// Samples `f(θ₁, θ₂)` on a two-dimensional grid.
    pub fn from_fn_2d<F: Fn(f64, f64) -> Complex64>(domain: GridDomain, f: F) -> Result<Self> {
        if domain.dimension() != 2 {
            return Err(Error::Domain("from_fn_2d needs a two-dimensional grid".into()));
        }
        let m = domain.size();
        let mut samples = Vec::with_capacity(m * m);
        for j1 in 0..m {
            for j2 in 0..m {
                samples.push(f(domain.angle(j1), domain.angle(j2)));
            }
        }
        Self::new(domain, samples)
    }

    /// Exact samples of `z^k` (1D) or `z^k w^l` (2D).
    pub fn monomial(domain: GridDomain, k: i64, l: i64) -> Self {
        let m = domain.size();
        let samples = if domain.dimension() == 1 {
            (0..m).map(|j| unit_root(m, k * j as i64)).collect()
        } else {
            let mut out = Vec::with_capacity(m * m);
            for j1 in 0..m {
                for j2 in 0..m {
                    out.push(unit_root(m, k * j1 as i64 + l * j2 as i64));
                }
            }
            out
        };
        Self::from_parts(domain, samples)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.max_imag_abs() <= tol
    }

    pub fn real_part(&self) -> GridFunction {
        self.map_unchecked(|z| Complex64::new(z.re, 0.0))
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.re).collect()
    }

    pub fn conj(&self) -> GridFunction {
        self.map_unchecked(|z| z.conj())
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        self.map_unchecked(|z| z * c)
    }

    pub fn scale_real(&self, c: f64) -> GridFunction {
        self.map_unchecked(|z| z * c)
    }

    /// `max |f|`.
    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.len() as f64
    }

    /// `max_j |f_j - g_j|`.
    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        self.domain.check_same(&other.domain)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// Applies `f` to each sample; the result must stay finite.
    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Result<GridFunction> {
        GridFunction::new(self.domain, self.samples.iter().map(|&z| f(z)).collect())
    }

    pub(crate) fn map_unchecked<F: Fn(Complex64) -> Complex64>(&self, f: F) -> GridFunction {
        GridFunction::from_parts(self.domain, self.samples.iter().map(|&z| f(z)).collect())
    }

    pub fn zip_with<F: Fn(Complex64, Complex64) -> Complex64>(
        &self,
        other: &GridFunction,
        f: F,
    ) -> Result<GridFunction> {
        self.domain.check_same(&other.domain)?;
        GridFunction::new(
            self.domain,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn abs(&self) -> GridFunction {
        self.map_unchecked(|z| Complex64::new(z.norm(), 0.0))
    }

    pub fn sgn(&self) -> GridFunction {
        self.map_unchecked(sgn)
    }

    pub fn pointwise(&self, op: Pointwise<'_>) -> Result<GridFunction> {
        match op {
            Pointwise::Add(g) => self.add(g),
            Pointwise::Sub(g) => self.sub(g),
            Pointwise::Mul(g) => self.mul(g),
            Pointwise::Div(g) => {
                self.domain.check_same(&g.domain)?;
                if let Some(index) = g.samples.iter().position(|z| z.re == 0.0 && z.im == 0.0) {
                    return Err(Error::Singularity { index });
                }
                self.zip_with(g, |a, b| a / b)
            }
            Pointwise::Abs => Ok(self.abs()),
            Pointwise::MinWith(lambda) => {
                if lambda.is_nan() {
                    return Err(Error::Domain("scalar for min must not be NaN".into()));
                }
                self.map(|z| Complex64::new(z.norm().min(lambda), 0.0))
            }
            Pointwise::Sgn => Ok(self.sgn()),
        }
    }

    pub fn to_spectrum(&self) -> Spectrum {
        to_spectrum(self)
    }
}

/// Fourier coefficients over the symmetric frequency window.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    domain: GridDomain,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    /// `coeffs` in window order: offset `k + M/2` (1D) or
    /// `(k + M/2)·M + (l + M/2)` (2D).
    pub fn new(domain: GridDomain, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != domain.len() {
            return Err(Error::SizeMismatch {
                expected: domain.len(),
                actual: coeffs.len(),
            });
        }
        if let Some(index) = coeffs.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { domain, coeffs })
    }

    pub fn zeros(domain: GridDomain) -> Self {
        Self {
            domain,
            coeffs: alloc::vec![ZERO; domain.len()],
        }
    }

    /// Builds a spectrum from `c(k, l)`; `l` is always 0 in 1D.
    pub fn from_fn<F: Fn(isize, isize) -> Complex64>(domain: GridDomain, f: F) -> Result<Self> {
        let coeffs = if domain.dimension() == 1 {
            domain.frequencies().map(|k| f(k, 0)).collect()
        } else {
            let mut out = Vec::with_capacity(domain.len());
            for k in domain.frequencies() {
                for l in domain.frequencies() {
                    out.push(f(k, l));
                }
            }
            out
        };
        Self::new(domain, coeffs)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn offset(&self, k: isize, l: isize) -> Option<usize> {
        let ok = self.domain.frequency_offset(k)?;
        if self.domain.dimension() == 1 {
            (l == 0).then_some(ok)
        } else {
            let ol = self.domain.frequency_offset(l)?;
            Some(ok * self.domain.size() + ol)
        }
    }

    /// `ĉ(k)` in 1D or `ĉ(k, l)` in 2D; zero outside the window.
    pub fn coeff(&self, k: isize, l: isize) -> Complex64 {
        self.offset(k, l).map_or(ZERO, |o| self.coeffs[o])
    }

    pub fn set(&mut self, k: isize, l: isize, c: Complex64) -> Result<()> {
        let o = self
            .offset(k, l)
            .ok_or_else(|| Error::Domain(format!("frequency ({k}, {l}) outside the window")))?;
        self.coeffs[o] = c;
        Ok(())
    }

    /// `(k, l, ĉ)` triples in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (isize, isize, Complex64)> + '_ {
        let m = self.domain.size();
        let half = (m / 2) as isize;
        let two_d = self.domain.dimension() == 2;
        self.coeffs.iter().enumerate().map(move |(i, &c)| {
            if two_d {
                ((i / m) as isize - half, (i % m) as isize - half, c)
            } else {
                (i as isize - half, 0, c)
            }
        })
    }

    /// Multiplies every coefficient by `m(k, l)`.
    pub fn multiply<F: Fn(isize, isize) -> Complex64>(&self, m: F) -> Spectrum {
        let coeffs = self.iter().map(|(k, l, c)| c * m(k, l)).collect();
        Spectrum {
            domain: self.domain,
            coeffs,
        }
    }

    /// `Σ |ĉ|²`, which equals `‖f‖₂²` by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `ĉ(-k) = conj ĉ(k)` for every frequency, with `-k` taken modulo `M`.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        let m = self.domain.size() as isize;
        let neg = |k: isize| {
            let r = (-k).rem_euclid(m);
            if r >= m / 2 {
                r - m
            } else {
                r
            }
        };
        self.iter()
            .all(|(k, l, c)| (self.coeff(neg(k), if self.domain.dimension() == 2 { neg(l) } else { 0 }) - c.conj()).norm() <= tol)
    }

    pub fn to_grid(&self) -> GridFunction {
        from_spectrum(self)
    }
}

fn rotate_half(data: &mut [Complex64], m: usize, dimension: usize) {
    if dimension == 1 {
        data.rotate_left(m / 2);
    } else {
        for row in data.chunks_exact_mut(m) {
            row.rotate_left(m / 2);
        }
        data.rotate_left(m / 2 * m);
    }
}

/// `ĉ(k) = (1/M) Σ_j f(x_j) e^{-ikx_j}` per axis.
pub fn to_spectrum(f: &GridFunction) -> Spectrum {
    let d = f.domain;
    let m = d.size();
    let mut data = f.samples.clone();
    if d.dimension() == 1 {
        fft::transform(&mut data, false);
    } else {
        fft::transform_2d(&mut data, m, false);
    }
    let scale = 1.0 / d.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    rotate_half(&mut data, m, d.dimension());
    Spectrum {
        domain: d,
        coeffs: data,
    }
}

/// `f(x_j) = Σ_k ĉ(k) e^{ikx_j}`.
pub fn from_spectrum(s: &Spectrum) -> GridFunction {
    let d = s.domain;
    let m = d.size();
    let mut data = s.coeffs.clone();
    // Undo the window shift: rotate right by M/2 along every axis.
    if d.dimension() == 1 {
        data.rotate_right(m / 2);
        fft::transform(&mut data, true);
    } else {
        for row in data.chunks_exact_mut(m) {
            row.rotate_right(m / 2);
        }
        data.rotate_right(m / 2 * m);
        fft::transform_2d(&mut data, m, true);
    }
    GridFunction::from_parts(d, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn domain_rejects_bad_sizes() {
        assert!(GridDomain::circle(4).is_err());
        assert!(GridDomain::circle(24).is_err());
        assert!(GridDomain::new(3, 8).is_err());
        assert!(GridDomain::torus(16).is_ok());
    }

    #[test]
    fn quadrature_of_one_is_exactly_one() {
        for m in [8, 64, 1024] {
            let d = GridDomain::circle(m).unwrap();
            assert_eq!(d.quadrature(core::iter::repeat_n(1.0, d.len())), 1.0);
            let d2 = GridDomain::torus(m.min(64)).unwrap();
            assert_eq!(d2.quadrature(core::iter::repeat_n(1.0, d2.len())), 1.0);
        }
    }

    #[test]
    fn constant_has_only_mean_coefficient() {
        let d = GridDomain::circle(16).unwrap();
        let s = GridFunction::constant(d, c(1.0, 0.0)).to_spectrum();
        for (k, _, v) in s.iter() {
            let expect = if k == 0 { 1.0 } else { 0.0 };
            assert!((v - c(expect, 0.0)).norm() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn single_modes_round_trip() {
        let d = GridDomain::circle(32).unwrap();
        let s = GridFunction::monomial(d, 1, 0).to_spectrum();
        assert!((s.coeff(1, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(s.energy() - 1.0 < 1e-14);

        let mut only_minus_one = Spectrum::zeros(d);
        only_minus_one.set(-1, 0, c(1.0, 0.0)).unwrap();
        let g = only_minus_one.to_grid();
        let expect = GridFunction::monomial(d, -1, 0);
        assert!(g.max_abs_diff(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn two_dimensional_mode_lands_on_its_pair() {
        let d = GridDomain::torus(16).unwrap();
        let s = GridFunction::monomial(d, -1, 3).to_spectrum();
        assert!((s.coeff(-1, 3) - c(1.0, 0.0)).norm() < 1e-14);
        assert!((s.energy() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn sgn_follows_zero_over_zero_convention() {
        assert_eq!(sgn(c(0.0, 0.0)), c(0.0, 0.0));
        assert_eq!(sgn(c(-2.0, 0.0)), c(-1.0, 0.0));
        assert_eq!(sgn(c(0.0, 3.0)), c(0.0, 1.0));
    }

    #[test]
    fn truncation_of_a_constant() {
        let d = GridDomain::circle(8).unwrap();
        let f = GridFunction::constant(d, c(3.0, 0.0));
        let t = f
            .pointwise(Pointwise::MinWith(1.0))
            .unwrap()
            .mul(&f.pointwise(Pointwise::Sgn).unwrap())
            .unwrap();
        assert!(t.samples().iter().all(|&z| z == c(1.0, 0.0)));
    }

    #[test]
    fn division_by_zero_names_the_index() {
        let d = GridDomain::circle(8).unwrap();
        let mut vals = vec![c(1.0, 0.0); 8];
        vals[5] = c(0.0, 0.0);
        let g = GridFunction::new(d, vals).unwrap();
        let f = GridFunction::constant(d, c(1.0, 0.0));
        assert_eq!(f.pointwise(Pointwise::Div(&g)), Err(Error::Singularity { index: 5 }));
    }

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        let d = GridDomain::circle(8).unwrap();
        assert!(matches!(
            GridFunction::new(d, vec![c(0.0, 0.0); 7]),
            Err(Error::SizeMismatch { expected: 8, actual: 7 })
        ));
        let mut v = vec![c(0.0, 0.0); 8];
        v[2] = c(f64::NAN, 0.0);
        assert_eq!(GridFunction::new(d, v), Err(Error::NonFinite { index: 2 }));
    }

    #[test]
    fn mismatched_domains_are_rejected() {
        let a = GridFunction::zeros(GridDomain::circle(8).unwrap());
        let b = GridFunction::zeros(GridDomain::circle(16).unwrap());
        assert_eq!(a.add(&b), Err(Error::DomainMismatch));
    }

    #[test]
    fn real_function_has_conjugate_symmetric_spectrum() {
        let d = GridDomain::torus(8).unwrap();
        let f = GridFunction::from_fn_2d(d, |a, b| c(libm::cos(a + 2.0 * b) + libm::sin(3.0 * a), 0.0)).unwrap();
        assert!(f.to_spectrum().is_conjugate_symmetric(1e-14));
        let g = GridFunction::monomial(d, 1, 0);
        assert!(!g.to_spectrum().is_conjugate_symmetric(1e-14));
    }
}
