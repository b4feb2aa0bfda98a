//! Spectral multipliers acting along one torus variable: harmonic
//! conjugation, the two Riesz projections, Fejér means, and the Fejér-based
//! witnesses `w = u∗K_n ± i(u∗K_n)~` whose real parts approximate a
//! nonnegative `u` from inside the right half-plane.
//!
//! On the bi-torus every operator acts in one named variable with the other
//! one frozen.

use alloc::format;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridDomain, GridFunction, Spectrum};

/// Absolute tolerance for "real-valued" and "nonnegative" checks.
pub const REAL_TOLERANCE: f64 = 1e-12;

/// Which torus variable an operator acts in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    First,
    Second,
}

impl Axis {
    /// 1-based index, matching the variable numbering `(z, w)`.
    pub fn index(self) -> usize {
        match self {
            Axis::First => 1,
            Axis::Second => 2,
        }
    }

    pub fn from_index(index: usize) -> Result<Self> {
        match index {
            1 => Ok(Axis::First),
            2 => Ok(Axis::Second),
            _ => Err(Error::Domain(format!("axis index must be 1 or 2, got {index}"))),
        }
    }

    pub fn check(self, domain: &GridDomain) -> Result<()> {
        if self.index() > domain.dimension() {
            Err(Error::Domain(format!(
                "axis {} does not exist on a {}-dimensional grid",
                self.index(),
                domain.dimension()
            )))
        } else {
            Ok(())
        }
    }

    /// The frequency this axis sees in the pair `(k, l)`.
    pub fn select(self, k: isize, l: isize) -> isize {
        match self {
            Axis::First => k,
            Axis::Second => l,
        }
    }
}

/// Spectral side of an algebra element along an axis: analytic means
/// frequencies `≥ 0`, anti-analytic means `≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Analytic,
    AntiAnalytic,
}

impl Side {
    pub fn conjugate(self) -> Side {
        match self {
            Side::Analytic => Side::AntiAnalytic,
            Side::AntiAnalytic => Side::Analytic,
        }
    }

    /// Whether frequency `k` is allowed on this side.
    pub fn admits(self, k: isize) -> bool {
        match self {
            Side::Analytic => k >= 0,
            Side::AntiAnalytic => k <= 0,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Side::Analytic => 1.0,
            Side::AntiAnalytic => -1.0,
        }
    }
}

/// Applies the one-variable multiplier `m(k)` along `axis`.
pub fn apply_multiplier<F: Fn(isize) -> Complex64>(
    f: &GridFunction,
    axis: Axis,
    m: F,
) -> Result<GridFunction> {
    axis.check(f.domain())?;
    let s: Spectrum = f.to_spectrum().multiply(|k, l| m(axis.select(k, l)));
    Ok(s.to_grid())
}

fn require_real(u: &GridFunction, what: &str) -> Result<()> {
    let im = u.max_imag_abs();
    if im > REAL_TOLERANCE {
        return Err(Error::Precondition(format!(
            "{what} needs a real-valued input, max |Im| = {im:e}"
        )));
    }
    Ok(())
}

/// Harmonic conjugate `ũ`: multiplier `-i·sgn(k)` along `axis`.
///
/// The Nyquist mode `k = -M/2` has no partner inside the window and is
/// annihilated, which keeps the output real.
pub fn harmonic_conjugate(u: &GridFunction, axis: Axis) -> Result<GridFunction> {
    require_real(u, "harmonic conjugation")?;
    let nyquist = u.domain().nyquist();
    let out = apply_multiplier(&u.real_part(), axis, |k| {
        if k == 0 || k == nyquist {
            Complex64::new(0.0, 0.0)
        } else if k > 0 {
            Complex64::new(0.0, -1.0)
        } else {
            Complex64::new(0.0, 1.0)
        }
    })?;
    Ok(out.real_part())
}

/// Negative Riesz projection: keeps frequencies `k ≤ -1` along `axis`.
pub fn riesz_neg(f: &GridFunction, axis: Axis) -> Result<GridFunction> {
    apply_multiplier(f, axis, |k| Complex64::new(if k <= -1 { 1.0 } else { 0.0 }, 0.0))
}

/// Riesz projection: keeps frequencies `k ≥ 0` along `axis`.
pub fn riesz_pos(f: &GridFunction, axis: Axis) -> Result<GridFunction> {
    apply_multiplier(f, axis, |k| Complex64::new(if k >= 0 { 1.0 } else { 0.0 }, 0.0))
}

/// Fejér multiplier `max(0, 1 - |k|/(n+1))`.
pub fn fejer_weight(k: isize, n: usize) -> f64 {
    (1.0 - k.unsigned_abs() as f64 / (n as f64 + 1.0)).max(0.0)
}

/// Largest Fejér degree a grid supports without folding the kernel.
pub fn max_fejer_degree(domain: &GridDomain) -> usize {
    domain.size() / 2 - 1
}

/// Fejér mean `u ∗ K_n` along `axis`.
pub fn fejer_smooth(u: &GridFunction, n: usize, axis: Axis) -> Result<GridFunction> {
    let max = max_fejer_degree(u.domain());
    if n == 0 || n > max {
        return Err(Error::Domain(format!(
            "Fejér degree must lie in 1..={max} on this grid, got {n}"
        )));
    }
    let real_input = u.is_real(0.0);
    let out = apply_multiplier(u, axis, |k| Complex64::new(fejer_weight(k, n), 0.0))?;
    Ok(if real_input { out.real_part() } else { out })
}

/// `w = u∗K_n + i(u∗K_n)~` (analytic) or `u∗K_n - i(u∗K_n)~`
/// (anti-analytic). `Re w` is exactly the Fejér mean, which is nonnegative
/// whenever `u` is.
pub fn alpha_witness(u: &GridFunction, n: usize, side: Side, axis: Axis) -> Result<GridFunction> {
    require_real(u, "alpha witness")?;
    let min = u.samples().iter().fold(f64::INFINITY, |m, z| m.min(z.re));
    if min < -REAL_TOLERANCE {
        return Err(Error::Precondition(format!(
            "alpha witness needs a nonnegative input, min = {min:e}"
        )));
    }
    let smooth = fejer_smooth(&u.real_part(), n, axis)?;
    let conj = harmonic_conjugate(&smooth, axis)?;
    let sign = side.sign();
    smooth.zip_with(&conj, |s, h| Complex64::new(s.re, sign * h.re))
}

/// Relative `ℓ²` spectral mass of `f` outside `side` along `axis`; zero for
/// the zero function.
pub fn half_line_residual(f: &GridFunction, side: Side, axis: Axis) -> Result<f64> {
    axis.check(f.domain())?;
    let s = f.to_spectrum();
    let mut outside = 0.0;
    let mut total = 0.0;
    for (k, l, c) in s.iter() {
        let e = c.norm_sqr();
        total += e;
        if !side.admits(axis.select(k, l)) {
            outside += e;
        }
    }
    Ok(if total == 0.0 { 0.0 } else { libm::sqrt(outside / total) })
}
