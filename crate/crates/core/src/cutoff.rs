//! Analytic cut-off functions.
//!
//! Given a real `φ ≥ 1`, put `u = φ - 1`, take the Fejér witness `w` of `u`
//! in the requested algebra, and set `Φ = (1 + w)^{-γ}`. Because
//! `Re(1 + w) ≥ 1` pointwise, `|Φ| ≤ (1 + Re w)^{-γ} ≤ 1` holds at every
//! grid point exactly, and `Φ` is small wherever `φ` is large.

use alloc::format;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::metrics::lp_norm;
use crate::operators::{alpha_witness, fejer_smooth, half_line_residual, Axis, Side, REAL_TOLERANCE};

/// Degree of the Fejér mean behind the witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    Fixed(usize),
    /// Start at 16 and double until `‖Re w_n - u‖_p ≤ 1%·‖u‖_p` or
    /// `n = M/ADAPTIVE_CAP_DIVISOR`. If `Φ` then leaks more than
    /// `ADAPTIVE_ALGEBRA_TARGET` out of its algebra, halve `n` until it does
    /// not, keeping the least leaky degree seen.
    Adaptive,
}

pub const ADAPTIVE_START: usize = 16;
pub const ADAPTIVE_TOLERANCE: f64 = 0.01;
/// Past `M/16` the aliased tail of `(1 + w)^{-γ}` is no longer negligible
/// for kinked `φ`: at `n = M/8` the half-line leakage of `Φ` reaches `1e-7`
/// on `M = 1024`.
pub const ADAPTIVE_CAP_DIVISOR: usize = 16;
/// Half-line leakage of `Φ` above which the adaptive rule tries lower degrees.
pub const ADAPTIVE_ALGEBRA_TARGET: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffParams {
    pub gamma: u32,
    pub p: f64,
    pub smoothing: Smoothing,
    pub side: Side,
    pub axis: Axis,
}

/// Smallest integer strictly greater than `p`, and never below 2.
pub fn gamma_for(p: f64) -> u32 {
    let g = libm::floor(p) + 1.0;
    (g as u32).max(2)
}

impl CutoffParams {
    /// Adaptive smoothing with the minimal admissible `γ` for `p`.
    pub fn for_exponent(p: f64, side: Side, axis: Axis) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self {
            gamma: gamma_for(p),
            p,
            smoothing: Smoothing::Adaptive,
            side,
            axis,
        })
    }

    pub fn with_smoothing(self, smoothing: Smoothing) -> Self {
        Self { smoothing, ..self }
    }

    pub fn validate(&self, domain: &crate::grid::GridDomain) -> Result<()> {
        check_exponent(self.p)?;
        if self.gamma < 2 {
            return Err(Error::Domain(format!("γ must be at least 2, got {}", self.gamma)));
        }
        self.axis.check(domain)?;
        if let Smoothing::Fixed(n) = self.smoothing {
            let max = crate::operators::max_fejer_degree(domain);
            if n == 0 || n > max {
                return Err(Error::Domain(format!(
                    "smoothing degree must lie in 1..={max}, got {n}"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(p > 1.0 && p < f64::INFINITY) {
        return Err(Error::Domain(format!("exponent must lie in (1, ∞), got {p}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffResult {
    /// `Φ = (1 + w)^{-γ}`.
    pub phi: GridFunction,
    /// The Fejér witness `w`.
    pub witness: GridFunction,
    pub degree: usize,
    /// `‖1 - Φ‖_p / ‖1 - φ‖_p`, with `0/0` reported as 0.
    pub o1_ratio: f64,
    /// `min_j [(1 + Re w_j)^{-γ} - |Φ_j|]`.
    pub pointwise_slack: f64,
    /// Spectral leakage of `Φ` outside the algebra's half-line.
    pub algebra_residual: f64,
    /// `false` when adaptive smoothing hit its cap before reaching its
    /// accuracy target.
    pub converged: bool,
}

/// `(1 + w)^{-γ}` sample by sample.
pub fn reciprocal_power(w: &GridFunction, gamma: u32) -> GridFunction {
    w.map_unchecked(|v| {
        let inv = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) + v);
        let mut acc = inv;
        for _ in 1..gamma {
            acc *= inv;
        }
        acc
    })
}

/// `min_j [(1 + Re w_j)^{-γ} - |Φ_j|]`.
pub fn pointwise_slack(phi: &GridFunction, witness: &GridFunction, gamma: u32) -> f64 {
    phi.samples()
        .iter()
        .zip(witness.samples())
        .fold(f64::INFINITY, |m, (f, w)| {
            m.min(libm::pow(1.0 + w.re, -(gamma as f64)) - f.norm())
        })
}

fn choose_degree(u: &GridFunction, params: &CutoffParams) -> Result<(usize, bool)> {
    let domain = u.domain();
    match params.smoothing {
        Smoothing::Fixed(n) => Ok((n, true)),
        Smoothing::Adaptive => {
            let cap = (domain.size() / ADAPTIVE_CAP_DIVISOR).max(1);
            let target = ADAPTIVE_TOLERANCE * lp_norm(u, params.p)?;
            let mut n = ADAPTIVE_START.min(cap);
            loop {
                let smooth = fejer_smooth(u, n, params.axis)?;
                let err = lp_norm(&smooth.sub(u)?, params.p)?;
                if err <= target {
                    return Ok((n, true));
                }
                if n >= cap {
                    return Ok((n, false));
                }
                n = (2 * n).min(cap);
            }
        }
    }
}

/// Builds `Φ` in the algebra described by `params.side`/`params.axis` from a
/// real `φ ≥ 1`.
pub fn build_cutoff(phi: &GridFunction, params: &CutoffParams) -> Result<CutoffResult> {
    params.validate(phi.domain())?;
    let im = phi.max_imag_abs();
    if im > REAL_TOLERANCE {
        return Err(Error::Precondition(format!("φ must be real, max |Im| = {im:e}")));
    }
    let min = phi.samples().iter().fold(f64::INFINITY, |m, z| m.min(z.re));
    if min < 1.0 - REAL_TOLERANCE {
        return Err(Error::Precondition(format!("φ must be at least 1, min = {min}")));
    }
    // Samples within tolerance below 1 are treated as 1.
    let u = phi.map_unchecked(|z| Complex64::new((z.re - 1.0).max(0.0), 0.0));
    let (first, mut converged) = choose_degree(&u, params)?;
    let build = |n: usize| -> Result<(usize, GridFunction, GridFunction, f64)> {
        let witness = alpha_witness(&u, n, params.side, params.axis)?;
        let cut = reciprocal_power(&witness, params.gamma);
        let leak = half_line_residual(&cut, params.side, params.axis)?;
        Ok((n, witness, cut, leak))
    };
    let mut best = build(first)?;
    if params.smoothing == Smoothing::Adaptive {
        // Leakage is not monotone in n: a very low degree on a tall φ decays
        // slowly too. Keep the least leaky candidate.
        let mut n = first;
        while best.3 > ADAPTIVE_ALGEBRA_TARGET && n > 1 {
            n /= 2;
            let next = build(n)?;
            if next.3 < best.3 {
                best = next;
            }
        }
        converged &= best.0 == first;
    }
    let (degree, witness, cut, algebra_residual) = best;

    let one_minus_cut = cut.map_unchecked(|v| Complex64::new(1.0, 0.0) - v);
    let num = lp_norm(&one_minus_cut, params.p)?;
    let den = lp_norm(&u, params.p)?;
    let o1_ratio = if den == 0.0 { 0.0 } else { num / den };
    let slack = pointwise_slack(&cut, &witness, params.gamma);

    Ok(CutoffResult {
        phi: cut,
        witness,
        degree,
        o1_ratio,
        pointwise_slack: slack,
        algebra_residual,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDomain;

    fn params(gamma: u32, p: f64) -> CutoffParams {
        CutoffParams {
            gamma,
            p,
            smoothing: Smoothing::Adaptive,
            side: Side::Analytic,
            axis: Axis::First,
        }
    }

    #[test]
    fn gamma_is_smallest_integer_above_p() {
        assert_eq!(gamma_for(4.0 / 3.0), 2);
        assert_eq!(gamma_for(1.01), 2);
        assert_eq!(gamma_for(2.0), 3);
        assert_eq!(gamma_for(2.5), 3);
        assert_eq!(gamma_for(4.0), 5);
    }

    #[test]
    fn identity_case() {
        let d = GridDomain::circle(64).unwrap();
        let one = GridFunction::constant(d, Complex64::new(1.0, 0.0));
        let r = build_cutoff(&one, &params(2, 2.0)).unwrap();
        assert_eq!(r.phi, one);
        assert!(r.witness.sup_norm() == 0.0);
        assert_eq!(r.o1_ratio, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn constant_two_gives_one_quarter() {
        let d = GridDomain::circle(64).unwrap();
        let two = GridFunction::constant(d, Complex64::new(2.0, 0.0));
        let r = build_cutoff(&two, &params(2, 2.0)).unwrap();
        for z in r.phi.samples() {
            assert!((z - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        }
        for w in r.witness.samples() {
            assert!((w - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn adaptive_rule_backs_off_while_phi_leaks() {
        let d = GridDomain::circle(256).unwrap();
        let plateau = |amp: f64| {
            GridFunction::from_fn_1d(d, |x| Complex64::new(if (x - 1.0).abs() < 0.2 { amp } else { 1.0 }, 0.0))
                .unwrap()
        };
        let fixed = |f: &GridFunction, n| build_cutoff(f, &params(3, 2.0).with_smoothing(Smoothing::Fixed(n))).unwrap();

        // n = M/16 leaks past the target; a lower degree does not.
        let tall = plateau(100.0);
        assert!(fixed(&tall, 16).algebra_residual > ADAPTIVE_ALGEBRA_TARGET);
        let r = build_cutoff(&tall, &params(3, 2.0)).unwrap();
        assert!(r.algebra_residual <= ADAPTIVE_ALGEBRA_TARGET);
        assert!(r.degree < 16 && !r.converged);
        assert!(r.pointwise_slack >= -1e-12);

        // Out of reach: every candidate leaks, the least leaky one is kept.
        let taller = plateau(1e3);
        let r = build_cutoff(&taller, &params(3, 2.0)).unwrap();
        let least = [16, 8, 4, 2, 1].map(|n| fixed(&taller, n).algebra_residual).into_iter().fold(f64::INFINITY, f64::min);
        assert!(r.algebra_residual > ADAPTIVE_ALGEBRA_TARGET);
        assert_eq!(r.algebra_residual, least);
    }

    #[test]
    fn rejects_phi_below_one_and_complex_phi() {
        let d = GridDomain::circle(32).unwrap();
        let low = GridFunction::constant(d, Complex64::new(0.9, 0.0));
        assert!(matches!(build_cutoff(&low, &params(2, 2.0)), Err(Error::Precondition(_))));
        let cplx = GridFunction::constant(d, Complex64::new(1.5, 0.1));
        assert!(matches!(build_cutoff(&cplx, &params(2, 2.0)), Err(Error::Precondition(_))));
    }

    #[test]
    fn rejects_bad_parameters() {
        let d = GridDomain::circle(32).unwrap();
        let one = GridFunction::constant(d, Complex64::new(1.0, 0.0));
        assert!(build_cutoff(&one, &params(1, 2.0)).is_err());
        assert!(build_cutoff(&one, &params(3, 1.0)).is_err());
        let big = params(3, 2.0).with_smoothing(Smoothing::Fixed(16));
        assert!(matches!(build_cutoff(&one, &big), Err(Error::Domain(_))));
        let wrong_axis = CutoffParams { axis: Axis::Second, ..params(3, 2.0) };
        assert!(build_cutoff(&one, &wrong_axis).is_err());
    }

    #[test]
    fn anti_analytic_cutoff_lives_on_nonpositive_frequencies() {
        let d = GridDomain::circle(512).unwrap();
        let phi = GridFunction::from_fn_1d(d, |t| Complex64::new(1.0 + 0.5 * (1.0 + libm::cos(t - 1.0)), 0.0)).unwrap();
        let p = CutoffParams {
            side: Side::AntiAnalytic,
            ..params(3, 2.0)
        };
        let r = build_cutoff(&phi, &p).unwrap();
        assert!(r.algebra_residual < 1e-12);
        assert!(r.pointwise_slack >= -1e-12);
        assert!(half_line_residual(&r.phi, Side::Analytic, Axis::First).unwrap() > 1e-3);
    }
}
