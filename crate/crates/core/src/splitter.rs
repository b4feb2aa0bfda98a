//! Splitting an annihilator element at a level `λ`.
//!
//! For `f` in `C^{⊥,q}` or `D^{⊥,q}` and `λ > 0`, build
//! `φ = max{1, (|f|/λ)^{1/γ}}`, take the cut-off `Φ` of `φ` in the algebra the
//! annihilator is a module over, and split `f = Φf + (1 - Φ)f = a + b`. The
//! module structure keeps `a` in the annihilator; the pointwise bound
//! `|Φ| ≤ min{1, λ/|f|}` (in its finite-degree form) gives `a` its `L^q`
//! control, and `b` inherits the weak-L¹ size of `f`.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::cutoff::{build_cutoff, check_exponent, CutoffParams, CutoffResult};
use crate::error::{Error, Result};
use crate::grid::{sgn, GridFunction};
use crate::metrics::{lp_norm, lp_norm_of_moduli, weak_l1};
use crate::settings::{Annihilator, Setting};

/// Largest input membership residual [`split`] accepts.
pub const INPUT_MEMBERSHIP_TOLERANCE: f64 = 1e-8;

/// `α = min{λ, |f|}·sgn f` and `β = f - α`.
pub fn truncate(f: &GridFunction, lambda: f64) -> Result<(GridFunction, GridFunction)> {
    check_level(lambda)?;
    let alpha = f.map_unchecked(|z| sgn(z) * z.norm().min(lambda));
    // β is written directly so that it vanishes exactly where |f| ≤ λ.
    let beta = f.map_unchecked(|z| {
        let r = z.norm();
        if r > lambda {
            sgn(z) * (r - lambda)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok((alpha, beta))
}

fn check_level(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("level λ must be positive and finite, got {lambda}")));
    }
    Ok(())
}

/// Measured constants of the four splitting estimates, each normalized by
/// the quantity the estimate is stated in terms of.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SplitRatios {
    /// `‖a‖_q / (λ^{1/p} ‖f‖_{1,∞}^{1/q})`.
    pub u1: f64,
    /// `∫_{X∖E} |b| / ‖f‖_{1,∞}`.
    pub u2: f64,
    /// `μ(E)·λ / ‖f‖_{1,∞}`.
    pub u3: f64,
    /// `sup_t t·μ{|b| > t} / ‖f‖_{1,∞}`.
    pub u4: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub a: GridFunction,
    pub b: GridFunction,
    /// `E = {|f| > λ}`.
    pub exceed: Vec<bool>,
    pub lambda: f64,
    pub measured: SplitRatios,
    pub membership_residual_a: f64,
    /// `φ = max{1, (|f|/λ)^{1/γ}}`.
    pub phi: GridFunction,
    pub cutoff: CutoffResult,
    /// `‖f‖_{1,∞}`.
    pub weak_norm: f64,
    /// `‖φ - 1‖_p / (‖f‖_{1,∞}^{1/p} λ^{-1/p})`.
    pub phi_excess_ratio: f64,
}

impl SplitResult {
    pub fn exceed_measure(&self) -> f64 {
        self.exceed.iter().filter(|&&e| e).count() as f64 / self.exceed.len() as f64
    }
}

/// Splits `f ∈ target` at level `lambda`.
///
/// `params` supplies `γ`, `p` and the smoothing rule; the side and axis of the
/// cut-off are those of the algebra `target` is a module over, whatever
/// `params` says.
pub fn split(
    f: &GridFunction,
    lambda: f64,
    setting: &Setting,
    target: Annihilator,
    params: &CutoffParams,
) -> Result<SplitResult> {
    check_level(lambda)?;
    check_exponent(params.p)?;
    if params.gamma as f64 <= params.p || params.p.is_nan() {
        return Err(Error::Precondition(format!(
            "γ = {} must be strictly greater than p = {}",
            params.gamma, params.p
        )));
    }
    let input_res = setting.membership_residual(f, target.into())?;
    if input_res > INPUT_MEMBERSHIP_TOLERANCE {
        return Err(Error::Precondition(format!(
            "input is not in the target annihilator (residual {input_res:e})"
        )));
    }
    let (side, axis) = setting.module_algebra(target);
    let cut_params = CutoffParams { side, axis, ..*params };

    let p = params.p;
    let q = p / (p - 1.0);
    let inv_gamma = 1.0 / params.gamma as f64;
    let phi = f.map_unchecked(|z| Complex64::new(libm::pow(z.norm() / lambda, inv_gamma).max(1.0), 0.0));
    let cutoff = build_cutoff(&phi, &cut_params)?;
    let a = cutoff.phi.mul(f)?;
    let b = f.zip_with(&a, |x, y| x - y)?;
    let exceed: Vec<bool> = f.samples().iter().map(|z| z.norm() > lambda).collect();

    let domain = f.domain();
    let weak_norm = weak_l1(f);
    let mu_e = exceed.iter().filter(|&&e| e).count() as f64 / exceed.len() as f64;
    let outside_b = domain.quadrature(
        b.samples()
            .iter()
            .zip(&exceed)
            .map(|(z, &e)| if e { 0.0 } else { z.norm() }),
    );
    let a_q = lp_norm(&a, q)?;
    let phi_excess = lp_norm_of_moduli(domain, phi.samples().iter().map(|z| z.re - 1.0), p)?;
    let (measured, phi_excess_ratio) = if weak_norm == 0.0 {
        (SplitRatios::default(), 0.0)
    } else {
        (
            SplitRatios {
                u1: a_q / (libm::pow(lambda, 1.0 / p) * libm::pow(weak_norm, 1.0 / q)),
                u2: outside_b / weak_norm,
                u3: mu_e * lambda / weak_norm,
                u4: weak_l1(&b) / weak_norm,
            },
            phi_excess / (libm::pow(weak_norm, 1.0 / p) * libm::pow(lambda, -1.0 / p)),
        )
    };
    let membership_residual_a = setting.membership_residual(&a, target.into())?;

    Ok(SplitResult {
        a,
        b,
        exceed,
        lambda,
        measured,
        membership_residual_a,
        phi,
        cutoff,
        weak_norm,
        phi_excess_ratio,
    })
}
