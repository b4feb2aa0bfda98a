//! Duality-side decomposition.
//!
//! Given `f ∈ C^{⊥,q} + D^{⊥,q}` written as `f = g + h` with `g ∈ L¹` and
//! `h ∈ L^q`, produce `f = g₁ + h₁` with `h₁ = Φu + Ph + a` an explicit sum of
//! annihilator elements, `‖g₁‖₁ ≤ C‖g‖₁` and `‖h₁‖_q ≤ C‖h‖_q`.
//!
//! With `r = ‖g‖₁`, `s = ‖h‖_q` and `λ = r^{1/(1-q)} s^p` the pipeline is
//!
//! 1. `Pg`, then split `Pg = a + b` at level `λ` in `C^⊥`;
//! 2. `u = g + h - a - b - Ph`, which lies in `D^{⊥,q}`;
//! 3. `φ = max{1, ((|g| + |b|)/λ)^{1/γ}}` and its cut-off `Φ ∈ conj(B)`;
//! 4. `ψ = Φu - h + Ph + a`, `g₁ = g - ψ`, `h₁ = h + ψ`.
//!
//! [`verify_report`] re-checks a report through direct-summation transforms
//! and its own quadrature loops, sharing nothing with [`decompose`] beyond
//! the setting's support masks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::cutoff::{build_cutoff, check_exponent, gamma_for, reciprocal_power, CutoffParams, Smoothing};
use crate::direct;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::metrics::lp_norm;
use crate::settings::{Annihilator, Setting, Space, SupportMask};
use crate::splitter::{split, SplitRatios};

/// Relative tolerance on `f = g + h` when an input is assembled.
pub const INPUT_IDENTITY_TOLERANCE: f64 = 1e-12;

/// `f = g + h` on the grid of `setting`, with the ambient exponent `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDecompositionInput {
    pub f: GridFunction,
    pub g: GridFunction,
    pub h: GridFunction,
    pub setting: Setting,
    pub p: f64,
}

impl DualDecompositionInput {
    pub fn new(f: GridFunction, g: GridFunction, h: GridFunction, setting: Setting, p: f64) -> Result<Self> {
        check_exponent(p)?;
        for x in [&f, &g, &h] {
            setting.domain().check_same(x.domain())?;
        }
        let scale = f.sup_norm().max(g.sup_norm()).max(h.sup_norm());
        let mismatch = f.max_abs_diff(&g.add(&h)?)?;
        if mismatch > INPUT_IDENTITY_TOLERANCE * scale {
            return Err(Error::Precondition(format!(
                "f differs from g + h by {mismatch:e} (scale {scale:e})"
            )));
        }
        Ok(Self { f, g, h, setting, p })
    }

    /// Conjugate exponent `q = p/(p-1)`.
    pub fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Same decomposition problem with `f`, `g`, `h` all multiplied by `kappa`.
    pub fn scaled(&self, kappa: f64) -> Result<Self> {
        Self::new(
            self.f.scale_real(kappa),
            self.g.scale_real(kappa),
            self.h.scale_real(kappa),
            self.setting.clone(),
            self.p,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeOptions {
    pub gamma: u32,
    pub smoothing: Smoothing,
    /// Keep `Pg, a, b, E, u, φ, Φ, ψ, …` in the report. Needed by
    /// [`verify_report`].
    pub keep_intermediates: bool,
}

impl DecomposeOptions {
    pub fn for_exponent(p: f64) -> Self {
        Self {
            gamma: gamma_for(p),
            smoothing: Smoothing::Adaptive,
            keep_intermediates: true,
        }
    }
}

/// Inputs for which `λ` is undefined and the answer is immediate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degenerate {
    /// `‖g‖₁ = 0`: `g₁ = 0`, `h₁ = f`.
    ZeroL1Part,
    /// `‖h‖_q = 0`: `g₁ = f`, `h₁ = 0`.
    ZeroLqPart,
}

impl Degenerate {
    pub fn name(self) -> &'static str {
        match self {
            Degenerate::ZeroL1Part => "r=0",
            Degenerate::ZeroLqPart => "s=0",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Intermediates {
    pub pg: GridFunction,
    pub ph: GridFunction,
    pub a: GridFunction,
    pub b: GridFunction,
    /// `E = {|Pg| > λ}`.
    pub exceed: Vec<bool>,
    pub u: GridFunction,
    /// Cut-off used to split `Pg`.
    pub split_cut: GridFunction,
    /// `φ = max{1, ((|g| + |b|)/λ)^{1/γ}}`.
    pub phi: GridFunction,
    /// `Φ`, the cut-off of `φ` in `conj(B)`.
    pub cut: GridFunction,
    /// Witness `w` with `Φ = (1 + w)^{-γ}`.
    pub witness: GridFunction,
    pub psi: GridFunction,
    pub phi_u: GridFunction,
}

/// Measured constants. Every `*_ratio` is normalized by `r` or `s` as the
/// corresponding estimate is.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Constants {
    /// `‖g₁‖₁ / r`.
    pub cg: f64,
    /// `‖h₁‖_q / s`.
    pub ch: f64,
    /// `‖(1-Φ)g‖₁/r`, `‖(1-Φ)(Ph-h)‖₁/r`, `‖(1-Φ)a‖₁/r`, `‖Φb‖₁/r`.
    pub g1_terms: [f64; 4],
    /// `‖Φb‖₁` restricted to `E` and to `X∖E`, over `r`.
    pub phi_b_split: [f64; 2],
    /// `‖1 - Φ‖_p · s / r`.
    pub one_minus_cut_ratio: f64,
    /// `‖Φ(g - b)‖_q / s`.
    pub h1_tail_ratio: f64,
    /// The first split's measured estimates for `Pg`.
    pub split: SplitRatios,
    /// `min_j [(1 + Re w_j)^{-γ} - |Φ_j|]`.
    pub cut_slack: f64,
    /// `max_j |Φ_j|`.
    pub cut_max_modulus: f64,
    /// `max_j (|Φ_j| - min{1, λ/(|g_j| + |b_j|)})`: how far the finite-degree
    /// cut-off is from the limiting pointwise bound.
    pub limit_form_excess: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// `max|g₁ + h₁ - f| / max|f|`.
    pub identity: f64,
    /// `Φu` in `D^⊥`.
    pub phi_u: f64,
    /// `Ph` in `C^⊥`.
    pub ph: f64,
    /// `a` in `C^⊥`.
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub g1: GridFunction,
    pub h1: GridFunction,
    pub r: f64,
    pub s: f64,
    pub lambda: f64,
    pub p: f64,
    pub gamma: u32,
    pub degenerate: Option<Degenerate>,
    /// Fejér degrees of the split cut-off and of `Φ`.
    pub degrees: [usize; 2],
    pub converged: bool,
    pub intermediates: Option<Intermediates>,
    pub constants: Constants,
    pub residuals: Residuals,
}

fn relative_identity(f: &GridFunction, g1: &GridFunction, h1: &GridFunction) -> Result<f64> {
    let scale = f.sup_norm();
    let err = f.max_abs_diff(&g1.add(h1)?)?;
    Ok(if scale == 0.0 { err } else { err / scale })
}

fn one_minus(f: &GridFunction) -> GridFunction {
    f.map_unchecked(|z| Complex64::new(1.0, 0.0) - z)
}

fn degenerate_report(input: &DualDecompositionInput, r: f64, s: f64, gamma: u32, kind: Degenerate) -> Result<DecompositionReport> {
    let zero = GridFunction::zeros(*input.f.domain());
    let (g1, h1) = match kind {
        Degenerate::ZeroL1Part => (zero, input.f.clone()),
        Degenerate::ZeroLqPart => (input.f.clone(), zero),
    };
    let q = input.q();
    let cg = if r == 0.0 { 0.0 } else { lp_norm(&g1, 1.0)? / r };
    let ch = if s == 0.0 { 0.0 } else { lp_norm(&h1, q)? / s };
    Ok(DecompositionReport {
        residuals: Residuals {
            identity: relative_identity(&input.f, &g1, &h1)?,
            ..Residuals::default()
        },
        g1,
        h1,
        r,
        s,
        lambda: 0.0,
        p: input.p,
        gamma,
        degenerate: Some(kind),
        degrees: [0, 0],
        converged: true,
        intermediates: None,
        constants: Constants {
            cg,
            ch,
            cut_max_modulus: 1.0,
            ..Constants::default()
        },
    })
}

/// Runs the decomposition pipeline on `input`.
pub fn decompose(input: &DualDecompositionInput, options: &DecomposeOptions) -> Result<DecompositionReport> {
    let p = input.p;
    let q = input.q();
    if options.gamma as f64 <= p || p.is_nan() {
        return Err(Error::Precondition(format!(
            "γ = {} must be an integer strictly greater than p = {p}",
            options.gamma
        )));
    }
    let setting = &input.setting;
    let (f, g, h) = (&input.f, &input.g, &input.h);
    let r = lp_norm(g, 1.0)?;
    let s = lp_norm(h, q)?;
    if r == 0.0 {
        return degenerate_report(input, r, s, options.gamma, Degenerate::ZeroL1Part);
    }
    if s == 0.0 {
        return degenerate_report(input, r, s, options.gamma, Degenerate::ZeroLqPart);
    }
    let lambda = libm::pow(r, 1.0 / (1.0 - q)) * libm::pow(s, p);
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("level λ = {lambda} is not usable (r = {r}, s = {s})")));
    }

    // Split Pg in C^⊥.
    let pg = setting.project_p(g)?;
    let base = CutoffParams {
        gamma: options.gamma,
        p,
        smoothing: options.smoothing,
        side: crate::operators::Side::Analytic,
        axis: crate::operators::Axis::First,
    };
    let split_res = split(&pg, lambda, setting, Annihilator::CPerp, &base)?;
    let (a, b) = (&split_res.a, &split_res.b);

    // u = (I - P)f, written through the pieces.
    let ph = setting.project_p(h)?;
    let u = g.add(h)?.sub(a)?.sub(b)?.sub(&ph)?;

    // Second cut-off in conj(B).
    let inv_gamma = 1.0 / options.gamma as f64;
    let phi = g.zip_with(b, |x, y| {
        Complex64::new(libm::pow((x.norm() + y.norm()) / lambda, inv_gamma).max(1.0), 0.0)
    })?;
    let (side, axis) = setting.module_algebra(Annihilator::DPerp);
    let cut_res = build_cutoff(&phi, &CutoffParams { side, axis, ..base })?;
    let cut = &cut_res.phi;

    let phi_u = cut.mul(&u)?;
    let psi = phi_u.sub(h)?.add(&ph)?.add(a)?;
    let g1 = g.sub(&psi)?;
    let h1 = h.add(&psi)?;

    // Measurements.
    let one_minus_cut = one_minus(cut);
    let l1 = |x: &GridFunction| lp_norm(x, 1.0);
    let g1_terms = [
        l1(&one_minus_cut.mul(g)?)? / r,
        l1(&one_minus_cut.mul(&ph.sub(h)?)?)? / r,
        l1(&one_minus_cut.mul(a)?)? / r,
        l1(&cut.mul(b)?)? / r,
    ];
    let domain = f.domain();
    let phi_b = cut.mul(b)?;
    let on_e = domain.quadrature(phi_b.samples().iter().zip(&split_res.exceed).map(|(z, &e)| if e { z.norm() } else { 0.0 }));
    let off_e = domain.quadrature(phi_b.samples().iter().zip(&split_res.exceed).map(|(z, &e)| if e { 0.0 } else { z.norm() }));
    let limit_form_excess = cut
        .samples()
        .iter()
        .zip(g.samples().iter().zip(b.samples()))
        .fold(f64::NEG_INFINITY, |m, (c, (x, y))| {
            let denom = x.norm() + y.norm();
            let bound = if denom == 0.0 { 1.0 } else { (lambda / denom).min(1.0) };
            m.max(c.norm() - bound)
        });
    let constants = Constants {
        cg: l1(&g1)? / r,
        ch: lp_norm(&h1, q)? / s,
        g1_terms,
        phi_b_split: [on_e / r, off_e / r],
        one_minus_cut_ratio: lp_norm(&one_minus_cut, p)? * s / r,
        h1_tail_ratio: lp_norm(&cut.mul(&g.sub(b)?)?, q)? / s,
        split: split_res.measured,
        cut_slack: cut_res.pointwise_slack,
        cut_max_modulus: cut.sup_norm(),
        limit_form_excess,
    };
    let residuals = Residuals {
        identity: relative_identity(f, &g1, &h1)?,
        phi_u: setting.membership_residual(&phi_u, Space::DPerp)?,
        ph: setting.membership_residual(&ph, Space::CPerp)?,
        a: split_res.membership_residual_a,
    };
    let degrees = [split_res.cutoff.degree, cut_res.degree];
    let converged = split_res.cutoff.converged && cut_res.converged;
    let intermediates = options.keep_intermediates.then(|| Intermediates {
        pg,
        ph,
        a: split_res.a.clone(),
        b: split_res.b.clone(),
        exceed: split_res.exceed.clone(),
        u,
        split_cut: split_res.cutoff.phi.clone(),
        phi,
        cut: cut_res.phi.clone(),
        witness: cut_res.witness.clone(),
        psi,
        phi_u,
    });

    Ok(DecompositionReport {
        g1,
        h1,
        r,
        s,
        lambda,
        p,
        gamma: options.gamma,
        degenerate: None,
        degrees,
        converged,
        intermediates,
        constants,
        residuals,
    })
}

/// Tolerances the certificate checker applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerances {
    /// Relative sup-norm tolerance on `g₁ + h₁ = f` and on the other
    /// algebraic identities.
    pub identity: f64,
    /// Largest accepted membership residual.
    pub membership: f64,
    /// Absolute slack allowed in pointwise bounds.
    pub pointwise: f64,
    /// Relative tolerance on recomputed norms and constants.
    pub norms: f64,
}

impl VerifyTolerances {
    /// `1e-8` membership for exact settings, `1e-5` when θ is a Blaschke
    /// product sampled with spectral truncation.
    pub fn for_setting(setting: &Setting) -> Self {
        Self {
            identity: 1e-9,
            membership: if setting.is_exact() { 1e-8 } else { 1e-5 },
            pointwise: 1e-12,
            norms: 1e-9,
        }
    }
}

/// One checked clause of a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub clause: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub passed: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl Verification {
    pub fn failed_clauses(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| !d.passed)
    }
}

struct Checker {
    diagnostics: Vec<Diagnostic>,
}

impl Checker {
    fn at_most(&mut self, clause: &'static str, measured: f64, tolerance: f64) {
        self.diagnostics.push(Diagnostic {
            clause,
            measured,
            tolerance,
            // NaN fails.
            passed: measured <= tolerance,
            note: None,
        });
    }

    fn fail(&mut self, clause: &'static str, note: String) {
        self.diagnostics.push(Diagnostic {
            clause,
            measured: f64::NAN,
            tolerance: 0.0,
            passed: false,
            note: Some(note),
        });
    }
}

fn sup(x: &[Complex64]) -> f64 {
    x.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// `max_j |Σ_i terms_i[j]|` for signed term lists.
fn sup_of_combination(terms: &[(f64, &GridFunction)]) -> f64 {
    let n = terms[0].1.len();
    (0..n)
        .map(|j| terms.iter().map(|(c, t)| t.samples()[j] * *c).sum::<Complex64>().norm())
        .fold(0.0, f64::max)
}

fn mean_power(x: &GridFunction, p: f64) -> f64 {
    let total: f64 = x.samples().iter().map(|z| libm::pow(z.norm(), p)).sum();
    libm::pow(total / x.len() as f64, 1.0 / p)
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn direct_residual(f: &GridFunction, mask: &SupportMask, setting: &Setting) -> Result<f64> {
    let twisted;
    let target = if mask.twisted {
        let theta = setting
            .theta()
            .ok_or_else(|| Error::Domain("twisted mask without an inner function".into()))?;
        let t: Vec<Complex64> = f
            .samples()
            .iter()
            .zip(theta.samples().samples())
            .map(|(x, th)| x * th.conj())
            .collect();
        twisted = GridFunction::new(*f.domain(), t)?;
        &twisted
    } else {
        f
    };
    let spec = direct::to_spectrum(target);
    let (mut out, mut total) = (0.0, 0.0);
    for (k, l, c) in spec.iter() {
        total += c.norm_sqr();
        if !mask.admits(k, l) {
            out += c.norm_sqr();
        }
    }
    Ok(if total == 0.0 { 0.0 } else { libm::sqrt(out / total) })
}

/// Direct-summation negative Riesz projection along the first axis.
fn direct_project(f: &GridFunction) -> GridFunction {
    let spec = direct::to_spectrum(f);
    let masked = spec.multiply(|k, _| Complex64::new(if k <= -1 { 1.0 } else { 0.0 }, 0.0));
    direct::from_spectrum(&masked)
}

/// Re-checks `rep` against `input` with the default tolerances.
pub fn verify_report(rep: &DecompositionReport, input: &DualDecompositionInput) -> Verification {
    verify_report_with(rep, input, &VerifyTolerances::for_setting(&input.setting))
}

pub fn verify_report_with(
    rep: &DecompositionReport,
    input: &DualDecompositionInput,
    tol: &VerifyTolerances,
) -> Verification {
    let mut chk = Checker { diagnostics: Vec::new() };
    if let Err(e) = verify_inner(rep, input, tol, &mut chk) {
        chk.fail("structure", format!("{e}"));
    }
    let passed = !chk.diagnostics.is_empty() && chk.diagnostics.iter().all(|d| d.passed);
    Verification {
        passed,
        diagnostics: chk.diagnostics,
    }
}

fn verify_inner(
    rep: &DecompositionReport,
    input: &DualDecompositionInput,
    tol: &VerifyTolerances,
    chk: &mut Checker,
) -> Result<()> {
    let domain = *input.f.domain();
    for x in [&rep.g1, &rep.h1] {
        domain.check_same(x.domain())?;
    }
    let (f, g, h) = (&input.f, &input.g, &input.h);
    let f_scale = sup(f.samples());
    let rel = |v: f64| if f_scale == 0.0 { v } else { v / f_scale };

    chk.at_most(
        "identity residual",
        rel(sup_of_combination(&[(1.0, &rep.g1), (1.0, &rep.h1), (-1.0, f)])),
        tol.identity,
    );

    let p = input.p;
    let q = input.q();
    let r = g.samples().iter().map(|z| z.norm()).sum::<f64>() / g.len() as f64;
    let s = mean_power(h, q);
    chk.at_most("norm r", relative_gap(r, rep.r), tol.norms);
    chk.at_most("norm s", relative_gap(s, rep.s), tol.norms);
    let g1_l1 = rep.g1.samples().iter().map(|z| z.norm()).sum::<f64>() / g.len() as f64;
    let h1_lq = mean_power(&rep.h1, q);
    let cg = if r == 0.0 { 0.0 } else { g1_l1 / r };
    let ch = if s == 0.0 { 0.0 } else { h1_lq / s };
    chk.at_most("constant Cg", relative_gap(cg, rep.constants.cg), tol.norms);
    chk.at_most("constant Ch", relative_gap(ch, rep.constants.ch), tol.norms);
    chk.at_most("constants finite", if cg.is_finite() && ch.is_finite() { 0.0 } else { 1.0 }, 0.0);

    match rep.degenerate {
        Some(Degenerate::ZeroL1Part) => {
            chk.at_most("degenerate branch", r, 0.0);
            chk.at_most("degenerate branch", rel(sup(rep.g1.samples())), tol.identity);
            return Ok(());
        }
        Some(Degenerate::ZeroLqPart) => {
            chk.at_most("degenerate branch", s, 0.0);
            chk.at_most("degenerate branch", rel(sup(rep.h1.samples())), tol.identity);
            return Ok(());
        }
        None => {}
    }
    if r == 0.0 || s == 0.0 {
        chk.fail("degenerate branch", "zero norm input reported as non-degenerate".into());
        return Ok(());
    }
    let lambda = libm::pow(r, 1.0 / (1.0 - q)) * libm::pow(s, p);
    chk.at_most("level lambda", relative_gap(lambda, rep.lambda), tol.norms);

    let Some(im) = rep.intermediates.as_ref() else {
        chk.fail("intermediates", "report carries no intermediates; h1 membership cannot be certified".into());
        return Ok(());
    };
    for x in [&im.pg, &im.ph, &im.a, &im.b, &im.u, &im.phi, &im.cut, &im.witness, &im.psi, &im.phi_u, &im.split_cut] {
        domain.check_same(x.domain())?;
    }

    // h₁ = h + ψ = Φu + Ph + a.
    chk.at_most(
        "h1 decomposition",
        rel(sup_of_combination(&[(1.0, &rep.h1), (-1.0, &im.phi_u), (-1.0, &im.ph), (-1.0, &im.a)])),
        tol.identity,
    );
    chk.at_most(
        "g1 definition",
        rel(sup_of_combination(&[(1.0, &rep.g1), (-1.0, g), (1.0, &im.psi)])),
        tol.identity,
    );

    // Projections recomputed by direct summation.
    let pg = direct_project(g);
    let ph = direct_project(h);
    chk.at_most("projection Pg", rel(sup_of_combination(&[(1.0, &im.pg), (-1.0, &pg)])), tol.identity);
    chk.at_most("projection Ph", rel(sup_of_combination(&[(1.0, &im.ph), (-1.0, &ph)])), tol.identity);

    // Module products.
    let a_expect = GridFunction::new(domain, im.split_cut.samples().iter().zip(pg.samples()).map(|(c, x)| c * x).collect())?;
    chk.at_most("split product a", rel(sup_of_combination(&[(1.0, &im.a), (-1.0, &a_expect)])), tol.identity);
    chk.at_most(
        "split sum a+b",
        rel(sup_of_combination(&[(1.0, &im.a), (1.0, &im.b), (-1.0, &pg)])),
        tol.identity,
    );
    let u_expect = sup_of_combination(&[(1.0, &im.u), (-1.0, f), (1.0, &pg), (1.0, &ph)]);
    chk.at_most("u = (I-P)f", rel(u_expect), tol.identity);
    let phi_u = GridFunction::new(domain, im.cut.samples().iter().zip(im.u.samples()).map(|(c, x)| c * x).collect())?;
    chk.at_most("product Phi*u", rel(sup_of_combination(&[(1.0, &im.phi_u), (-1.0, &phi_u)])), tol.identity);

    // Memberships.
    let setting = &input.setting;
    chk.at_most("membership Phi*u in D_perp", direct_residual(&im.phi_u, &setting.mask(Space::DPerp), setting)?, tol.membership);
    chk.at_most("membership Ph in C_perp", direct_residual(&im.ph, &setting.mask(Space::CPerp), setting)?, tol.membership);
    chk.at_most("membership a in C_perp", direct_residual(&im.a, &setting.mask(Space::CPerp), setting)?, tol.membership);
    // Φ ∈ conj(B) ⇔ conj(Φ) ∈ B.
    chk.at_most(
        "cut-off algebra membership",
        direct_residual(&im.cut.conj(), &setting.mask(Space::B), setting)?,
        tol.membership,
    );

    // Pointwise bounds on Φ = (1 + w)^{-γ}.
    let gamma = rep.gamma;
    let recomputed = reciprocal_power(&im.witness, gamma);
    chk.at_most("cut-off formula", sup_of_combination(&[(1.0, &im.cut), (-1.0, &recomputed)]), tol.identity);
    let modulus_excess = im.cut.samples().iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.norm() - 1.0));
    chk.at_most("cut-off modulus bound", modulus_excess, tol.pointwise);
    let pointwise_excess = im
        .cut
        .samples()
        .iter()
        .zip(im.witness.samples())
        .fold(f64::NEG_INFINITY, |m, (c, w)| m.max(c.norm() - libm::pow(1.0 + w.re, -(gamma as f64))));
    chk.at_most("cut-off pointwise bound", pointwise_excess, tol.pointwise);
    let witness_real_min = im.witness.samples().iter().fold(f64::INFINITY, |m, w| m.min(w.re));
    chk.at_most("witness real part nonnegative", -witness_real_min, tol.pointwise);
    let phi_expect_gap = im
        .phi
        .samples()
        .iter()
        .zip(g.samples().iter().zip(im.b.samples()))
        .fold(0.0_f64, |m, (ph, (x, y))| {
            let v = libm::pow((x.norm() + y.norm()) / lambda, 1.0 / gamma as f64).max(1.0);
            m.max((ph.re - v).abs() / v)
        });
    chk.at_most("phi definition", phi_expect_gap, tol.identity);
    Ok(())
}
