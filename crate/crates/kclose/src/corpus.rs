//! Deterministic corpus generation.
//!
//! Every case draws its parameters from a ChaCha8 stream keyed by
//! `(seed, case id)`, so a single case reproduces without generating the ones
//! before it. Parameters are drawn before any grid is touched: the same case
//! id describes the same continuous function at every `M`, which is what the
//! refinement studies compare.

use std::f64::consts::TAU;

use kclose_core::settings::SettingKind;
use kclose_core::{lp_norm, Complex64, DualDecompositionInput, GridDomain, GridFunction, Setting, Space, Spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, Experiment, ExperimentConfig, Law};

/// Highest frequency magnitude of random polynomial summands.
pub const POLY_DEGREE: i64 = 8;
/// Cross-axis degree of bi-torus summands.
pub const CROSS_DEGREE: i64 = 4;
/// Concentration of the smooth windows standing in for indicator sets.
pub const WINDOW_BETA: f64 = 10.0;
/// Concentration of weak-type spikes.
pub const SPIKE_BETA: f64 = 200.0;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("case {id}: {source}")]
    Numerics {
        id: usize,
        #[source]
        source: kclose_core::Error,
    },
    #[error("case {id}: two_scale law cannot reach ratio {target} (bracket [{lo:e}, {hi:e}])")]
    Unreachable { id: usize, target: f64, lo: f64, hi: f64 },
}

pub fn case_rng(seed: u64, id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Trigonometric polynomial `Σ c·z^k w^l`, stored by coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Poly {
    pub terms: Vec<(i64, i64, [f64; 2])>,
}

impl Poly {
    /// Coefficients `N(0,1)/(1 + |k| + |l|)` over the given frequency box.
    fn random(rng: &mut ChaCha8Rng, ks: std::ops::RangeInclusive<i64>, ls: std::ops::RangeInclusive<i64>) -> Self {
        let mut terms = Vec::new();
        for k in ks {
            for l in ls.clone() {
                let c = complex_normal(rng) / (1.0 + (k.abs() + l.abs()) as f64);
                terms.push((k, l, [c.re, c.im]));
            }
        }
        Self { terms }
    }

    fn gaussian(ks: std::ops::RangeInclusive<i64>, sigma: f64, centre: f64) -> Self {
        let terms = ks
            .map(|k| {
                let c = Complex64::from_polar((-(k * k) as f64 / (2.0 * sigma * sigma)).exp(), -(k as f64) * centre);
                (k, 0, [c.re, c.im])
            })
            .collect();
        Self { terms }
    }

    pub fn coefficient_energy(&self) -> f64 {
        self.terms.iter().map(|(_, _, [re, im])| re * re + im * im).sum()
    }

    pub fn realize(&self, domain: GridDomain) -> Result<GridFunction, kclose_core::Error> {
        let half = (domain.size() / 2) as i64;
        if self.terms.iter().any(|&(k, l, _)| k < -half || k >= half || l < -half || l >= half) {
            return Err(kclose_core::Error::Domain(format!(
                "polynomial does not fit the M = {} window",
                domain.size()
            )));
        }
        let spec = Spectrum::from_fn(domain, |k, l| {
            self.terms
                .iter()
                .find(|&&(tk, tl, _)| tk as isize == k && tl as isize == l)
                .map(|(_, _, [re, im])| Complex64::new(*re, *im))
                .unwrap_or_default()
        })?;
        Ok(spec.to_grid())
    }
}

/// Smooth bump `exp(β(cos(x - c₁) - 1))`, times the same in the second
/// variable on the bi-torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub centre: [f64; 2],
    pub beta: f64,
}

impl Window {
    fn random(rng: &mut ChaCha8Rng, beta: f64) -> Self {
        Self {
            centre: [rng.random::<f64>() * TAU, rng.random::<f64>() * TAU],
            beta,
        }
    }

    pub fn realize(&self, domain: GridDomain) -> Result<GridFunction, kclose_core::Error> {
        let b = self.beta;
        let [c1, c2] = self.centre;
        if domain.dimension() == 1 {
            GridFunction::from_fn_1d(domain, |x| Complex64::new((b * ((x - c1).cos() - 1.0)).exp(), 0.0))
        } else {
            GridFunction::from_fn_2d(domain, |x, y| {
                Complex64::new((b * ((x - c1).cos() + (y - c2).cos() - 2.0)).exp(), 0.0)
            })
        }
    }
}

/// How a case was built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Construction {
    pub law: Law,
    /// Spectral boxes the generated summands were drawn from.
    pub masks: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_ratio: Option<f64>,
    /// Which part carries the window: "g" (`g = κ·f·w`) or "h" (`h = κ·f·w`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub windowed_part: Option<&'static str>,
    /// Membership residuals of the generated summands in their spaces.
    pub summand_residuals: Vec<f64>,
}

impl Construction {
    fn new(law: Law) -> Self {
        Self {
            law,
            masks: Vec::new(),
            window: None,
            amplitude: None,
            kappa: None,
            target_ratio: None,
            windowed_part: None,
            summand_residuals: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Cutoff { phi: GridFunction },
    Split { f: GridFunction },
    Decompose { input: Box<DualDecompositionInput> },
    Weaktype { f: GridFunction },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusCase {
    pub id: usize,
    pub construction: Construction,
    pub payload: Payload,
}

impl CorpusCase {
    /// Every grid function of the case with a stable name.
    pub fn grids(&self) -> Vec<(&'static str, &GridFunction)> {
        match &self.payload {
            Payload::Cutoff { phi } => vec![("phi", phi)],
            Payload::Split { f } | Payload::Weaktype { f } => vec![("f", f)],
            Payload::Decompose { input } => vec![("f", &input.f), ("g", &input.g), ("h", &input.h)],
        }
    }
}

/// Random element of `C^⊥` with its mask description.
fn c_perp_sample(rng: &mut ChaCha8Rng, kind: SettingKind) -> (Poly, String) {
    match kind {
        SettingKind::ModelSpace => (Poly::random(rng, -POLY_DEGREE..=-1, 0..=0), format!("k in [-{POLY_DEGREE}, -1]")),
        SettingKind::Bitorus => (
            Poly::random(rng, -POLY_DEGREE..=-1, -CROSS_DEGREE..=CROSS_DEGREE),
            format!("k in [-{POLY_DEGREE}, -1], l in [-{CROSS_DEGREE}, {CROSS_DEGREE}]"),
        ),
    }
}

/// Random element of `D^⊥`. In the model space this is `θ·z·P` with `P`
/// analytic, realized against the sampled θ.
fn d_perp_sample(
    rng: &mut ChaCha8Rng,
    setting: &Setting,
) -> Result<(GridFunction, String), kclose_core::Error> {
    let domain = *setting.domain();
    match setting.kind() {
        SettingKind::ModelSpace => {
            let p = Poly::random(rng, 0..=POLY_DEGREE - 1, 0..=0);
            let theta = setting.theta().expect("model space carries theta").samples();
            let z = GridFunction::monomial(domain, 1, 0);
            let f = theta.mul(&z)?.mul(&p.realize(domain)?)?;
            Ok((f, format!("theta * z * (k in [0, {}])", POLY_DEGREE - 1)))
        }
        SettingKind::Bitorus => {
            let p = Poly::random(rng, -CROSS_DEGREE..=CROSS_DEGREE, -POLY_DEGREE..=-1);
            Ok((p.realize(domain)?, format!("k in [-{CROSS_DEGREE}, {CROSS_DEGREE}], l in [-{POLY_DEGREE}, -1]")))
        }
    }
}

fn full_sample(rng: &mut ChaCha8Rng, kind: SettingKind) -> Poly {
    match kind {
        SettingKind::ModelSpace => Poly::random(rng, -POLY_DEGREE..=POLY_DEGREE, 0..=0),
        SettingKind::Bitorus => Poly::random(rng, -CROSS_DEGREE..=CROSS_DEGREE, -CROSS_DEGREE..=CROSS_DEGREE),
    }
}

fn cutoff_case(rng: &mut ChaCha8Rng, law: Law, setting: &Setting) -> Result<(Construction, Payload), kclose_core::Error> {
    let domain = *setting.domain();
    let mut con = Construction::new(law);
    let one = GridFunction::constant(domain, Complex64::new(1.0, 0.0));
    let phi = match law {
        Law::Constant => one,
        Law::RandomPolynomial => {
            let p = full_sample(rng, setting.kind());
            let amp = log_uniform(rng, 0.1, 10.0);
            con.amplitude = Some(amp);
            con.masks.push("|P|^2, P full spectrum".into());
            let energy = p.coefficient_energy();
            p.realize(domain)?.map(|z| Complex64::new(1.0 + amp * z.norm_sqr() / energy, 0.0))?
        }
        Law::Spike => {
            let w = Window::random(rng, 4.0 * WINDOW_BETA);
            let amp = log_uniform(rng, 1.0, 30.0);
            con.window = Some(w);
            con.amplitude = Some(amp);
            w.realize(domain)?.map(|z| Complex64::new(1.0 + amp * z.re, 0.0))?
        }
        Law::TwoScale => {
            let wide = Window::random(rng, WINDOW_BETA / 2.0);
            let narrow = Window::random(rng, 6.0 * WINDOW_BETA);
            let amp = log_uniform(rng, 0.3, 3.0);
            con.window = Some(narrow);
            con.amplitude = Some(amp);
            let (a, b) = (wide.realize(domain)?, narrow.realize(domain)?);
            a.zip_with(&b, |x, y| Complex64::new(1.0 + amp * (x.re + 10.0 * y.re), 0.0))?
        }
    };
    Ok((con, Payload::Cutoff { phi }))
}

fn split_case(rng: &mut ChaCha8Rng, law: Law, setting: &Setting) -> Result<(Construction, Payload), kclose_core::Error> {
    let domain = *setting.domain();
    let mut con = Construction::new(law);
    let f = match law {
        Law::Spike => {
            // Negative-frequency Gaussian packet: modulus concentrated near one
            // point, spectrum inside C^⊥.
            let centre = rng.random::<f64>() * TAU;
            let first = Poly::gaussian(-24..=-1, 5.0, centre).realize(GridDomain::circle(domain.size())?)?;
            con.masks.push("gaussian packet, k in [-24, -1]".into());
            if domain.dimension() == 1 {
                first
            } else {
                let second = Poly::random(rng, 0..=0, -CROSS_DEGREE..=CROSS_DEGREE).realize(domain)?;
                let m = domain.size();
                GridFunction::from_fn_2d(domain, |x, _| {
                    let j = ((x / TAU) * m as f64).round() as usize % m;
                    first.samples()[j]
                })?
                .mul(&second)?
            }
        }
        _ => {
            let (p, mask) = c_perp_sample(rng, setting.kind());
            con.masks.push(mask);
            p.realize(domain)?
        }
    };
    con.summand_residuals.push(setting.membership_residual(&f, Space::CPerp)?);
    Ok((con, Payload::Split { f }))
}

fn weaktype_case(rng: &mut ChaCha8Rng, law: Law, setting: &Setting) -> Result<(Construction, Payload), kclose_core::Error> {
    let domain = *setting.domain();
    let mut con = Construction::new(law);
    let f = match law {
        Law::Spike => {
            let w = Window::random(rng, SPIKE_BETA);
            con.window = Some(w);
            w.realize(domain)?
        }
        _ => {
            con.masks.push("full spectrum".into());
            full_sample(rng, setting.kind()).realize(domain)?
        }
    };
    Ok((con, Payload::Weaktype { f }))
}

/// Finds κ with `ratio(κ) = target` by bisection in `log κ`.
fn solve_kappa(id: usize, target: f64, ratio: impl Fn(f64) -> Result<f64, kclose_core::Error>) -> Result<f64, CorpusError> {
    let num = |e: kclose_core::Error| CorpusError::Numerics { id, source: e };
    let (mut lo, mut hi) = (-20.0f64, 20.0f64);
    let gap = |x: f64| ratio(x.exp()).map(|r| r.ln() - target.ln());
    let (glo, ghi) = (gap(lo).map_err(num)?, gap(hi).map_err(num)?);
    if glo.signum() == ghi.signum() {
        return Err(CorpusError::Unreachable {
            id,
            target,
            lo: lo.exp(),
            hi: hi.exp(),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = gap(mid).map_err(num)?;
        if gm == 0.0 || hi - lo < 1e-13 {
            return Ok(mid.exp());
        }
        if gm.signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

fn decompose_case(
    rng: &mut ChaCha8Rng,
    id: usize,
    cfg: &ExperimentConfig,
    setting: &Setting,
) -> Result<(Construction, Payload), CorpusError> {
    let num = |e: kclose_core::Error| CorpusError::Numerics { id, source: e };
    let law = cfg.corpus.law;
    let domain = *setting.domain();
    let mut con = Construction::new(law);
    let (a0, mask_a) = c_perp_sample(rng, setting.kind());
    let a0 = a0.realize(domain).map_err(num)?;
    let (d0, mask_d) = d_perp_sample(rng, setting).map_err(num)?;
    con.masks = vec![mask_a, mask_d];
    con.summand_residuals = vec![
        setting.membership_residual(&a0, Space::CPerp).map_err(num)?,
        setting.membership_residual(&d0, Space::DPerp).map_err(num)?,
    ];
    let f = a0.add(&d0).map_err(num)?;
    let window = Window::random(rng, WINDOW_BETA);
    con.window = Some(window);
    let fw = f.mul(&window.realize(domain).map_err(num)?).map_err(num)?;
    let q = cfg.p / (cfg.p - 1.0);

    let (kappa, windowed_g) = match law {
        Law::TwoScale => {
            let target = cfg.ratios[id % cfg.ratios.len()];
            con.target_ratio = Some(target);
            let windowed_g = target < 1.0;
            let ratio = |k: f64| -> Result<f64, kclose_core::Error> {
                let w = fw.scale_real(k);
                let rest = f.sub(&w)?;
                let (g, h) = if windowed_g { (&w, &rest) } else { (&rest, &w) };
                Ok(lp_norm(g, 1.0)? / lp_norm(h, q)?)
            };
            (solve_kappa(id, target, ratio)?, windowed_g)
        }
        _ => (log_uniform(rng, 0.1, 10.0), true),
    };
    con.kappa = Some(kappa);
    con.windowed_part = Some(if windowed_g { "g" } else { "h" });
    let w = fw.scale_real(kappa);
    let rest = f.sub(&w).map_err(num)?;
    let (g, h) = if windowed_g { (w, rest) } else { (rest, w) };
    let input = DualDecompositionInput::new(f, g, h, setting.clone(), cfg.p).map_err(num)?;
    Ok((con, Payload::Decompose { input: Box::new(input) }))
}

/// Case `id` of the corpus described by `cfg`, realized on `setting`'s grid.
pub fn generate_case(cfg: &ExperimentConfig, setting: &Setting, id: usize) -> Result<CorpusCase, CorpusError> {
    let mut rng = case_rng(cfg.corpus.seed, id);
    let law = cfg.corpus.law;
    let num = |e: kclose_core::Error| CorpusError::Numerics { id, source: e };
    let (construction, payload) = match cfg.experiment {
        Experiment::Cutoff => cutoff_case(&mut rng, law, setting).map_err(num)?,
        Experiment::Split => split_case(&mut rng, law, setting).map_err(num)?,
        Experiment::Weaktype => weaktype_case(&mut rng, law, setting).map_err(num)?,
        Experiment::Decompose => decompose_case(&mut rng, id, cfg, setting)?,
    };
    Ok(CorpusCase {
        id,
        construction,
        payload,
    })
}

/// The whole corpus at grid size `m`, in case-id order.
pub fn generate_corpus(cfg: &ExperimentConfig, m: usize) -> Result<Vec<CorpusCase>, CorpusError> {
    cfg.validate()?;
    let setting = cfg.setting.build_at(m)?;
    (0..cfg.corpus.count)
        .into_par_iter()
        .map(|id| generate_case(cfg, &setting, id))
        .collect()
}
