//! Experiment pipelines over a corpus and a list of grid sizes.
//!
//! Each pipeline evaluates every case independently (in parallel), checks
//! the hard invariants per case, folds per-case values into corpus
//! constants, and compares constants across consecutive grids.

use std::collections::BTreeMap;

use kclose_core::cutoff::gamma_for;
use kclose_core::kclose::VerifyTolerances;
use kclose_core::{
    build_cutoff, decompose, split, verify_report, weak_l1, Annihilator, CutoffParams, DecomposeOptions,
    DecompositionReport, GridFunction, Setting, Smoothing,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::corpus::{generate_corpus, Construction, CorpusCase, CorpusError, Payload};

/// `|Φ| ≤ (1 + Re w)^{-γ}` and `|Φ| ≤ 1` hold up to this rounding allowance.
pub const POINTWISE_TOLERANCE: f64 = 1e-12;
pub const SPLIT_IDENTITY_TOLERANCE: f64 = 1e-12;
pub const DECOMPOSE_IDENTITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    Max,
    Min,
}

/// A corpus-level constant and the drift it may show under grid doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantDef {
    pub name: &'static str,
    pub aggregate: Aggregate,
    /// Allowed drift in percent; `None` records the drift without asserting.
    pub drift_threshold: Option<f64>,
}

const fn sup(name: &'static str, drift_threshold: Option<f64>) -> ConstantDef {
    ConstantDef {
        name,
        aggregate: Aggregate::Max,
        drift_threshold,
    }
}

const fn inf(name: &'static str) -> ConstantDef {
    ConstantDef {
        name,
        aggregate: Aggregate::Min,
        drift_threshold: None,
    }
}

pub fn constants_for(experiment: Experiment) -> &'static [ConstantDef] {
    const CUTOFF: &[ConstantDef] = &[
        sup("o1_ratio", Some(10.0)),
        inf("pointwise_slack"),
        sup("max_modulus", None),
        sup("algebra_residual", None),
    ];
    const SPLIT: &[ConstantDef] = &[
        sup("u1", Some(20.0)),
        sup("u2", Some(20.0)),
        sup("u3", Some(20.0)),
        sup("u4", Some(20.0)),
        sup("phi_excess", None),
        sup("identity", None),
        sup("residual_a", None),
    ];
    const DECOMPOSE: &[ConstantDef] = &[
        sup("cg", Some(20.0)),
        sup("ch", Some(20.0)),
        sup("g1_term_one_minus_cut_g", None),
        sup("g1_term_ph_minus_h", None),
        sup("g1_term_a", None),
        sup("g1_term_phi_b", None),
        sup("phi_b_on_e", None),
        sup("phi_b_off_e", None),
        sup("one_minus_cut", None),
        sup("h1_tail", None),
        sup("identity", None),
        sup("residual_phi_u", None),
        sup("residual_ph", None),
        sup("residual_a", None),
        inf("cut_slack"),
    ];
    const WEAKTYPE: &[ConstantDef] = &[sup("weak_type", Some(20.0))];
    match experiment {
        Experiment::Cutoff => CUTOFF,
        Experiment::Split => SPLIT,
        Experiment::Decompose => DECOMPOSE,
        Experiment::Weaktype => WEAKTYPE,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub clause: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseOutcome {
    pub id: usize,
    pub construction: Construction,
    pub values: BTreeMap<&'static str, f64>,
    pub violations: Vec<Violation>,
    /// Some adaptive cut-off stopped at its degree cap.
    pub unconverged: bool,
    #[serde(skip)]
    pub report: Option<Box<DecompositionReport>>,
    /// Kept for failing cases and alongside a retained report.
    #[serde(skip)]
    pub case: Option<Box<CorpusCase>>,
}

impl CaseOutcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantValue {
    pub name: &'static str,
    pub value: f64,
    pub argmax_case: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridOutcome {
    #[serde(rename = "M")]
    pub m: usize,
    pub constants: Vec<ConstantValue>,
    pub unconverged_cases: usize,
    pub cases: Vec<CaseOutcome>,
}

impl GridOutcome {
    pub fn constant(&self, name: &str) -> Option<&ConstantValue> {
        self.constants.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementRow {
    pub constant: &'static str,
    pub m_coarse: usize,
    pub m_fine: usize,
    pub coarse: f64,
    pub fine: f64,
    pub drift_percent: f64,
    pub threshold_percent: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub grids: Vec<GridOutcome>,
    pub refinement: Vec<RefinementRow>,
    pub passed: bool,
}

impl ExperimentOutcome {
    pub fn failing_cases(&self) -> impl Iterator<Item = (usize, &CaseOutcome)> {
        self.grids
            .iter()
            .flat_map(|g| g.cases.iter().filter(|c| !c.passed()).map(move |c| (g.m, c)))
    }
}

/// Relative change, with values below `1e-12` in both grids counted as equal.
pub fn drift_percent(coarse: f64, fine: f64) -> f64 {
    if coarse.abs() <= 1e-12 && fine.abs() <= 1e-12 {
        return 0.0;
    }
    if !coarse.is_finite() || !fine.is_finite() {
        return f64::INFINITY;
    }
    100.0 * (fine - coarse).abs() / coarse.abs().max(1e-300)
}

fn membership_tolerance(setting: &Setting) -> f64 {
    VerifyTolerances::for_setting(setting).membership
}

struct Eval {
    values: BTreeMap<&'static str, f64>,
    violations: Vec<Violation>,
    unconverged: bool,
    report: Option<DecompositionReport>,
}

impl Eval {
    fn new() -> Self {
        Self {
            values: BTreeMap::new(),
            violations: Vec::new(),
            unconverged: false,
            report: None,
        }
    }

    fn at_most(&mut self, clause: &str, value: f64, bound: f64) {
        if value.is_nan() || value > bound {
            self.violations.push(Violation {
                clause: clause.into(),
                detail: format!("{value:e} exceeds {bound:e}"),
            });
        }
    }

    fn finite(&mut self, clause: &str, value: f64) {
        if !value.is_finite() {
            self.violations.push(Violation {
                clause: clause.into(),
                detail: format!("{value} is not finite"),
            });
        }
    }

    fn error(&mut self, clause: &str, e: impl std::fmt::Display) {
        self.violations.push(Violation {
            clause: clause.into(),
            detail: e.to_string(),
        });
    }

    fn fold(&mut self, name: &'static str, value: f64, agg: Aggregate) {
        let slot = self.values.entry(name).or_insert(match agg {
            Aggregate::Max => f64::NEG_INFINITY,
            Aggregate::Min => f64::INFINITY,
        });
        *slot = match agg {
            Aggregate::Max => slot.max(value),
            Aggregate::Min => slot.min(value),
        };
    }
}

fn eval_cutoff(phi: &GridFunction, setting: &Setting, p: f64) -> Eval {
    let mut ev = Eval::new();
    let (side, axis) = setting.module_algebra(Annihilator::CPerp);
    let params = CutoffParams {
        gamma: gamma_for(p),
        p,
        smoothing: Smoothing::Adaptive,
        side,
        axis,
    };
    match build_cutoff(phi, &params) {
        Ok(r) => {
            let modulus = r.phi.sup_norm();
            ev.values.insert("o1_ratio", r.o1_ratio);
            ev.values.insert("pointwise_slack", r.pointwise_slack);
            ev.values.insert("max_modulus", modulus);
            ev.values.insert("algebra_residual", r.algebra_residual);
            ev.unconverged = !r.converged;
            ev.at_most("cut-off pointwise bound", -r.pointwise_slack, POINTWISE_TOLERANCE);
            ev.at_most("cut-off modulus", modulus - 1.0, POINTWISE_TOLERANCE);
            ev.finite("o1 ratio", r.o1_ratio);
        }
        Err(e) => ev.error("build_cutoff", e),
    }
    ev
}

fn median_modulus(f: &GridFunction) -> f64 {
    let mut v: Vec<f64> = f.samples().iter().map(|z| z.norm()).collect();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn eval_split(f: &GridFunction, setting: &Setting, cfg: &ExperimentConfig) -> Eval {
    let mut ev = Eval::new();
    let median = median_modulus(f);
    let (side, axis) = setting.module_algebra(Annihilator::CPerp);
    let params = CutoffParams {
        gamma: gamma_for(cfg.p),
        p: cfg.p,
        smoothing: Smoothing::Adaptive,
        side,
        axis,
    };
    let tol = membership_tolerance(setting);
    let scale = f.sup_norm();
    for &mult in &cfg.lambda_sweep {
        let lambda = mult * median;
        match split(f, lambda, setting, Annihilator::CPerp, &params) {
            Ok(r) => {
                let identity = r.a.add(&r.b).and_then(|s| s.max_abs_diff(f)).unwrap_or(f64::NAN) / scale;
                let m = r.measured;
                for (name, v) in [("u1", m.u1), ("u2", m.u2), ("u3", m.u3), ("u4", m.u4)] {
                    ev.finite(name, v);
                    ev.fold(name, v, Aggregate::Max);
                }
                ev.fold("phi_excess", r.phi_excess_ratio, Aggregate::Max);
                ev.fold("identity", identity, Aggregate::Max);
                ev.fold("residual_a", r.membership_residual_a, Aggregate::Max);
                ev.unconverged |= !r.cutoff.converged;
                ev.at_most("split identity a + b = f", identity, SPLIT_IDENTITY_TOLERANCE);
                ev.at_most("membership a in C_perp", r.membership_residual_a, tol);
            }
            Err(e) => ev.error("split", e),
        }
    }
    ev
}

fn eval_decompose(case: &CorpusCase, setting: &Setting, keep_report: bool) -> Eval {
    let mut ev = Eval::new();
    let Payload::Decompose { input } = &case.payload else {
        ev.error("payload", "not a decomposition case");
        return ev;
    };
    let tol = membership_tolerance(setting);
    let rep = match decompose(input, &DecomposeOptions::for_exponent(input.p)) {
        Ok(r) => r,
        Err(e) => {
            ev.error("decompose", e);
            return ev;
        }
    };
    let c = &rep.constants;
    let res = &rep.residuals;
    let named = [
        ("cg", c.cg),
        ("ch", c.ch),
        ("g1_term_one_minus_cut_g", c.g1_terms[0]),
        ("g1_term_ph_minus_h", c.g1_terms[1]),
        ("g1_term_a", c.g1_terms[2]),
        ("g1_term_phi_b", c.g1_terms[3]),
        ("phi_b_on_e", c.phi_b_split[0]),
        ("phi_b_off_e", c.phi_b_split[1]),
        ("one_minus_cut", c.one_minus_cut_ratio),
        ("h1_tail", c.h1_tail_ratio),
        ("identity", res.identity),
        ("residual_phi_u", res.phi_u),
        ("residual_ph", res.ph),
        ("residual_a", res.a),
        ("cut_slack", if rep.degenerate.is_some() { 0.0 } else { c.cut_slack }),
    ];
    for (k, v) in named {
        ev.values.insert(k, v);
    }
    ev.unconverged = !rep.converged;
    ev.finite("constant Cg", c.cg);
    ev.finite("constant Ch", c.ch);
    ev.at_most("identity residual", res.identity, DECOMPOSE_IDENTITY_TOLERANCE);
    ev.at_most("membership Phi*u in D_perp", res.phi_u, tol);
    ev.at_most("membership Ph in C_perp", res.ph, tol);
    ev.at_most("membership a in C_perp", res.a, tol);
    if rep.degenerate.is_none() {
        ev.at_most("cut-off pointwise bound", -c.cut_slack, POINTWISE_TOLERANCE);
    }
    let v = verify_report(&rep, input);
    for d in v.failed_clauses() {
        ev.violations.push(Violation {
            clause: format!("certificate: {}", d.clause),
            detail: d.note.clone().unwrap_or_else(|| format!("{:e} > {:e}", d.measured, d.tolerance)),
        });
    }
    if keep_report || !ev.violations.is_empty() {
        ev.report = Some(rep);
    }
    ev
}

fn eval_weaktype(f: &GridFunction, setting: &Setting) -> Eval {
    let mut ev = Eval::new();
    match setting.project_p(f) {
        Ok(pf) => {
            let l1 = kclose_core::lp_norm(f, 1.0).unwrap_or(f64::NAN);
            let ratio = if l1 == 0.0 { 0.0 } else { weak_l1(&pf) / l1 };
            ev.values.insert("weak_type", ratio);
            ev.finite("weak-type ratio", ratio);
        }
        Err(e) => ev.error("projection", e),
    }
    ev
}

fn evaluate(case: CorpusCase, cfg: &ExperimentConfig, setting: &Setting, keep_reports: bool) -> CaseOutcome {
    let ev = match &case.payload {
        Payload::Cutoff { phi } => eval_cutoff(phi, setting, cfg.p),
        Payload::Split { f } => eval_split(f, setting, cfg),
        Payload::Decompose { .. } => eval_decompose(&case, setting, keep_reports),
        Payload::Weaktype { f } => eval_weaktype(f, setting),
    };
    let keep_case = !ev.violations.is_empty() || ev.report.is_some();
    CaseOutcome {
        id: case.id,
        construction: case.construction.clone(),
        values: ev.values,
        violations: ev.violations,
        unconverged: ev.unconverged,
        report: ev.report.map(Box::new),
        case: keep_case.then(|| Box::new(case)),
    }
}

fn aggregate(cases: &[CaseOutcome], defs: &[ConstantDef]) -> Vec<ConstantValue> {
    defs.iter()
        .map(|def| {
            let mut best: Option<(f64, usize)> = None;
            for c in cases {
                let Some(&v) = c.values.get(def.name) else { continue };
                let better = match (best, def.aggregate) {
                    (None, _) => true,
                    (Some((b, _)), Aggregate::Max) => v > b || (v.is_nan() && !b.is_nan()),
                    (Some((b, _)), Aggregate::Min) => v < b || (v.is_nan() && !b.is_nan()),
                };
                if better {
                    best = Some((v, c.id));
                }
            }
            ConstantValue {
                name: def.name,
                value: best.map_or(f64::NAN, |b| b.0),
                argmax_case: best.map(|b| b.1),
            }
        })
        .collect()
}

/// Options that do not change the numbers, only what is kept.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep a decomposition report for every case (not only failing ones).
    pub keep_reports: bool,
}

pub fn run_grid(cfg: &ExperimentConfig, m: usize, opts: RunOptions) -> Result<GridOutcome, CorpusError> {
    let setting = cfg.setting.build_at(m)?;
    let corpus = generate_corpus(cfg, m)?;
    let cases: Vec<CaseOutcome> = corpus
        .into_par_iter()
        .map(|case| evaluate(case, cfg, &setting, opts.keep_reports))
        .collect();
    let unconverged = cases.iter().filter(|c| c.unconverged).count();
    if unconverged > 0 {
        log::info!(
            "{} at M = {m}: {unconverged} of {} cases hit the smoothing degree cap",
            cfg.experiment,
            cases.len()
        );
    }
    Ok(GridOutcome {
        m,
        constants: aggregate(&cases, constants_for(cfg.experiment)),
        unconverged_cases: unconverged,
        cases,
    })
}

pub fn refinement(experiment: Experiment, grids: &[GridOutcome]) -> Vec<RefinementRow> {
    let mut rows = Vec::new();
    for pair in grids.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        for def in constants_for(experiment) {
            let (Some(a), Some(b)) = (lo.constant(def.name), hi.constant(def.name)) else { continue };
            let drift = drift_percent(a.value, b.value);
            rows.push(RefinementRow {
                constant: def.name,
                m_coarse: lo.m,
                m_fine: hi.m,
                coarse: a.value,
                fine: b.value,
                drift_percent: drift,
                threshold_percent: def.drift_threshold,
                passed: def.drift_threshold.is_none_or(|t| drift < t),
            });
        }
    }
    rows
}

/// Runs `cfg` over all its grids.
pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<ExperimentOutcome, CorpusError> {
    cfg.validate()?;
    let mut grids = Vec::new();
    for m in cfg.grids() {
        log::info!("{}: {} cases at M = {m}", cfg.experiment, cfg.corpus.count);
        grids.push(run_grid(cfg, m, opts)?);
    }
    let refinement = refinement(cfg.experiment, &grids);
    let passed = grids.iter().all(|g| g.cases.iter().all(CaseOutcome::passed)) && refinement.iter().all(|r| r.passed);
    Ok(ExperimentOutcome {
        config: cfg.clone(),
        grids,
        refinement,
        passed,
    })
}
