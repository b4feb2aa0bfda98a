//! Reports, CSV tables and decomposition certificates on disk.
//!
//! A certificate is a JSON document plus one binary grid file per array,
//! stored next to it as `<stem>.<name>.bin`. Everything needed to re-check a
//! decomposition from scratch is in there: the input triple, the setting, the
//! output pair and every intermediate the verifier looks at.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use kclose_core::kclose::{Constants, Intermediates, Residuals};
use kclose_core::splitter::SplitRatios;
use kclose_core::{
    verify_report, Degenerate, DecompositionReport, DualDecompositionInput, GridFunction, Verification,
};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SettingSpec};
use crate::corpus::Payload;
use crate::experiments::{CaseOutcome, ExperimentOutcome, GridOutcome, RefinementRow};
use crate::format::{self, FormatError};

pub const REPORT_SCHEMA: &str = "kclose-report/1";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("io on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Core(#[from] kclose_core::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

// ---------------------------------------------------------------------------
// Experiment reports

#[derive(Debug, Serialize)]
struct ExperimentReport<'a> {
    schema: &'static str,
    kind: &'static str,
    library_version: &'static str,
    config_hash: String,
    config: &'a ExperimentConfig,
    passed: bool,
    grids: &'a [GridOutcome],
    refinement: &'a [RefinementRow],
    failures: Vec<FailureEntry<'a>>,
}

#[derive(Debug, Serialize)]
struct FailureEntry<'a> {
    #[serde(rename = "M")]
    m: usize,
    case: usize,
    violations: &'a [crate::experiments::Violation],
}

#[derive(Debug, Serialize)]
struct ConstantRow<'a> {
    experiment: &'a str,
    setting: &'a str,
    #[serde(rename = "M")]
    m: usize,
    p: f64,
    constant: &'a str,
    value: f64,
    argmax_case: Option<usize>,
}

#[derive(Debug, Serialize)]
struct RefinementCsvRow<'a> {
    experiment: &'a str,
    setting: &'a str,
    constant: &'a str,
    #[serde(rename = "M_coarse")]
    m_coarse: usize,
    #[serde(rename = "M_fine")]
    m_fine: usize,
    value_coarse: f64,
    value_fine: f64,
    drift_percent: f64,
    threshold_percent: Option<f64>,
    passed: bool,
}

/// Paths written by [`write_experiment`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrittenFiles {
    pub report: PathBuf,
    pub constants: PathBuf,
    pub refinement: PathBuf,
    pub certificates: Vec<PathBuf>,
    pub failures: Vec<PathBuf>,
}

pub fn constants_csv(out: &ExperimentOutcome) -> Result<Vec<u8>, ReportError> {
    let cfg = &out.config;
    let mut w = csv::Writer::from_writer(Vec::new());
    for g in &out.grids {
        for c in &g.constants {
            w.serialize(ConstantRow {
                experiment: cfg.experiment.as_str(),
                setting: cfg.setting.setting.as_str(),
                m: g.m,
                p: cfg.p,
                constant: c.name,
                value: c.value,
                argmax_case: c.argmax_case,
            })?;
        }
    }
    w.into_inner().map_err(|e| ReportError::Invalid(e.to_string()))
}

pub fn refinement_csv(out: &ExperimentOutcome) -> Result<Vec<u8>, ReportError> {
    let cfg = &out.config;
    let mut w = csv::Writer::from_writer(Vec::new());
    if out.refinement.is_empty() {
        // Header only: a single-grid run has nothing to compare.
        w.write_record([
            "experiment",
            "setting",
            "constant",
            "M_coarse",
            "M_fine",
            "value_coarse",
            "value_fine",
            "drift_percent",
            "threshold_percent",
            "passed",
        ])?;
    }
    for r in &out.refinement {
        w.serialize(RefinementCsvRow {
            experiment: cfg.experiment.as_str(),
            setting: cfg.setting.setting.as_str(),
            constant: r.constant,
            m_coarse: r.m_coarse,
            m_fine: r.m_fine,
            value_coarse: r.coarse,
            value_fine: r.fine,
            drift_percent: r.drift_percent,
            threshold_percent: r.threshold_percent,
            passed: r.passed,
        })?;
    }
    w.into_inner().map_err(|e| ReportError::Invalid(e.to_string()))
}

/// Writes the report, both CSV tables, certificates for retained
/// decompositions and dumps of failing cases under `dir`.
pub fn write_experiment(dir: &Path, out: &ExperimentOutcome) -> Result<WrittenFiles, ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let exp = out.config.experiment.as_str();
    let failures: Vec<FailureEntry<'_>> = out
        .failing_cases()
        .map(|(m, c)| FailureEntry {
            m,
            case: c.id,
            violations: &c.violations,
        })
        .collect();
    let report = dir.join(format!("{exp}.report.json"));
    write_json(
        &report,
        &ExperimentReport {
            schema: REPORT_SCHEMA,
            kind: "experiment",
            library_version: kclose_core::VERSION,
            config_hash: out.config.hash(),
            config: &out.config,
            passed: out.passed,
            grids: &out.grids,
            refinement: &out.refinement,
            failures,
        },
    )?;
    let constants = dir.join(format!("{exp}.constants.csv"));
    fs::write(&constants, constants_csv(out)?).map_err(io_err(&constants))?;
    let refinement = dir.join(format!("{exp}.refinement.csv"));
    fs::write(&refinement, refinement_csv(out)?).map_err(io_err(&refinement))?;

    let mut certificates = Vec::new();
    let mut dumped = Vec::new();
    for g in &out.grids {
        let spec = SettingSpec {
            m: g.m,
            ..out.config.setting.clone()
        };
        for c in &g.cases {
            let stem = format!("{exp}-M{}-case{:04}", g.m, c.id);
            if let Some(rep) = &c.report {
                if c.passed() {
                    let input = retained_input(c).ok_or_else(|| ReportError::Invalid("report without input".into()))?;
                    let cdir = dir.join("certificates");
                    certificates.push(write_certificate(&cdir, &stem, &spec, input, rep)?);
                }
            }
            if !c.passed() {
                dumped.push(dump_failure(&dir.join("failures"), &stem, &spec, c)?);
            }
        }
    }
    Ok(WrittenFiles {
        report,
        constants,
        refinement,
        certificates,
        failures: dumped,
    })
}

fn retained_input(c: &CaseOutcome) -> Option<&DualDecompositionInput> {
    match &c.case.as_deref()?.payload {
        Payload::Decompose { input } => Some(input),
        _ => None,
    }
}

fn dump_failure(dir: &Path, stem: &str, spec: &SettingSpec, c: &CaseOutcome) -> Result<PathBuf, ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    if let (Some(rep), Some(input)) = (&c.report, retained_input(c)) {
        write_certificate(dir, stem, spec, input, rep)?;
    }
    let mut files = BTreeMap::new();
    if let Some(case) = &c.case {
        for (name, f) in case.grids() {
            let file = format!("{stem}.{name}.bin");
            format::write_grid(&dir.join(&file), f)?;
            files.insert(name, file);
        }
    }
    let path = dir.join(format!("{stem}.failure.json"));
    write_json(
        &path,
        &serde_json::json!({
            "schema": REPORT_SCHEMA,
            "kind": "failure",
            "setting": spec,
            "case": c,
            "grids": files,
        }),
    )?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Certificates

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateConstants {
    pub cg: f64,
    pub ch: f64,
    pub g1_terms: [f64; 4],
    pub phi_b_split: [f64; 2],
    pub one_minus_cut_ratio: f64,
    pub h1_tail_ratio: f64,
    pub split_ratios: [f64; 4],
    pub cut_slack: f64,
    pub cut_max_modulus: f64,
    pub limit_form_excess: f64,
}

impl From<&Constants> for CertificateConstants {
    fn from(c: &Constants) -> Self {
        Self {
            cg: c.cg,
            ch: c.ch,
            g1_terms: c.g1_terms,
            phi_b_split: c.phi_b_split,
            one_minus_cut_ratio: c.one_minus_cut_ratio,
            h1_tail_ratio: c.h1_tail_ratio,
            split_ratios: [c.split.u1, c.split.u2, c.split.u3, c.split.u4],
            cut_slack: c.cut_slack,
            cut_max_modulus: c.cut_max_modulus,
            limit_form_excess: c.limit_form_excess,
        }
    }
}

impl From<&CertificateConstants> for Constants {
    fn from(c: &CertificateConstants) -> Self {
        let [u1, u2, u3, u4] = c.split_ratios;
        Self {
            cg: c.cg,
            ch: c.ch,
            g1_terms: c.g1_terms,
            phi_b_split: c.phi_b_split,
            one_minus_cut_ratio: c.one_minus_cut_ratio,
            h1_tail_ratio: c.h1_tail_ratio,
            split: SplitRatios { u1, u2, u3, u4 },
            cut_slack: c.cut_slack,
            cut_max_modulus: c.cut_max_modulus,
            limit_form_excess: c.limit_form_excess,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateResiduals {
    pub identity: f64,
    pub phi_u: f64,
    pub ph: f64,
    pub a: f64,
}

/// The JSON half of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub kind: String,
    pub library_version: String,
    pub setting: SettingSpec,
    pub p: f64,
    pub gamma: u32,
    pub r: f64,
    pub s: f64,
    pub lambda: f64,
    pub degenerate: Option<String>,
    pub degrees: [usize; 2],
    pub converged: bool,
    pub constants: CertificateConstants,
    pub residuals: CertificateResiduals,
    /// Sample indices of the exceedance set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exceed: Option<Vec<usize>>,
    /// Array name to sidecar file, relative to the JSON file.
    pub grids: BTreeMap<String, String>,
}

const INPUT_NAMES: [&str; 3] = ["f", "g", "h"];
const OUTPUT_NAMES: [&str; 2] = ["g1", "h1"];
const INTERMEDIATE_NAMES: [&str; 11] = [
    "pg", "ph", "a", "b", "u", "split_cut", "phi", "cut", "witness", "psi", "phi_u",
];

fn intermediate_grids(im: &Intermediates) -> [&GridFunction; 11] {
    [
        &im.pg,
        &im.ph,
        &im.a,
        &im.b,
        &im.u,
        &im.split_cut,
        &im.phi,
        &im.cut,
        &im.witness,
        &im.psi,
        &im.phi_u,
    ]
}

/// Writes `<dir>/<stem>.json` and its sidecars and returns the JSON path.
pub fn write_certificate(
    dir: &Path,
    stem: &str,
    spec: &SettingSpec,
    input: &DualDecompositionInput,
    rep: &DecompositionReport,
) -> Result<PathBuf, ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut arrays: Vec<(&str, &GridFunction)> = vec![
        ("f", &input.f),
        ("g", &input.g),
        ("h", &input.h),
        ("g1", &rep.g1),
        ("h1", &rep.h1),
    ];
    if let Some(im) = &rep.intermediates {
        arrays.extend(INTERMEDIATE_NAMES.into_iter().zip(intermediate_grids(im)));
    }
    let mut grids = BTreeMap::new();
    for (name, f) in arrays {
        let file = format!("{stem}.{name}.bin");
        format::write_grid(&dir.join(&file), f)?;
        grids.insert(name.to_string(), file);
    }
    let cert = Certificate {
        schema: REPORT_SCHEMA.into(),
        kind: "decomposition".into(),
        library_version: kclose_core::VERSION.into(),
        setting: spec.clone(),
        p: rep.p,
        gamma: rep.gamma,
        r: rep.r,
        s: rep.s,
        lambda: rep.lambda,
        degenerate: rep.degenerate.map(|d| d.name().to_string()),
        degrees: rep.degrees,
        converged: rep.converged,
        constants: (&rep.constants).into(),
        residuals: CertificateResiduals {
            identity: rep.residuals.identity,
            phi_u: rep.residuals.phi_u,
            ph: rep.residuals.ph,
            a: rep.residuals.a,
        },
        exceed: rep
            .intermediates
            .as_ref()
            .map(|im| im.exceed.iter().enumerate().filter(|e| *e.1).map(|e| e.0).collect()),
        grids,
    };
    let path = dir.join(format!("{stem}.json"));
    write_json(&path, &cert)?;
    Ok(path)
}

/// A certificate read back into core types.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCertificate {
    pub certificate: Certificate,
    pub input: DualDecompositionInput,
    pub report: DecompositionReport,
}

fn parse_degenerate(name: Option<&str>) -> Result<Option<Degenerate>, ReportError> {
    match name {
        None => Ok(None),
        Some("r=0") => Ok(Some(Degenerate::ZeroL1Part)),
        Some("s=0") => Ok(Some(Degenerate::ZeroLqPart)),
        Some(other) => Err(ReportError::Invalid(format!("unknown degenerate branch {other:?}"))),
    }
}

pub fn load_certificate(path: &Path) -> Result<LoadedCertificate, ReportError> {
    let text = fs::read(path).map_err(io_err(path))?;
    let cert: Certificate = serde_json::from_slice(&text)?;
    if cert.kind != "decomposition" {
        return Err(ReportError::Invalid(format!("{} is a {:?} document, not a certificate", path.display(), cert.kind)));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let load = |name: &str| -> Result<GridFunction, ReportError> {
        let file = cert
            .grids
            .get(name)
            .ok_or_else(|| ReportError::Invalid(format!("certificate lacks array {name:?}")))?;
        Ok(format::read_grid(&base.join(file))?)
    };
    let setting = cert.setting.build()?;
    let [f, g, h] = INPUT_NAMES.map(load);
    let input = DualDecompositionInput::new(f?, g?, h?, setting, cert.p)?;
    let [g1, h1] = OUTPUT_NAMES.map(load);
    let intermediates = if INTERMEDIATE_NAMES.iter().all(|n| cert.grids.contains_key(*n)) {
        let [pg, ph, a, b, u, split_cut, phi, cut, witness, psi, phi_u] = INTERMEDIATE_NAMES.map(load);
        let len = input.f.len();
        let mut exceed = vec![false; len];
        for &i in cert.exceed.as_deref().unwrap_or(&[]) {
            *exceed
                .get_mut(i)
                .ok_or_else(|| ReportError::Invalid(format!("exceedance index {i} out of range")))? = true;
        }
        Some(Intermediates {
            pg: pg?,
            ph: ph?,
            a: a?,
            b: b?,
            exceed,
            u: u?,
            split_cut: split_cut?,
            phi: phi?,
            cut: cut?,
            witness: witness?,
            psi: psi?,
            phi_u: phi_u?,
        })
    } else {
        None
    };
    let report = DecompositionReport {
        g1: g1?,
        h1: h1?,
        r: cert.r,
        s: cert.s,
        lambda: cert.lambda,
        p: cert.p,
        gamma: cert.gamma,
        degenerate: parse_degenerate(cert.degenerate.as_deref())?,
        degrees: cert.degrees,
        converged: cert.converged,
        intermediates,
        constants: (&cert.constants).into(),
        residuals: Residuals {
            identity: cert.residuals.identity,
            phi_u: cert.residuals.phi_u,
            ph: cert.residuals.ph,
            a: cert.residuals.a,
        },
    };
    Ok(LoadedCertificate {
        certificate: cert,
        input,
        report,
    })
}

/// Loads a certificate and re-checks it from its arrays alone.
pub fn verify_certificate(path: &Path) -> Result<Verification, ReportError> {
    let loaded = load_certificate(path)?;
    Ok(verify_report(&loaded.report, &loaded.input))
}
