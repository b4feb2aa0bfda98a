//! Experiment configuration: setting specs, corpus laws, grid lists.

use std::fmt;
use std::str::FromStr;

use kclose_core::{Complex64, GridDomain, InnerFunction, Setting};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("law `{law}` cannot drive the `{experiment}` experiment in setting `{setting}`")]
    ImpossibleLaw {
        law: Law,
        experiment: Experiment,
        setting: String,
    },
    #[error("setting: {0}")]
    Setting(#[from] kclose_core::Error),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaSpec {
    Monomial {
        k: u32,
    },
    Blaschke {
        /// Zeros as `[re, im]` pairs inside the unit disc.
        zeros: Vec<[f64; 2]>,
        #[serde(default = "unit")]
        unimodular: [f64; 2],
    },
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

fn parse_complex(s: &str) -> Result<Complex64, ConfigError> {
    let s = s.trim();
    let bad = || invalid(format!("cannot read `{s}` as a complex number"));
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not an exponent sign or the leading one.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            let im_text = &body[i..];
            let im = match im_text {
                "+" => 1.0,
                "-" => -1.0,
                t => t.parse::<f64>().map_err(|_| bad())?,
            };
            Ok(Complex64::new(re, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                t => t.parse::<f64>().map_err(|_| bad())?,
            };
            Ok(Complex64::new(0.0, im))
        }
    }
}

impl FromStr for ThetaSpec {
    type Err = ConfigError;

    /// `monomial:k` or `blaschke:a1,a2,...` with each zero written as
    /// `0.5`, `0.3+0.2i` or `-0.1i`.
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("theta `{s}` must look like monomial:k or blaschke:a1,a2,...")))?;
        match kind {
            "monomial" => {
                let k = rest
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| invalid(format!("monomial degree `{rest}` is not a nonnegative integer")))?;
                Ok(ThetaSpec::Monomial { k })
            }
            "blaschke" => {
                let zeros = rest
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| parse_complex(t).map(|z| [z.re, z.im]))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(ThetaSpec::Blaschke {
                    zeros,
                    unimodular: unit(),
                })
            }
            other => Err(invalid(format!("unknown theta kind `{other}`"))),
        }
    }
}

impl fmt::Display for ThetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaSpec::Monomial { k } => write!(f, "monomial:{k}"),
            ThetaSpec::Blaschke { zeros, .. } => {
                write!(f, "blaschke:")?;
                for (i, [re, im]) in zeros.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{re}{im:+}i")?;
                }
                Ok(())
            }
        }
    }
}

impl ThetaSpec {
    pub fn build(&self, domain: GridDomain) -> Result<InnerFunction, ConfigError> {
        match self {
            ThetaSpec::Monomial { k } => Ok(InnerFunction::monomial(domain, *k)?),
            ThetaSpec::Blaschke { zeros, unimodular } => {
                if zeros.len() > 4 {
                    log::warn!("Blaschke product of degree {} exceeds the tested range", zeros.len());
                }
                let zs = zeros.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                Ok(InnerFunction::blaschke(domain, zs, Complex64::new(unimodular[0], unimodular[1]))?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingName {
    ModelSpace,
    Bitorus,
}

impl FromStr for SettingName {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "model_space" => Ok(SettingName::ModelSpace),
            "bitorus" => Ok(SettingName::Bitorus),
            other => Err(invalid(format!("unknown setting `{other}`, expected model_space or bitorus"))),
        }
    }
}

impl SettingName {
    pub fn as_str(self) -> &'static str {
        match self {
            SettingName::ModelSpace => "model_space",
            SettingName::Bitorus => "bitorus",
        }
    }
}

/// `{"setting": "model_space", "M": 1024, "theta": {"kind": "monomial", "k": 2}}`
/// or `{"setting": "bitorus", "M": 256}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingSpec {
    pub setting: SettingName,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaSpec>,
}

impl SettingSpec {
    pub fn model_space(m: usize, theta: ThetaSpec) -> Self {
        Self {
            setting: SettingName::ModelSpace,
            m,
            theta: Some(theta),
        }
    }

    pub fn bitorus(m: usize) -> Self {
        Self {
            setting: SettingName::Bitorus,
            m,
            theta: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check_grid(self.m)?;
        match (self.setting, &self.theta) {
            (SettingName::ModelSpace, None) => Err(invalid("model_space needs an inner function theta")),
            (SettingName::Bitorus, Some(_)) => Err(invalid("bitorus takes no inner function")),
            _ => Ok(()),
        }
    }

    /// The setting realized on an `m`-point grid (per axis).
    pub fn build_at(&self, m: usize) -> Result<Setting, ConfigError> {
        check_grid(m)?;
        match self.setting {
            SettingName::ModelSpace => {
                let theta = self
                    .theta
                    .as_ref()
                    .ok_or_else(|| invalid("model_space needs an inner function theta"))?;
                Ok(Setting::model_space(theta.build(GridDomain::circle(m)?)?))
            }
            SettingName::Bitorus => Ok(Setting::bitorus(GridDomain::torus(m)?)?),
        }
    }

    pub fn build(&self) -> Result<Setting, ConfigError> {
        self.build_at(self.m)
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.theta, Some(ThetaSpec::Blaschke { .. }))
    }
}

fn check_grid(m: usize) -> Result<(), ConfigError> {
    if m < GridDomain::MIN_SIZE || !m.is_power_of_two() {
        return Err(invalid(format!("grid size {m} must be a power of two ≥ {}", GridDomain::MIN_SIZE)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    RandomPolynomial,
    Spike,
    TwoScale,
    Constant,
}

impl FromStr for Law {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "random_polynomial" => Ok(Law::RandomPolynomial),
            "spike" => Ok(Law::Spike),
            "two_scale" => Ok(Law::TwoScale),
            "constant" => Ok(Law::Constant),
            other => Err(invalid(format!("unknown corpus law `{other}`"))),
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Law::RandomPolynomial => "random_polynomial",
            Law::Spike => "spike",
            Law::TwoScale => "two_scale",
            Law::Constant => "constant",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Cutoff,
    Split,
    Decompose,
    Weaktype,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Cutoff => "cutoff",
            Experiment::Split => "split",
            Experiment::Decompose => "decompose",
            Experiment::Weaktype => "weaktype",
        }
    }

    pub fn default_law(self) -> Law {
        match self {
            Experiment::Cutoff | Experiment::Split => Law::RandomPolynomial,
            Experiment::Decompose => Law::TwoScale,
            Experiment::Weaktype => Law::Spike,
        }
    }

    pub fn admits(self, law: Law) -> bool {
        match self {
            Experiment::Cutoff => true,
            Experiment::Split => matches!(law, Law::RandomPolynomial | Law::Spike),
            Experiment::Decompose => matches!(law, Law::RandomPolynomial | Law::TwoScale),
            Experiment::Weaktype => matches!(law, Law::RandomPolynomial | Law::Spike),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub seed: u64,
    pub count: usize,
    pub law: Law,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub setting: SettingSpec,
    pub p: f64,
    /// Grid sizes in increasing order; consecutive pairs form the refinement
    /// study. Defaults to `[setting.M]`.
    #[serde(default)]
    pub grids: Vec<usize>,
    pub corpus: CorpusSpec,
    /// Multipliers of `median|f|` for the split experiment.
    #[serde(default = "default_lambda_sweep")]
    pub lambda_sweep: Vec<f64>,
    /// Target `‖g‖₁/‖h‖_q` ratios cycled through by the two_scale law.
    #[serde(default = "default_ratios")]
    pub ratios: Vec<f64>,
}

pub fn default_lambda_sweep() -> Vec<f64> {
    (-4..=4).map(|e| 2f64.powi(e)).collect()
}

pub fn default_ratios() -> Vec<f64> {
    vec![0.01, 1.0, 100.0]
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, setting: SettingSpec, p: f64, seed: u64, count: usize) -> Self {
        Self {
            experiment,
            grids: vec![setting.m],
            setting,
            p,
            corpus: CorpusSpec {
                seed,
                count,
                law: experiment.default_law(),
            },
            lambda_sweep: default_lambda_sweep(),
            ratios: default_ratios(),
        }
    }

    pub fn with_grids(mut self, grids: &[usize]) -> Self {
        self.grids = grids.to_vec();
        self
    }

    pub fn with_law(mut self, law: Law) -> Self {
        self.corpus.law = law;
        self
    }

    pub fn grids(&self) -> Vec<usize> {
        if self.grids.is_empty() {
            vec![self.setting.m]
        } else {
            self.grids.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.setting.validate()?;
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(invalid(format!("p must lie in (1, ∞), got {}", self.p)));
        }
        if self.corpus.count == 0 {
            return Err(invalid("corpus count must be at least 1"));
        }
        let grids = self.grids();
        for &m in &grids {
            check_grid(m)?;
        }
        if grids.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid sizes must be strictly increasing"));
        }
        if self.lambda_sweep.is_empty() || self.lambda_sweep.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(invalid("lambda_sweep must hold positive finite multipliers"));
        }
        if self.ratios.is_empty() || self.ratios.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(invalid("ratios must be positive and finite"));
        }
        let law = self.corpus.law;
        if !self.experiment.admits(law) {
            return Err(ConfigError::ImpossibleLaw {
                law,
                experiment: self.experiment,
                setting: self.setting.setting.as_str().into(),
            });
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
