use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use kclose::config::{Experiment, ExperimentConfig, Law, SettingName, SettingSpec, ThetaSpec};
use kclose::corpus::generate_corpus;
use kclose::experiments::{run_experiment, ExperimentOutcome, RunOptions};
use kclose::format;
use kclose::report::{self, write_experiment};
use serde::Serialize;

/// Numerical experiments for K-closedness of annihilator pairs.
#[derive(Debug, Parser)]
#[command(name = "kclose", version)]
struct Cli {
    /// Repeat for more log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build analytic cut-offs and check the pointwise bound and the O1 ratio.
    Cutoff(RunArgs),
    /// Split annihilator elements over a sweep of levels.
    Split(RunArgs),
    /// Decompose f = g + h into certified g1 + h1.
    Decompose(RunArgs),
    /// Weak-type ratio of the Riesz projection.
    Weaktype(RunArgs),
    /// Re-check certificates (a file or a directory of them).
    Verify { path: PathBuf },
    /// Write a corpus to disk without running anything.
    Corpus {
        #[arg(long, value_parser = parse_experiment)]
        experiment: Experiment,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment config as JSON; flags given explicitly override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "kclose-out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma separated grid sizes, increasing, e.g. 512,1024.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long)]
    setting: Option<SettingName>,
    /// monomial:k or blaschke:a1,a2,... (model space only).
    #[arg(long)]
    theta: Option<ThetaSpec>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    law: Option<Law>,
    /// Comma separated target ratios for the two_scale law.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    /// Write a certificate for every decomposition, not only failing ones.
    #[arg(long)]
    certificates: bool,
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    match s {
        "cutoff" => Ok(Experiment::Cutoff),
        "split" => Ok(Experiment::Split),
        "decompose" => Ok(Experiment::Decompose),
        "weaktype" => Ok(Experiment::Weaktype),
        _ => Err(format!("unknown experiment {s:?}")),
    }
}

/// Errors the user can fix by changing the invocation.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

impl RunArgs {
    fn resolve(&self, experiment: Experiment) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                let mut cfg: ExperimentConfig =
                    serde_json::from_slice(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
                cfg.experiment = experiment;
                cfg
            }
            None => {
                let spec = SettingSpec::model_space(1024, ThetaSpec::Monomial { k: 2 });
                ExperimentConfig::new(experiment, spec, 2.0, 0, 50)
            }
        };
        if let Some(name) = self.setting {
            cfg.setting = match name {
                SettingName::ModelSpace => SettingSpec::model_space(
                    cfg.setting.m,
                    cfg.setting.theta.clone().unwrap_or(ThetaSpec::Monomial { k: 2 }),
                ),
                SettingName::Bitorus => SettingSpec::bitorus(cfg.setting.m),
            };
        }
        if let Some(theta) = &self.theta {
            if cfg.setting.setting == SettingName::Bitorus {
                return Err(Usage("--theta only applies to the model_space setting".into()).into());
            }
            cfg.setting.theta = Some(theta.clone());
        }
        if let Some(grids) = &self.grid {
            let Some(&first) = grids.first() else {
                return Err(Usage("--grid needs at least one size".into()).into());
            };
            cfg.setting.m = first;
            cfg.grids = grids.clone();
        }
        if let Some(seed) = self.seed {
            cfg.corpus.seed = seed;
        }
        if let Some(n) = self.cases {
            cfg.corpus.count = n;
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(law) = self.law {
            cfg.corpus.law = law;
        } else if self.config.is_none() {
            cfg.corpus.law = experiment.default_law();
        }
        if let Some(r) = &self.ratios {
            cfg.ratios = r.clone();
        }
        cfg.validate().map_err(|e| Usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn print_summary(out: &ExperimentOutcome) {
    let cfg = &out.config;
    println!(
        "{} on {} (p = {}, {} cases, law {})",
        cfg.experiment,
        cfg.setting.setting.as_str(),
        cfg.p,
        cfg.corpus.count,
        cfg.corpus.law
    );
    for g in &out.grids {
        let failed = g.cases.iter().filter(|c| !c.passed()).count();
        println!("  M = {}: {failed} failing cases, {} at degree cap", g.m, g.unconverged_cases);
        for c in &g.constants {
            println!("    {:<26} {:>14.6e}", c.name, c.value);
        }
    }
    for r in out.refinement.iter().filter(|r| r.threshold_percent.is_some()) {
        println!(
            "  drift {:<10} {} -> {}: {:.3}% (limit {}%) {}",
            r.constant,
            r.m_coarse,
            r.m_fine,
            r.drift_percent,
            r.threshold_percent.unwrap_or(f64::NAN),
            if r.passed { "ok" } else { "FAIL" }
        );
    }
    println!("{}", if out.passed { "PASS" } else { "FAIL" });
}

fn run(experiment: Experiment, args: &RunArgs) -> anyhow::Result<bool> {
    let cfg = args.resolve(experiment)?;
    let opts = RunOptions {
        keep_reports: args.certificates,
    };
    let out = run_experiment(&cfg, opts)?;
    let files = write_experiment(&args.out, &out)?;
    print_summary(&out);
    println!("report: {}", files.report.display());
    if !files.certificates.is_empty() {
        println!("{} certificates in {}", files.certificates.len(), args.out.join("certificates").display());
    }
    for f in &files.failures {
        eprintln!("failing case dumped to {}", f.display());
    }
    Ok(out.passed)
}

fn certificate_paths(path: &Path) -> anyhow::Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut found = Vec::new();
    for entry in fs::read_dir(path).with_context(|| format!("reading {}", path.display()))? {
        let p = entry?.path();
        let is_json = p.extension().is_some_and(|e| e == "json");
        let is_failure = p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".failure.json"));
        if is_json && !is_failure && !p.to_string_lossy().ends_with(".report.json") {
            found.push(p);
        }
    }
    found.sort();
    if found.is_empty() {
        bail!(Usage(format!("no certificates under {}", path.display())));
    }
    Ok(found)
}

fn verify(path: &Path) -> anyhow::Result<bool> {
    let mut all = true;
    for p in certificate_paths(path)? {
        let v = report::verify_certificate(&p).with_context(|| format!("loading {}", p.display()))?;
        if v.passed {
            println!("{}: accepted ({} clauses)", p.display(), v.diagnostics.len());
        } else {
            all = false;
            println!("{}: REJECTED", p.display());
            for d in v.failed_clauses() {
                match &d.note {
                    Some(n) => println!("  {}: {n}", d.clause),
                    None => println!("  {}: {:e} > {:e}", d.clause, d.measured, d.tolerance),
                }
            }
        }
    }
    Ok(all)
}

#[derive(Debug, Serialize)]
struct CorpusManifest<'a> {
    schema: &'static str,
    kind: &'static str,
    library_version: &'static str,
    config_hash: String,
    config: &'a ExperimentConfig,
    cases: Vec<serde_json::Value>,
}

fn write_corpus(experiment: Experiment, args: &RunArgs) -> anyhow::Result<bool> {
    let cfg = args.resolve(experiment)?;
    let dir = args.out.join("corpus");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut cases = Vec::new();
    for m in cfg.grids() {
        for case in generate_corpus(&cfg, m)? {
            let mut files = serde_json::Map::new();
            for (name, f) in case.grids() {
                let file = format!("{experiment}-M{m}-case{:04}.{name}.bin", case.id);
                format::write_grid(&dir.join(&file), f)?;
                files.insert(name.into(), file.into());
            }
            cases.push(serde_json::json!({
                "M": m,
                "id": case.id,
                "construction": case.construction,
                "grids": files,
            }));
        }
    }
    let n = cases.len();
    let manifest = CorpusManifest {
        schema: report::REPORT_SCHEMA,
        kind: "corpus",
        library_version: kclose_core::VERSION,
        config_hash: cfg.hash(),
        config: &cfg,
        cases,
    };
    let path = dir.join(format!("{experiment}.corpus.json"));
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text)?;
    println!("{n} cases written, manifest {}", path.display());
    Ok(true)
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("KCLOSE_THREADS") {
        let n: usize = v.parse().map_err(|_| Usage(format!("KCLOSE_THREADS must be a count, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = init_threads().and_then(|()| match &cli.command {
        Command::Cutoff(a) => run(Experiment::Cutoff, a),
        Command::Split(a) => run(Experiment::Split, a),
        Command::Decompose(a) => run(Experiment::Decompose, a),
        Command::Weaktype(a) => run(Experiment::Weaktype, a),
        Command::Verify { path } => verify(path),
        Command::Corpus { experiment, run } => write_corpus(*experiment, run),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.chain().any(|c| c.is::<Usage>() || c.is::<kclose::config::ConfigError>());
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
