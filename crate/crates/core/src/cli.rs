//! Experiment files, seeded replication and CSV output behind the `sensopt`
//! binary.
//!
//! Run CSV columns: `experiment,seed,n_eval,m_best,solves_used,termination`,
//! one row per seed in increasing seed order, followed by two summary rows
//! whose `seed` field is `median` and `iqr` (interquartile range); their
//! `termination` field is empty. Sensitivity CSV columns:
//! `index,first_order,total,n_base`. Reals are written with 17 significant
//! digits.

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::BasisConfig;
use crate::constraints::{Experiment, SobolConstraint};
use crate::error::Error;
use crate::optimizer::{self, RunConfig, RunResult, DEFAULT_MAX_CONSECUTIVE_INFEASIBLE};
use crate::saltelli;
use crate::testbed::{AffineBox, Objective, TestFunction};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad configuration; exit code 2.
    Config(String),
    /// Failure while running; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn config_err(field: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {e}"))
}

fn runtime_err(e: Error) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineConstraint {
    /// 1-based coordinate lists, e.g. `[[1], [1, 2]]`.
    pub family: Vec<Vec<usize>>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSource {
    Preset(String),
    Inline(Vec<InlineConstraint>),
    FromSaltelli {
        n_base: usize,
        margin: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        assume_zero: bool,
    },
}

impl Default for ConstraintSource {
    fn default() -> Self {
        ConstraintSource::Preset("A".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Text(String),
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec::Text("1..20".into())
    }
}

/// Parses `"1..20"` or `"1-20"` (inclusive ranges), `"3"`, or comma lists of
/// either.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let range = part.split_once("..").or_else(|| part.split_once('-'));
        match range {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| format!("bad seed range `{part}`"))?;
                let b: u64 = b
                    .trim()
                    .trim_start_matches('=')
                    .parse()
                    .map_err(|_| format!("bad seed range `{part}`"))?;
                if a > b {
                    return Err(format!("empty seed range `{part}`"));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| format!("bad seed `{part}`"))?),
        }
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(seeds)
}

impl SeedSpec {
    fn resolve(&self) -> Result<Vec<u64>, String> {
        match self {
            SeedSpec::List(v) if v.is_empty() => Err("no seeds given".into()),
            SeedSpec::List(v) => Ok(v.clone()),
            SeedSpec::Text(t) => parse_seeds(t),
        }
    }
}

fn default_objective() -> String {
    "rosenbrock3".into()
}

fn default_degree() -> usize {
    4
}

fn default_budget() -> usize {
    100
}

/// Contents of a `--spec` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Label in the `experiment` column; defaults to the preset tag.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "default_objective")]
    pub objective: String,
    #[serde(default, rename = "box")]
    pub bounds: Option<BoxSpec>,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub constraints: ConstraintSource,
    #[serde(default)]
    pub seeds: SeedSpec,
    #[serde(default)]
    pub max_consecutive_infeasible: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            name: None,
            objective: default_objective(),
            bounds: None,
            dim: None,
            degree: default_degree(),
            budget: default_budget(),
            constraints: ConstraintSource::default(),
            seeds: SeedSpec::default(),
            max_consecutive_infeasible: None,
            out: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("spec file: {e}")))
    }

    pub fn preset(tag: Experiment) -> Self {
        Self {
            constraints: ConstraintSource::Preset(tag.to_string()),
            ..Self::default()
        }
    }
}

/// Command-line values that take precedence over the spec file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub seeds: Option<String>,
    pub budget: Option<usize>,
    pub degree: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(p) = &self.preset {
            spec.constraints = ConstraintSource::Preset(p.clone());
            spec.name = None;
        }
        if let Some(s) = &self.seeds {
            spec.seeds = SeedSpec::Text(s.clone());
        }
        if let Some(b) = self.budget {
            spec.budget = b;
        }
        if let Some(d) = self.degree {
            spec.degree = d;
        }
        if let Some(o) = &self.out {
            spec.out = Some(o.clone());
        }
    }
}

/// A validated experiment ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub label: String,
    pub objective: Objective,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
}

pub fn resolve(spec: &ExperimentSpec) -> Result<ResolvedExperiment, CliError> {
    let func: TestFunction = spec.objective.parse().map_err(|e| config_err("objective", e))?;
    let dim = spec.dim.unwrap_or(func.default_dim());
    let bx = match &spec.bounds {
        Some(b) => Some(AffineBox::new(b.lo.clone(), b.hi.clone()).map_err(|e| config_err("box", e))?),
        None => None,
    };
    let objective = Objective::new(func, dim, bx).map_err(|e| config_err("dim", e))?;
    let basis = BasisConfig::new(dim, spec.degree).map_err(|e| config_err("degree", e))?;
    if spec.budget == 0 {
        return Err(config_err("budget", "must be >= 1"));
    }
    let seeds = spec.seeds.resolve().map_err(|e| config_err("seeds", e))?;

    let (default_label, constraints) = match &spec.constraints {
        ConstraintSource::Preset(tag) => {
            let exp: Experiment = tag.parse().map_err(|_| {
                config_err("preset", format!("unknown experiment `{tag}` (expected A, B, C or D)"))
            })?;
            if dim != 3 {
                return Err(config_err("preset", "presets A-D are defined for dimension 3"));
            }
            (exp.to_string(), exp.constraints())
        }
        ConstraintSource::Inline(list) => {
            let mut out = Vec::with_capacity(list.len());
            for c in list {
                let family: Vec<&[usize]> = c.family.iter().map(Vec::as_slice).collect();
                out.push(
                    SobolConstraint::from_members(&family, c.bound, dim)
                        .map_err(|e| config_err("constraints", e))?,
                );
            }
            ("custom".to_string(), out)
        }
        ConstraintSource::FromSaltelli {
            n_base,
            margin,
            seed,
            assume_zero,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let f = |u: &[f64]| objective.eval(u).unwrap_or(f64::NAN);
            let est = saltelli::estimate(f, dim, *n_base, &mut rng).map_err(|e| match e {
                Error::InvalidConfig(_) => config_err("from_saltelli", e),
                other => runtime_err(other),
            })?;
            let c = saltelli::suggest_bounds(&est, *margin, *assume_zero)
                .map_err(|e| config_err("from_saltelli", e))?;
            ("saltelli".to_string(), c)
        }
    };

    let mut config = RunConfig::new(basis, spec.budget, constraints, 0);
    config.max_consecutive_infeasible = spec
        .max_consecutive_infeasible
        .unwrap_or(DEFAULT_MAX_CONSECUTIVE_INFEASIBLE);
    if config.max_consecutive_infeasible == 0 {
        return Err(config_err("max_consecutive_infeasible", "must be >= 1"));
    }
    Ok(ResolvedExperiment {
        label: spec.name.clone().unwrap_or(default_label),
        objective,
        config,
        seeds,
    })
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub result: RunResult,
}

/// Runs every seed (in parallel) and returns results sorted by seed.
pub fn run_seeds(exp: &ResolvedExperiment) -> Result<Vec<SeedRun>, CliError> {
    let mut runs = exp
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut cfg = exp.config.clone();
            cfg.seed = seed;
            let f = |u: &[f64]| exp.objective.eval(u).unwrap_or(f64::NAN);
            optimizer::run(f, &cfg)
                .map(|result| SeedRun { seed, result })
                .map_err(|e| CliError::Runtime(format!("seed {seed}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    runs.sort_by_key(|r| r.seed);
    Ok(runs)
}

pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub median: f64,
    pub iqr: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Summary {
        median: quantile(&v, 0.5),
        iqr: quantile(&v, 0.75) - quantile(&v, 0.25),
    }
}

pub const RUN_HEADER: &str = "experiment,seed,n_eval,m_best,solves_used,termination";
pub const SENSITIVITY_HEADER: &str = "index,first_order,total,n_base";

pub fn run_csv(label: &str, runs: &[SeedRun]) -> String {
    let mut out = String::new();
    writeln!(out, "{RUN_HEADER}").unwrap();
    for r in runs {
        writeln!(
            out,
            "{label},{},{},{},{},{}",
            r.seed,
            r.result.n_eval,
            fmt_real(r.result.m_best),
            r.result.solves_used,
            r.result.termination.as_str()
        )
        .unwrap();
    }
    if !runs.is_empty() {
        let col = |f: &dyn Fn(&RunResult) -> f64| {
            summarize(&runs.iter().map(|r| f(&r.result)).collect::<Vec<_>>())
        };
        let n_eval = col(&|r| r.n_eval as f64);
        let m_best = col(&|r| r.m_best);
        let solves = col(&|r| r.solves_used as f64);
        writeln!(
            out,
            "{label},median,{},{},{},",
            fmt_real(n_eval.median),
            fmt_real(m_best.median),
            fmt_real(solves.median)
        )
        .unwrap();
        writeln!(
            out,
            "{label},iqr,{},{},{},",
            fmt_real(n_eval.iqr),
            fmt_real(m_best.iqr),
            fmt_real(solves.iqr)
        )
        .unwrap();
    }
    out
}

pub fn cmd_run(spec: &ExperimentSpec) -> Result<String, CliError> {
    let exp = resolve(spec)?;
    let runs = run_seeds(&exp)?;
    Ok(run_csv(&exp.label, &runs))
}

#[derive(Debug, Clone)]
pub struct SensitivityArgs {
    pub objective: String,
    pub dim: Option<usize>,
    pub bounds: Option<(f64, f64)>,
    pub n_base: usize,
    pub seed: u64,
}

pub fn cmd_sensitivity(args: &SensitivityArgs) -> Result<String, CliError> {
    let func: TestFunction = args.objective.parse().map_err(|e| config_err("objective", e))?;
    let dim = args.dim.unwrap_or(func.default_dim());
    let bx = match args.bounds {
        Some((lo, hi)) => Some(AffineBox::uniform(dim, lo, hi).map_err(|e| config_err("box", e))?),
        None => None,
    };
    let objective = Objective::new(func, dim, bx).map_err(|e| config_err("dim", e))?;
    if args.n_base < 2 {
        return Err(config_err("n-base", "must be >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let f = |u: &[f64]| objective.eval(u).unwrap_or(f64::NAN);
    let est = saltelli::estimate(f, dim, args.n_base, &mut rng).map_err(runtime_err)?;
    Ok(sensitivity_csv(&est))
}

pub fn sensitivity_csv(est: &saltelli::SensitivityEstimate) -> String {
    let mut out = String::new();
    writeln!(out, "{SENSITIVITY_HEADER}").unwrap();
    for i in 0..est.dim() {
        writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            fmt_real(est.first_order[i]),
            fmt_real(est.total[i]),
            est.n_base
        )
        .unwrap();
    }
    out
}
