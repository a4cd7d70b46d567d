//! Run configuration: one TOML file per run, unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tw_core::basis::ManifoldSpec;
use tw_core::experiments::{NegativeEnergyOptions, PlaneOptions};
use tw_core::minimizer::{ProblemSpec, Tolerances};
use tw_core::operators::KillingSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifySpectrum,
    Minimize,
    ScaleExperiment,
    Perturb,
    TwoNonlinearity,
    NegativeEnergy,
    CcDiagnose,
    GnScan,
    ScalingIdentities,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::VerifySpectrum => "verify-spectrum",
            Self::Minimize => "minimize",
            Self::ScaleExperiment => "scale-experiment",
            Self::Perturb => "perturb",
            Self::TwoNonlinearity => "two-nonlinearity",
            Self::NegativeEnergy => "negative-energy",
            Self::CcDiagnose => "cc-diagnose",
            Self::GnScan => "gn-scan",
            Self::ScalingIdentities => "scaling-identities",
        }
    }
}

/// The file as written by the user, or as echoed into a manifest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifold: Option<ManifoldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub killing: Option<KillingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSpec>,
    /// Overrides `problem.tolerances`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<toml::Table>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs serialize to TOML")
    }
}

/// Values given on the command line; each wins over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumExperiment {
    pub dims: Vec<usize>,
    pub k_max: usize,
    /// Values of `α` used for every `n`.
    pub alphas: Vec<f64>,
    /// Values of `α - (n - 1)` used for every `n`.
    pub alpha_offsets: Vec<f64>,
    pub eigenstructure: bool,
}

impl Default for SpectrumExperiment {
    fn default() -> Self {
        Self { dims: vec![2, 3, 4], k_max: 10, alphas: vec![0.0, 0.5], alpha_offsets: vec![-1e-6, 0.0, 0.5], eigenstructure: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepExperiment {
    pub m_mass: f64,
    pub p: f64,
    pub a: f64,
    pub scales: Vec<f64>,
    pub n_random_starts: usize,
}

impl Default for SweepExperiment {
    fn default() -> Self {
        Self { m_mass: 1.0, p: 3.0, a: 1.0, scales: (0..7).map(|j| f64::from(1u32 << j)).collect(), n_random_starts: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbExperiment {
    pub x_pp: KillingSpec,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "fifty")]
    pub n_fields: usize,
}

fn default_eps() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3]
}

fn fifty() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoExperiment {
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    pub beta: f64,
    pub n_random_starts: usize,
}

impl Default for TwoExperiment {
    fn default() -> Self {
        Self { lambda: 1.0, p: 2.0, q: 3.0, beta: 1.0, n_random_starts: 3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimPower {
    pub n: usize,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegativeEnergyExperiment {
    pub cases: Vec<DimPower>,
    pub beta: f64,
    pub options: NegativeEnergyOptions,
}

impl Default for NegativeEnergyExperiment {
    fn default() -> Self {
        Self {
            cases: vec![DimPower { n: 1, p: 2.0 }, DimPower { n: 2, p: 2.0 }],
            beta: 1.0,
            options: NegativeEnergyOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CcExperiment {
    pub p: f64,
    pub beta: f64,
    pub len: usize,
    pub per_kind: usize,
    /// `I_β` estimates for the strict-subadditivity check; needs `[problem]`.
    pub lemma_betas: Vec<f64>,
    pub sigma: f64,
}

impl Default for CcExperiment {
    fn default() -> Self {
        Self { p: 3.0, beta: 1.0, len: 8, per_kind: 10, lemma_betas: Vec::new(), sigma: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GnExperiment {
    pub lambda: f64,
    pub m_mass: f64,
    pub p: f64,
    pub n_samples: usize,
    pub gate_dims: Vec<u32>,
    /// Gate exponents are `p = j / gate_denominator` for `1 < p ≤ gate_max_p`.
    pub gate_denominator: i64,
    pub gate_max_p: i64,
}

impl Default for GnExperiment {
    fn default() -> Self {
        Self { lambda: 0.0, m_mass: 1.0, p: 3.0, n_samples: 20, gate_dims: vec![1, 2, 3, 4], gate_denominator: 12, gate_max_p: 8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingCase {
    pub sigma: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitiesExperiment {
    pub amplitude: f64,
    pub widths: Vec<f64>,
    pub p: f64,
    pub rs: Vec<f64>,
    pub cases: Vec<ScalingCase>,
    pub grid: PlaneOptions,
    /// Largest accepted relative error on the finer grid.
    pub tolerance: f64,
}

impl Default for IdentitiesExperiment {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            widths: vec![1.0, 1.5],
            p: 3.0,
            rs: vec![2.0, 4.0, 8.0],
            cases: vec![ScalingCase { sigma: 1.0, a: 1.0, b: 1.0 }, ScalingCase { sigma: 1.0, a: 1.0, b: 0.5 }],
            grid: PlaneOptions::default(),
            tolerance: 1e-6,
        }
    }
}

/// Experiment block of the resolved command.
#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Spectrum(SpectrumExperiment),
    None,
    Sweep(SweepExperiment),
    Perturb(PerturbExperiment),
    Two(TwoExperiment),
    NegativeEnergy(NegativeEnergyExperiment),
    Cc(CcExperiment),
    Gn(GnExperiment),
    Identities(IdentitiesExperiment),
}

/// A config with every default filled in and the command fixed.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub command: Command,
    pub seed: u64,
    pub output: PathBuf,
    pub threads: Option<usize>,
    pub manifold: Option<ManifoldSpec>,
    pub killing: KillingSpec,
    pub problem: Option<ProblemSpec>,
    pub experiment: Experiment,
}

fn typed<T: DeserializeOwned + Default>(t: &Option<toml::Table>) -> Result<T, ConfigError> {
    match t {
        None => Ok(T::default()),
        Some(t) => t.clone().try_into().map_err(|e: toml::de::Error| ConfigError::Parse(format!("[experiment]: {e}"))),
    }
}

fn required<T: DeserializeOwned>(t: &Option<toml::Table>, what: &str) -> Result<T, ConfigError> {
    match t {
        None => Err(ConfigError::Invalid(format!("[experiment] is required ({what})"))),
        Some(t) => t.clone().try_into().map_err(|e: toml::de::Error| ConfigError::Parse(format!("[experiment]: {e}"))),
    }
}

fn need<T: Clone>(v: &Option<T>, block: &str, command: Command) -> Result<T, ConfigError> {
    v.clone().ok_or_else(|| ConfigError::Invalid(format!("{} needs a [{block}] block", command.name())))
}

pub const DEFAULT_OUTPUT: &str = "tw-out";

impl Resolved {
    pub fn new(cfg: &RunConfig, command: Command, ov: &Overrides) -> Result<Self, ConfigError> {
        if let Some(c) = cfg.command {
            if c != command {
                return Err(ConfigError::Invalid(format!(
                    "config is for {} but {} was requested",
                    c.name(),
                    command.name()
                )));
            }
        }
        let seed = ov.seed.or(cfg.seed).unwrap_or(0);
        let output = ov.output.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| DEFAULT_OUTPUT.into());
        let threads = ov.threads.or(cfg.threads);
        if threads == Some(0) {
            return Err(ConfigError::Invalid("threads must be positive".into()));
        }
        let mut problem = cfg.problem.clone();
        if let Some(p) = problem.as_mut() {
            p.seed = seed;
            if let Some(t) = cfg.tolerances {
                p.tolerances = t;
            }
        }
        let ex = &cfg.experiment;
        let no_experiment = |cmd: Command| -> Result<Experiment, ConfigError> {
            match ex {
                Some(_) => Err(ConfigError::Invalid(format!("{} takes no [experiment] block", cmd.name()))),
                None => Ok(Experiment::None),
            }
        };
        let experiment = match command {
            Command::VerifySpectrum => Experiment::Spectrum(typed(ex)?),
            Command::Minimize => {
                need(&cfg.manifold, "manifold", command)?;
                need(&problem, "problem", command)?;
                no_experiment(command)?
            }
            Command::ScaleExperiment => {
                need(&cfg.manifold, "manifold", command)?;
                Experiment::Sweep(typed(ex)?)
            }
            Command::Perturb => {
                need(&cfg.manifold, "manifold", command)?;
                need(&problem, "problem", command)?;
                Experiment::Perturb(required(ex, "x_pp")?)
            }
            Command::TwoNonlinearity => {
                need(&cfg.manifold, "manifold", command)?;
                Experiment::Two(typed(ex)?)
            }
            Command::NegativeEnergy => Experiment::NegativeEnergy(typed(ex)?),
            Command::CcDiagnose => {
                if !matches!(cfg.manifold, Some(ManifoldSpec::Radial(_))) {
                    return Err(ConfigError::Invalid("cc-diagnose needs a radial [manifold]".into()));
                }
                let cc: CcExperiment = typed(ex)?;
                if !cc.lemma_betas.is_empty() && problem.is_none() {
                    return Err(ConfigError::Invalid("lemma_betas needs a [problem] block".into()));
                }
                Experiment::Cc(cc)
            }
            Command::GnScan => {
                need(&cfg.manifold, "manifold", command)?;
                Experiment::Gn(typed(ex)?)
            }
            Command::ScalingIdentities => Experiment::Identities(typed(ex)?),
        };
        Ok(Self {
            command,
            seed,
            output,
            threads,
            manifold: cfg.manifold.clone(),
            killing: cfg.killing.clone().unwrap_or(KillingSpec::Zero),
            problem,
            experiment,
        })
    }

    /// The resolved config in file form.
    pub fn to_config(&self) -> RunConfig {
        let experiment = match &self.experiment {
            Experiment::None => None,
            Experiment::Spectrum(e) => table(e),
            Experiment::Sweep(e) => table(e),
            Experiment::Perturb(e) => table(e),
            Experiment::Two(e) => table(e),
            Experiment::NegativeEnergy(e) => table(e),
            Experiment::Cc(e) => table(e),
            Experiment::Gn(e) => table(e),
            Experiment::Identities(e) => table(e),
        };
        RunConfig {
            command: Some(self.command),
            seed: Some(self.seed),
            output: Some(self.output.clone()),
            threads: self.threads,
            manifold: self.manifold.clone(),
            killing: Some(self.killing.clone()),
            tolerances: None,
            problem: self.problem.clone(),
            experiment,
        }
    }

    /// SHA-256 of the resolved config without the output location and thread
    /// count, as 12 hex digits.
    pub fn param_hash(&self) -> String {
        let mut c = self.to_config();
        c.output = None;
        c.threads = None;
        let digest = Sha256::digest(c.to_toml().as_bytes());
        hex::encode(digest)[..12].to_string()
    }
}

fn table<T: Serialize>(v: &T) -> Option<toml::Table> {
    Some(toml::Table::try_from(v).expect("experiment blocks serialize to TOML tables"))
}
