//! Run configuration: TOML text in, validated `RunConfig` out, with the defaulted keys recorded.

use serde::{Deserialize, Serialize};

use crate::bernstein::{section6_build_f, CertGrid, Continuity, PhiModel, SectionSixForm};
use crate::error::{Error, Result};
use crate::levy::{Modulation, ProcessModel};
use crate::potential::{BhpConfig, ExitTimeConfig, FactorizationConfig, HarnackConfig, PoissonKernelConfig};
use crate::sim::{Geometry, SamplerParams, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PhiEval,
    PhiCert,
    PhiSection6,
    LevyJ,
    LevyMu,
    LevyAsymp,
    LadderKappa,
    LadderRenewal,
    LadderInterval,
    SimExit,
    SimExitTime,
    Kernel,
    PoissonKernel,
    Harnack,
    Factorization,
    Bhp,
    ExitTime,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 17] = [
        ExperimentKind::PhiEval,
        ExperimentKind::PhiCert,
        ExperimentKind::PhiSection6,
        ExperimentKind::LevyJ,
        ExperimentKind::LevyMu,
        ExperimentKind::LevyAsymp,
        ExperimentKind::LadderKappa,
        ExperimentKind::LadderRenewal,
        ExperimentKind::LadderInterval,
        ExperimentKind::SimExit,
        ExperimentKind::SimExitTime,
        ExperimentKind::Kernel,
        ExperimentKind::PoissonKernel,
        ExperimentKind::Harnack,
        ExperimentKind::Factorization,
        ExperimentKind::Bhp,
        ExperimentKind::ExitTime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PhiEval => "phi_eval",
            ExperimentKind::PhiCert => "phi_cert",
            ExperimentKind::PhiSection6 => "phi_section6",
            ExperimentKind::LevyJ => "levy_j",
            ExperimentKind::LevyMu => "levy_mu",
            ExperimentKind::LevyAsymp => "levy_asymp",
            ExperimentKind::LadderKappa => "ladder_kappa",
            ExperimentKind::LadderRenewal => "ladder_renewal",
            ExperimentKind::LadderInterval => "ladder_interval",
            ExperimentKind::SimExit => "sim_exit",
            ExperimentKind::SimExitTime => "sim_exit_time",
            ExperimentKind::Kernel => "kernel",
            ExperimentKind::PoissonKernel => "poisson_kernel",
            ExperimentKind::Harnack => "harnack",
            ExperimentKind::Factorization => "factorization",
            ExperimentKind::Bhp => "bhp",
            ExperimentKind::ExitTime => "exit_time",
        }
    }

    /// Monte Carlo experiments; they validate geometry and draw samples.
    pub fn is_sampling(self) -> bool {
        matches!(
            self,
            ExperimentKind::LadderInterval
                | ExperimentKind::SimExit
                | ExperimentKind::SimExitTime
                | ExperimentKind::Kernel
                | ExperimentKind::PoissonKernel
                | ExperimentKind::Harnack
                | ExperimentKind::Factorization
                | ExperimentKind::Bhp
                | ExperimentKind::ExitTime
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiKind {
    #[default]
    Stable,
    Mixture,
    Section6,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulationKind {
    #[default]
    Unit,
    Constant,
    LogPeriodic,
}

fn two() -> usize {
    2
}
fn one() -> f64 {
    1.0
}
fn four() -> usize {
    4
}
fn eps() -> f64 {
    0.05
}

/// `[model]`: the symbol `phi`, the dimension and the radial modulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default = "two")]
    pub d: usize,
    #[serde(default)]
    pub kind: PhiKind,
    /// Stable index, `phi = lambda^{alpha/2}`.
    #[serde(default = "one")]
    pub alpha: f64,
    /// Mixture components `[weight, alpha]`.
    #[serde(default)]
    pub components: Vec<[f64; 2]>,
    #[serde(default = "four")]
    pub pieces: usize,
    #[serde(default = "eps")]
    pub epsilon: f64,
    #[serde(default)]
    pub continuity: Continuity,
    #[serde(default)]
    pub form: SectionSixForm,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub modulation: ModulationKind,
    /// Constant modulation value.
    #[serde(default = "one")]
    pub level: f64,
    #[serde(default = "one")]
    pub period: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        toml::from_str("").expect("model defaults")
    }
}

impl ModelSpec {
    pub fn phi(&self) -> Result<PhiModel> {
        let m = match self.kind {
            PhiKind::Stable => PhiModel::stable(self.alpha),
            PhiKind::Mixture => {
                let pairs: Vec<(f64, f64)> = self.components.iter().map(|c| (c[0], c[1])).collect();
                PhiModel::mixture(&pairs)
            }
            PhiKind::Section6 => {
                let mut m = PhiModel::section_six(section6_build_f(self.pieces, self.epsilon, self.continuity)?);
                if let PhiModel::SectionSix(s) = &mut m {
                    s.form = self.form;
                }
                m
            }
        };
        m.validate()?;
        Ok(m)
    }

    pub fn process(&self) -> Result<ProcessModel> {
        let modulation = match self.modulation {
            ModulationKind::Unit => Modulation::Unit,
            ModulationKind::Constant => Modulation::Constant(self.level),
            ModulationKind::LogPeriodic => Modulation::LogPeriodic { period: self.period },
        };
        let m = ProcessModel::new(self.d, self.phi()?).with_modulation(self.gamma, modulation);
        m.validate()?;
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSpec {
    pub strategy: Strategy,
    pub c_h: f64,
    pub eps_cut: f64,
    pub max_steps: usize,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        let p = SamplerParams::default();
        SamplerSpec {
            strategy: Strategy::default(),
            c_h: p.c_h,
            eps_cut: p.eps_cut,
            max_steps: p.max_steps,
        }
    }
}

impl SamplerSpec {
    pub fn params(&self) -> SamplerParams {
        SamplerParams {
            c_h: self.c_h,
            eps_cut: self.eps_cut,
            max_steps: self.max_steps,
        }
    }
}

/// `[grid]`: log grid for the analytic operations; `points` overrides it when non-empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub per_decade: usize,
    pub points: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lo: 1e-2,
            hi: 1e2,
            per_decade: 5,
            points: Vec::new(),
        }
    }
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !self.points.is_empty() {
            return Ok(self.points.clone());
        }
        if !(self.lo > 0.0 && self.hi >= self.lo && self.hi.is_finite() && self.per_decade > 0) {
            return Err(Error::Domain(format!("grid [{}, {}] with {} per decade", self.lo, self.hi, self.per_decade)));
        }
        Ok(crate::profile::log_grid(self.lo, self.hi, self.per_decade))
    }
}

/// `[checks]`: thresholds of the analytic profiles and single-estimate runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSpec {
    /// Largest accepted `max / min` of a ratio profile.
    pub max_spread: f64,
    /// `levy_asymp` profile: mu, tail, j, doubling_small, doubling_large.
    pub asymp: String,
    /// Scaling certificate radius `R0`.
    pub r0: f64,
    pub cert: CertGrid,
    /// Kernel bins for `kernel`.
    pub n_radial: usize,
    pub n_angular: usize,
    /// Start points of `ladder_interval` as fractions of the interval length.
    pub interval_points: Vec<f64>,
}

impl Default for CheckSpec {
    fn default() -> Self {
        CheckSpec {
            max_spread: 50.0,
            asymp: "j".into(),
            r0: 1.0,
            cert: CertGrid::default(),
            n_radial: 12,
            n_angular: 8,
            interval_points: vec![0.1, 0.25, 0.5],
        }
    }
}

fn default_seed() -> u64 {
    1
}
fn default_out() -> String {
    "out".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Sample count override for the experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "default_out")]
    pub out: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Geometry>,
    /// Start point for single-point runs; the geometry's witness when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub checks: CheckSpec,
    #[serde(default)]
    pub poisson_kernel: PoissonKernelConfig,
    #[serde(default)]
    pub exit_time: ExitTimeConfig,
    #[serde(default)]
    pub harnack: HarnackConfig,
    #[serde(default)]
    pub factorization: FactorizationConfig,
    #[serde(default)]
    pub bhp: BhpConfig,
    /// Keys filled from defaults, in dotted form; not part of the persisted config.
    #[serde(skip)]
    pub defaulted: Vec<String>,
}

impl RunConfig {
    /// All defaults for `experiment`.
    pub fn new(experiment: ExperimentKind) -> Self {
        parse_config(&format!("experiment = \"{}\"\n", experiment.name())).expect("default config")
    }

    /// Single start point: `start`, else the geometry's witness, else the origin.
    pub fn start_point(&self) -> Vec<f64> {
        match (&self.start, &self.geometry) {
            (Some(s), _) => s.clone(),
            (None, Some(g)) => g.witness(self.model.d),
            (None, None) => vec![0.0; self.model.d],
        }
    }

    pub fn geometry_or_ball(&self) -> Geometry {
        self.geometry.clone().unwrap_or_else(|| Geometry::ball(self.model.d, 1.0))
    }

    /// Checks that need no sampling: model, geometry, start point.
    pub fn validate(&self) -> Result<()> {
        let d = self.model.d;
        if d == 0 {
            return Err(Error::InvalidModel("dimension must be >= 1".into()));
        }
        self.model.process()?;
        if let Some(g) = &self.geometry {
            g.validate(d)?;
        }
        if let Some(s) = &self.start {
            if s.len() != d {
                return Err(Error::Domain(format!("start has {} coordinates, expected {d}", s.len())));
            }
        }
        if matches!(self.experiment, ExperimentKind::SimExit | ExperimentKind::SimExitTime | ExperimentKind::Kernel) {
            let g = self.geometry_or_ball();
            g.validate(d)?;
            let x = self.start_point();
            if !g.contains(&x) {
                return Err(Error::Geometry(format!("start {x:?} is not inside the {}", g.name())));
            }
        }
        let fams: &[Geometry] = match self.experiment {
            ExperimentKind::Factorization => &self.factorization.geometries,
            ExperimentKind::Bhp => &self.bhp.family,
            _ => &[],
        };
        for g in fams {
            g.validate(d)?;
        }
        Ok(())
    }

    /// Canonical TOML text; `parse_config(emit())` reproduces `self` up to `defaulted`.
    pub fn emit(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config {
            line: 0,
            message: e.to_string(),
        })
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Dotted paths of `full` missing from `given`, descending into tables present in both.
fn missing_keys(given: &toml::Table, full: &toml::Table, prefix: &str, out: &mut Vec<String>) {
    for (k, v) in full {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match (given.get(k), v) {
            (None, _) => out.push(path),
            (Some(toml::Value::Table(g)), toml::Value::Table(f)) => missing_keys(g, f, &path, out),
            _ => {}
        }
    }
}

/// Parse and validate; errors carry the 1-based line of the offending key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
        message: e.message().to_string(),
    })?;
    let given: toml::Table = toml::from_str(text).map_err(|e| Error::Config {
        line: 1,
        message: e.to_string(),
    })?;
    let full: toml::Table = toml::from_str(&cfg.emit()?).map_err(|e| Error::Config {
        line: 0,
        message: e.to_string(),
    })?;
    let mut defaulted = Vec::new();
    missing_keys(&given, &full, "", &mut defaulted);
    cfg.defaulted = defaulted;
    Ok(cfg)
}
