//! TOML configuration. All rates are in units of `J` and all times in units
//! of `1/J`; `J` itself is fixed to 1.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinstar_core::blp::{SamplingOptions, Strategy, MK_EPS};
use spinstar_core::dynamics::{DynamicsOptions, Provenance};
use spinstar_core::{ModelParams, Spectrum};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub sweep: SweepAxes,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub trajectories: TrajectoryConfig,
    #[serde(default)]
    pub crosscheck: CrosscheckConfig,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        Ok(toml::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Flat,
    Lorentzian,
}

/// One parameter point; sweep axes override individual fields.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub n_spins: usize,
    pub gamma: f64,
    pub delta: f64,
    pub lambda: f64,
    pub nbar: f64,
    pub spectrum: SpectrumKind,
    /// Lorentzian half-width.
    pub width: Option<f64>,
    pub offset: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            n_spins: 1,
            gamma: 1.0,
            delta: 0.0,
            lambda: 0.0,
            nbar: 0.0,
            spectrum: SpectrumKind::Flat,
            width: None,
            offset: 0.0,
        }
    }
}

impl ModelConfig {
    pub fn params(&self) -> CliResult<ModelParams> {
        let spectrum = match self.spectrum {
            SpectrumKind::Flat => Spectrum::Flat,
            SpectrumKind::Lorentzian => {
                let width = self
                    .width
                    .ok_or_else(|| CliError::Validation("a Lorentzian spectrum needs model.width".into()))?;
                Spectrum::Lorentzian { width, offset: self.offset }
            }
        };
        let p = ModelParams::new(self.n_spins, 1.0, self.gamma)
            .with_detuning(self.delta)
            .with_anisotropy(self.lambda)
            .with_nbar(self.nbar)
            .with_spectrum(spectrum);
        p.validate()?;
        Ok(p)
    }
}

/// A list of values, a single value, or an inclusive linear range.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum AxisValues {
    Single(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, steps: usize },
}

impl AxisValues {
    pub fn values(&self) -> Vec<f64> {
        match self {
            AxisValues::Single(x) => vec![*x],
            AxisValues::List(v) => v.clone(),
            AxisValues::Range { start, stop, steps } => match steps {
                0 => vec![],
                1 => vec![*start],
                n => (0..*n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub n_spins: Option<AxisValues>,
    pub lambda: Option<AxisValues>,
    pub nbar: Option<AxisValues>,
    pub gamma: Option<AxisValues>,
    pub delta: Option<AxisValues>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    NSpins,
    Lambda,
    Nbar,
    Gamma,
    Delta,
}

impl AxisName {
    pub fn name(&self) -> &'static str {
        match self {
            AxisName::NSpins => "n_spins",
            AxisName::Lambda => "lambda",
            AxisName::Nbar => "nbar",
            AxisName::Gamma => "gamma",
            AxisName::Delta => "delta",
        }
    }

    fn set(&self, model: &mut ModelConfig, v: f64) {
        match self {
            AxisName::NSpins => model.n_spins = v as usize,
            AxisName::Lambda => model.lambda = v,
            AxisName::Nbar => model.nbar = v,
            AxisName::Gamma => model.gamma = v,
            AxisName::Delta => model.delta = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

impl SweepAxes {
    /// Declared axes, outermost first in a fixed order.
    pub fn axes(&self) -> Vec<Axis> {
        let all = [
            (AxisName::NSpins, &self.n_spins),
            (AxisName::Lambda, &self.lambda),
            (AxisName::Nbar, &self.nbar),
            (AxisName::Gamma, &self.gamma),
            (AxisName::Delta, &self.delta),
        ];
        all.into_iter()
            .filter_map(|(name, v)| v.as_ref().map(|v| Axis { name, values: v.values() }))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub backend: String,
    pub strategy: String,
    pub resolution: usize,
    pub tmax: Option<f64>,
    pub workers: Option<usize>,
    pub mk_eps: f64,
    pub dt: f64,
    pub timing: bool,
    pub oracle: bool,
    pub out: Option<PathBuf>,
    pub jsonl: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            backend: "engine".into(),
            strategy: "candidates".into(),
            resolution: Strategy::DEFAULT_RESOLUTION,
            tmax: None,
            workers: None,
            mk_eps: MK_EPS,
            dt: SamplingOptions::default().dt,
            timing: false,
            oracle: false,
            out: None,
            jsonl: None,
        }
    }
}

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub jsonl: Option<PathBuf>,
    pub workers: Option<usize>,
    pub backend: Option<String>,
    pub strategy: Option<String>,
    pub tmax: Option<f64>,
    pub oracle: bool,
    pub timing: bool,
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out {
            self.out = Some(v.clone());
        }
        if let Some(v) = &o.jsonl {
            self.jsonl = Some(v.clone());
        }
        if let Some(v) = o.workers {
            self.workers = Some(v);
        }
        if let Some(v) = &o.backend {
            self.backend = v.clone();
        }
        if let Some(v) = &o.strategy {
            self.strategy = v.clone();
        }
        if let Some(v) = o.tmax {
            self.tmax = Some(v);
        }
        self.oracle |= o.oracle;
        self.timing |= o.timing;
    }

    pub fn backend(&self) -> CliResult<Provenance> {
        Ok(self.backend.parse::<Provenance>()?)
    }

    pub fn strategy(&self) -> CliResult<Strategy> {
        let resolution = self.resolution;
        match self.strategy.parse::<Strategy>()? {
            Strategy::Grid { .. } => Ok(Strategy::Grid { resolution }),
            Strategy::Hybrid { .. } => Ok(Strategy::Hybrid { resolution }),
            s => Ok(s),
        }
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn dynamics(&self) -> DynamicsOptions {
        DynamicsOptions { t_max: self.tmax, ..Default::default() }
    }

    pub fn sampling(&self) -> SamplingOptions {
        SamplingOptions { dt: self.dt, ..Default::default() }
    }

    pub fn validate(&self) -> CliResult<()> {
        self.backend()?;
        self.strategy()?;
        if let Some(t) = self.tmax {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Validation(format!("tmax = {t} must be positive")));
            }
        }
        if self.workers == Some(0) {
            return Err(CliError::Validation("workers must be at least 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.mk_eps >= 0.0) {
            return Err(CliError::Validation("dt must be positive and mk_eps nonnegative".into()));
        }
        if self.resolution < 2 {
            return Err(CliError::Validation("resolution must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub theta: f64,
    pub phi: f64,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryConfig {
    /// Defaults to the two eigenstates of σˣ.
    pub states: Vec<StateConfig>,
    pub dt: f64,
    /// The closest approach of the first two states is searched on
    /// `[0, window]`; both relax to the same fixed point as t grows.
    pub window: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        let half = std::f64::consts::FRAC_PI_2;
        Self {
            states: vec![
                StateConfig { theta: half, phi: 0.0, label: Some("+x".into()) },
                StateConfig { theta: half, phi: std::f64::consts::PI, label: Some("-x".into()) },
            ],
            dt: 0.05,
            window: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrosscheckConfig {
    pub times: Option<Vec<f64>>,
    pub tmax: f64,
    pub steps: usize,
    pub tolerance: f64,
}

impl Default for CrosscheckConfig {
    fn default() -> Self {
        Self { times: None, tmax: 10.0, steps: 100, tolerance: 1e-6 }
    }
}

impl CrosscheckConfig {
    pub fn times(&self) -> CliResult<Vec<f64>> {
        let t = match &self.times {
            Some(t) => t.clone(),
            None => (0..=self.steps).map(|i| self.tmax * i as f64 / self.steps.max(1) as f64).collect(),
        };
        if t.is_empty() || t.iter().any(|x| !x.is_finite() || *x < 0.0) || t.windows(2).any(|w| w[1] < w[0]) {
            return Err(CliError::Validation("crosscheck times must be sorted, finite and nonnegative".into()));
        }
        Ok(t)
    }
}

/// Fully resolved sweep: the base point, its axes and the run options.
#[derive(Debug, Clone, Serialize)]
pub struct SweepSpec {
    pub model: ModelConfig,
    pub axes: Vec<Axis>,
    pub backend: String,
    pub strategy: String,
    pub resolution: usize,
    pub tmax: Option<f64>,
    pub workers: usize,
    pub mk_eps: f64,
    pub dt: f64,
    pub timing: bool,
    pub oracle: bool,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub jsonl: Option<PathBuf>,
}

impl SweepSpec {
    pub fn from_config(cfg: &ConfigFile, overrides: &Overrides) -> CliResult<Self> {
        let mut run = cfg.run.clone();
        run.apply(overrides);
        run.validate()?;
        let spec = Self {
            model: cfg.model.clone(),
            axes: cfg.sweep.axes(),
            backend: run.backend.clone(),
            strategy: run.strategy.clone(),
            resolution: run.resolution,
            tmax: run.tmax,
            workers: run.workers(),
            mk_eps: run.mk_eps,
            dt: run.dt,
            timing: run.timing,
            oracle: run.oracle,
            out: run.out.clone(),
            jsonl: run.jsonl.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            backend: self.backend.clone(),
            strategy: self.strategy.clone(),
            resolution: self.resolution,
            tmax: self.tmax,
            workers: Some(self.workers),
            mk_eps: self.mk_eps,
            dt: self.dt,
            timing: self.timing,
            oracle: self.oracle,
            out: self.out.clone(),
            jsonl: self.jsonl.clone(),
        }
    }

    /// Cartesian product of the axes, first axis outermost.
    pub fn points(&self) -> Vec<ModelConfig> {
        let mut out = vec![self.model.clone()];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|m| {
                    axis.values.iter().map(move |&v| {
                        let mut m = m.clone();
                        axis.name.set(&mut m, v);
                        m
                    })
                })
                .collect();
        }
        out
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.axes.is_empty() {
            return Err(CliError::Validation("a sweep needs at least one axis".into()));
        }
        for axis in &self.axes {
            if axis.values.is_empty() {
                return Err(CliError::Validation(format!("axis {} is empty", axis.name.name())));
            }
            if axis.values.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Validation(format!("axis {} has non-finite values", axis.name.name())));
            }
            if axis.name == AxisName::NSpins && axis.values.iter().any(|v| *v < 1.0 || v.fract() != 0.0) {
                return Err(CliError::Validation("n_spins values must be positive integers".into()));
            }
        }
        let backend = self.run_config().backend()?;
        for m in self.points() {
            check_backend(&m.params()?, backend)?;
        }
        Ok(())
    }
}

/// Rejects parameter points outside the backend's domain before any work.
pub fn check_backend(p: &ModelParams, backend: Provenance) -> CliResult<()> {
    let bad = |msg: String| Err(CliError::Validation(msg));
    match backend {
        Provenance::Engine if p.spectrum != Spectrum::Flat => {
            bad("the engine backend needs a flat spectrum".into())
        }
        Provenance::FlatKernel if p.anisotropy != 0.0 => {
            bad(format!("the flat backend needs lambda = 0, got {}", p.anisotropy))
        }
        Provenance::FlatKernel if p.spectrum != Spectrum::Flat => bad("the flat backend needs a flat spectrum".into()),
        Provenance::LorentzianKernel if !p.is_single_excitation() => {
            bad("the lorentzian backend needs lambda = 0 and nbar = 0".into())
        }
        Provenance::LorentzianKernel if p.spectrum == Spectrum::Flat => {
            bad("the lorentzian backend needs model.spectrum = \"lorentzian\"".into())
        }
        _ => Ok(()),
    }
}
