//! Trace-distance non-Markovianity: sampling `D(t)` for a pair of initial
//! central states, splitting it into monotone pieces, the cumulative in- and
//! out-flows, and the maximization over initial pairs.

mod search;
mod series;

use alloc::vec::Vec;
use core::fmt;

pub use series::{
    nm_flows, partition_monotonicity, partition_with, FlowResult, MonotoneInterval, MonotonicityPartition,
    SampledDynamics, SamplingOptions, StatePair, TraceDistanceSeries,
};

use crate::dynamics::{build_dynamics, CentralDynamics, DynamicsOptions, Provenance};
use crate::{Error, ModelParams, Result};
use search::{beats, compass, evaluate, grid_coords, grid_rank, Evaluated, EQUATORIAL, POLAR};

/// Default threshold below which a point counts as Markovian.
pub const MK_EPS: f64 = 1e-4;

/// Grid points re-evaluated on the full time grid after ranking.
const GRID_REFINE: usize = 5;

/// How the maximization over initial pairs is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// The equatorial antipodal and polar pairs only.
    Candidates,
    Grid { resolution: usize },
    /// Grid, then compass search from the best point.
    Hybrid { resolution: usize },
}

impl Strategy {
    pub const DEFAULT_RESOLUTION: usize = 25;

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Candidates => "candidates",
            Strategy::Grid { .. } => "grid",
            Strategy::Hybrid { .. } => "hybrid",
        }
    }
}

impl core::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let resolution = Self::DEFAULT_RESOLUTION;
        match s {
            "candidates" => Ok(Strategy::Candidates),
            "grid" => Ok(Strategy::Grid { resolution }),
            "hybrid" => Ok(Strategy::Hybrid { resolution }),
            other => Err(Error::InvalidParams(alloc::format!("unknown strategy '{other}'"))),
        }
    }
}

/// Where the winning pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Equatorial,
    Polar,
    Grid,
    Refined,
}

impl PairKind {
    pub fn name(&self) -> &'static str {
        match self {
            PairKind::Equatorial => "equatorial",
            PairKind::Polar => "polar",
            PairKind::Grid => "grid",
            PairKind::Refined => "refined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NmWarning {
    /// The map had not settled by the horizon; revivals may be missing.
    NotSettled { horizon: f64 },
    /// Finite temperature: the horizon is fixed rather than adaptive.
    FixedHorizon { horizon: f64 },
    /// The backend is outside the regime where it is exact.
    HeuristicBackend,
    /// In-flow exceeded out-flow at some time.
    RatioAboveOne { max_ratio: f64 },
}

impl fmt::Display for NmWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NmWarning::NotSettled { horizon } => write!(f, "not settled by t = {horizon}"),
            NmWarning::FixedHorizon { horizon } => write!(f, "fixed horizon t = {horizon}"),
            NmWarning::HeuristicBackend => write!(f, "heuristic backend"),
            NmWarning::RatioAboveOne { max_ratio } => write!(f, "flow ratio reached {max_ratio}"),
        }
    }
}

impl NmWarning {
    pub fn code(&self) -> &'static str {
        match self {
            NmWarning::NotSettled { .. } => "not_settled",
            NmWarning::FixedHorizon { .. } => "fixed_horizon",
            NmWarning::HeuristicBackend => "heuristic_backend",
            NmWarning::RatioAboveOne { .. } => "ratio_above_one",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmOptions {
    pub backend: Provenance,
    pub dynamics: DynamicsOptions,
    pub sampling: SamplingOptions,
    pub mk_eps: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self {
            backend: Provenance::Engine,
            dynamics: DynamicsOptions::default(),
            sampling: SamplingOptions::default(),
            mk_eps: MK_EPS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub value: f64,
    pub markovian: bool,
    pub pair: StatePair,
    pub kind: PairKind,
    pub series: TraceDistanceSeries,
    pub partition: MonotonicityPartition,
    pub flows: FlowResult,
    /// Value of each analytic candidate that was evaluated.
    pub candidates: Vec<(PairKind, f64)>,
    pub horizon: f64,
    pub settled: bool,
    pub warnings: Vec<NmWarning>,
    pub evaluations: usize,
}

/// Builds the dynamics for `params` and maximizes over initial pairs.
pub fn nm_measure(params: &ModelParams, strategy: Strategy, opts: &NmOptions) -> Result<NmResult> {
    let dynamics = build_dynamics(params, opts.backend, &opts.dynamics)?;
    nm_measure_with(dynamics.as_ref(), params, strategy, opts)
}

/// As [`nm_measure`] with prebuilt dynamics for `params`.
pub fn nm_measure_with(
    dynamics: &dyn CentralDynamics,
    params: &ModelParams,
    strategy: Strategy,
    opts: &NmOptions,
) -> Result<NmResult> {
    let sampled = SampledDynamics::new(dynamics, &opts.sampling)?;
    let isotropic = params.anisotropy == 0.0;
    let mut evaluations = 0;
    let mut candidates = Vec::new();
    let mut best: Option<(Evaluated, PairKind)> = None;

    // candidates tie-break among themselves; grid points must beat them outright
    let consider = |best: &mut Option<(Evaluated, PairKind)>, e: Evaluated, kind: PairKind| {
        let wins = match best {
            None => true,
            Some((b, _)) if kind == PairKind::Grid => e.value > b.value + 1e-12 * b.value.max(1.0),
            Some((b, _)) => beats(e.value, &e.coords, b.value, &b.coords),
        };
        if wins {
            *best = Some((e, kind));
        }
    };

    for (x, kind) in [(EQUATORIAL, PairKind::Equatorial), (POLAR, PairKind::Polar)] {
        let e = evaluate(&sampled, x)?;
        evaluations += 1;
        candidates.push((kind, e.value));
        consider(&mut best, e, kind);
    }

    if let Strategy::Grid { resolution } | Strategy::Hybrid { resolution } = strategy {
        if resolution < 2 {
            return Err(Error::InvalidParams("grid resolution must be at least 2".into()));
        }
        let coords = grid_coords(resolution, isotropic);
        evaluations += coords.len();
        for (_, x) in grid_rank(&sampled, &coords, GRID_REFINE) {
            let e = evaluate(&sampled, x)?;
            evaluations += 1;
            consider(&mut best, e, PairKind::Grid);
        }
    }

    let (mut best, mut kind) = best.expect("candidates always evaluated");
    if let Strategy::Hybrid { .. } = strategy {
        let dims = if isotropic { 3 } else { 4 };
        let before = best.value;
        let (refined, n) = compass(&sampled, best, dims, core::f64::consts::PI / 24.0, 1e-3)?;
        evaluations += n;
        if refined.value > before {
            kind = PairKind::Refined;
        }
        best = refined;
    }

    let mut warnings = Vec::new();
    if params.nbar > 0.0 && opts.dynamics.t_max.is_none() && opts.backend == Provenance::Engine {
        warnings.push(NmWarning::FixedHorizon { horizon: dynamics.horizon() });
    }
    if !dynamics.settled() {
        warnings.push(NmWarning::NotSettled { horizon: dynamics.horizon() });
    }
    if dynamics.heuristic() {
        warnings.push(NmWarning::HeuristicBackend);
    }
    let max_ratio = best.flows.max_ratio();
    if max_ratio > 1.0 + 1e-9 {
        warnings.push(NmWarning::RatioAboveOne { max_ratio });
    }

    let pair = best.series.pair;
    Ok(NmResult {
        value: best.value,
        markovian: best.value < opts.mk_eps,
        pair,
        kind,
        series: best.series,
        partition: best.partition,
        flows: best.flows,
        candidates,
        horizon: dynamics.horizon(),
        settled: dynamics.settled(),
        warnings,
        evaluations,
    })
}

/// `D(t)` for one pair under the requested backend.
pub fn sample_trace_distance(
    params: &ModelParams,
    pair: &StatePair,
    opts: &NmOptions,
) -> Result<TraceDistanceSeries> {
    let dynamics = build_dynamics(params, opts.backend, &opts.dynamics)?;
    Ok(SampledDynamics::new(dynamics.as_ref(), &opts.sampling)?.series(pair))
}

/// Comparison of the analytic candidates against a grid search.
#[derive(Debug, Clone)]
pub struct OptimalPairReport {
    pub candidate_value: f64,
    pub candidate_kind: PairKind,
    pub grid_value: f64,
    pub grid_pair: StatePair,
    /// Allowed excess of the grid over the candidate.
    pub tolerance: f64,
}

impl OptimalPairReport {
    pub fn candidate_optimal(&self) -> bool {
        self.grid_value <= self.candidate_value + self.tolerance
    }
}

/// Checks by grid search that no sampled pure pair beats the better of the
/// two analytic candidates. Needs isotropic coupling at zero temperature.
pub fn optimal_pair_check(params: &ModelParams, resolution: usize, opts: &NmOptions) -> Result<OptimalPairReport> {
    if !params.is_single_excitation() {
        return Err(Error::ValidityDomain("the optimal-pair check needs λ = 0 and n̄ = 0".into()));
    }
    let dynamics = build_dynamics(params, opts.backend, &opts.dynamics)?;
    let cand = nm_measure_with(dynamics.as_ref(), params, Strategy::Candidates, opts)?;
    let grid = nm_measure_with(dynamics.as_ref(), params, Strategy::Grid { resolution }, opts)?;
    Ok(OptimalPairReport {
        candidate_value: cand.value,
        candidate_kind: cand.kind,
        grid_value: grid.value,
        grid_pair: grid.pair,
        tolerance: 1e-6 + 1e-6 * cand.value,
    })
}
