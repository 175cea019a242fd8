//! Compares the fast backends against the dense Lindblad oracle.

use serde::Serialize;
use spinstar_core::dynamics::{build_dynamics, evolve_state, CentralDynamics, DynamicsOptions, Provenance};
use spinstar_core::oracle::{evolve, reduced_central_state, DenseState, DEFAULT_ORACLE_CAP};
use spinstar_core::{trace_distance, BlochAngles, Error as CoreError, ModelParams, QubitState, Spectrum};

use crate::config::{check_backend, CrosscheckConfig, ModelConfig, RunConfig};
use crate::error::{CliError, CliResult};

/// Poles plus two generic pure states, so that both populations and
/// coherences are exercised.
pub fn probe_states() -> Vec<QubitState> {
    vec![
        QubitState::ground(),
        QubitState::excited(),
        QubitState::from_bloch(BlochAngles::new(1.1, 0.4)),
        QubitState::from_bloch(BlochAngles::new(2.3, -2.0)),
    ]
}

pub fn default_times(t_end: f64, steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect()
}

fn oracle_states(params: &ModelParams, times: &[f64]) -> Result<Vec<Vec<QubitState>>, CoreError> {
    probe_states()
        .iter()
        .map(|q| {
            let full = evolve(params, &DenseState::with_ground_periphery(q, params.n_spins), times)?;
            Ok(full.iter().map(reduced_central_state).collect())
        })
        .collect()
}

/// Worst trace distance between the backend and the oracle at each time.
fn discrepancy_series(dynamics: &dyn CentralDynamics, oracle: &[Vec<QubitState>], times: &[f64]) -> Vec<f64> {
    let mut worst = vec![0.0f64; times.len()];
    for (q, reference) in probe_states().iter().zip(oracle) {
        for ((w, t), r) in worst.iter_mut().zip(times).zip(reference) {
            *w = w.max(trace_distance(r, &evolve_state(dynamics, q, *t)));
        }
    }
    worst
}

/// Max over probe states and `times` of the backend-vs-oracle trace distance.
pub fn oracle_discrepancy(params: &ModelParams, dynamics: &dyn CentralDynamics, times: &[f64]) -> Result<f64, CoreError> {
    let oracle = oracle_states(params, times)?;
    Ok(discrepancy_series(dynamics, &oracle, times).into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckRow {
    pub backend: &'static str,
    pub t: f64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackendCheck {
    pub backend: &'static str,
    pub max_discrepancy: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub n_spins: usize,
    pub tolerance: f64,
    pub checks: Vec<BackendCheck>,
    pub pass: bool,
}

/// The engine is always checked. The flat kernel joins when asked for, or
/// automatically where it is exact.
pub fn run_crosscheck(
    model: &ModelConfig,
    run: &RunConfig,
    cfg: &CrosscheckConfig,
) -> CliResult<(Vec<CrosscheckRow>, CrosscheckReport)> {
    let params = model.params()?;
    if params.n_spins > DEFAULT_ORACLE_CAP {
        return Err(CoreError::OracleCap { n_spins: params.n_spins, cap: DEFAULT_ORACLE_CAP }.into());
    }
    if params.spectrum != Spectrum::Flat {
        return Err(CliError::Validation("the oracle models a flat spectrum only".into()));
    }
    if !(cfg.tolerance > 0.0) {
        return Err(CliError::Validation("crosscheck tolerance must be positive".into()));
    }
    let times = cfg.times()?;
    let mut backends = vec![Provenance::Engine];
    match run.backend()? {
        Provenance::Engine => {
            if params.anisotropy == 0.0 && params.nbar == 0.0 {
                backends.push(Provenance::FlatKernel);
            }
        }
        Provenance::FlatKernel => {
            check_backend(&params, Provenance::FlatKernel)?;
            backends.push(Provenance::FlatKernel);
        }
        Provenance::LorentzianKernel => {
            return Err(CliError::Validation("the lorentzian backend has no oracle counterpart".into()));
        }
    }
    let t_end = times.last().copied().unwrap_or(0.0).max(1e-6);
    let opts = DynamicsOptions::default().with_t_max(t_end);
    let oracle = oracle_states(&params, &times)?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for backend in backends {
        let dynamics = build_dynamics(&params, backend, &opts)?;
        let series = discrepancy_series(dynamics.as_ref(), &oracle, &times);
        let max_discrepancy = series.iter().copied().fold(0.0, f64::max);
        if !max_discrepancy.is_finite() {
            return Err(CoreError::NonFinite("crosscheck discrepancy").into());
        }
        checks.push(BackendCheck { backend: backend.name(), max_discrepancy, pass: max_discrepancy <= cfg.tolerance });
        rows.extend(times.iter().zip(series).map(|(&t, discrepancy)| CrosscheckRow { backend: backend.name(), t, discrepancy }));
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok((rows, CrosscheckReport { n_spins: params.n_spins, tolerance: cfg.tolerance, checks, pass }))
}
