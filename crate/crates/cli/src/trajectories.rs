//! Bloch-ball trajectories of the central spin for a set of initial states.

use serde::Serialize;
use spinstar_core::blp::{SampledDynamics, StatePair};
use spinstar_core::dynamics::{build_dynamics, evolve_state};
use spinstar_core::oracle::{evolve, reduced_central_state, DenseState, DEFAULT_ORACLE_CAP};
use spinstar_core::{trace_distance, BlochAngles, Error as CoreError, QubitState};

use crate::config::{check_backend, ModelConfig, RunConfig, TrajectoryConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub state: String,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub purity: f64,
    pub oracle_discrepancy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub backend: &'static str,
    pub horizon: f64,
    pub settled: bool,
    pub states: Vec<String>,
    pub final_purity: Vec<f64>,
    /// Smallest trace distance between the first two states on the
    /// search window, with extrema refined between samples.
    pub min_distance: Option<f64>,
    pub min_distance_time: Option<f64>,
    pub max_oracle_discrepancy: Option<f64>,
}

fn label(i: usize, s: &crate::config::StateConfig) -> String {
    s.label.clone().unwrap_or_else(|| format!("s{i}"))
}

pub fn export_trajectories(
    model: &ModelConfig,
    run: &RunConfig,
    cfg: &TrajectoryConfig,
) -> CliResult<(Vec<TrajectoryRecord>, TrajectorySummary)> {
    let params = model.params()?;
    let backend = run.backend()?;
    check_backend(&params, backend)?;
    if cfg.states.is_empty() {
        return Err(CliError::Validation("trajectories need at least one initial state".into()));
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) || !(cfg.window > 0.0) {
        return Err(CliError::Validation("trajectory dt and window must be positive".into()));
    }
    let dynamics = build_dynamics(&params, backend, &run.dynamics())?;
    let horizon = dynamics.horizon();
    let steps = (horizon / cfg.dt).round().max(1.0) as usize;
    let times: Vec<f64> = (0..=steps).map(|i| horizon * i as f64 / steps as f64).collect();
    let angles: Vec<BlochAngles> = cfg.states.iter().map(|s| BlochAngles::new(s.theta, s.phi)).collect();
    let labels: Vec<String> = cfg.states.iter().enumerate().map(|(i, s)| label(i, s)).collect();
    let use_oracle = run.oracle && params.n_spins <= DEFAULT_ORACLE_CAP;

    let mut records = Vec::with_capacity(times.len() * angles.len());
    let mut final_purity = Vec::new();
    let mut worst_oracle = None::<f64>;
    for (a, name) in angles.iter().zip(&labels) {
        let q = QubitState::from_bloch(*a);
        let oracle = if use_oracle {
            Some(evolve(&params, &DenseState::with_ground_periphery(&q, params.n_spins), &times)?)
        } else {
            None
        };
        let mut purity = 1.0;
        for (k, &t) in times.iter().enumerate() {
            let s = evolve_state(dynamics.as_ref(), &q, t);
            let [x, y, z] = s.bloch_vector();
            if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                return Err(CoreError::NonFinite("trajectory").into());
            }
            let discrepancy = oracle.as_ref().map(|o| trace_distance(&reduced_central_state(&o[k]), &s));
            if let Some(d) = discrepancy {
                worst_oracle = Some(worst_oracle.unwrap_or(0.0).max(d));
            }
            purity = s.purity();
            records.push(TrajectoryRecord { state: name.clone(), t, x, y, z, purity, oracle_discrepancy: discrepancy });
        }
        final_purity.push(purity);
    }

    let (mut min_distance, mut min_distance_time) = (None, None);
    if angles.len() >= 2 {
        let sampled = SampledDynamics::new(dynamics.as_ref(), &run.sampling())?;
        let series = sampled.series(&StatePair::pure(angles[0], angles[1]));
        let closest = series.values.iter().zip(&series.times).filter(|(_, t)| **t <= cfg.window);
        if let Some((d, t)) = closest.min_by(|a, b| a.0.total_cmp(b.0)) {
            min_distance = Some(*d);
            min_distance_time = Some(*t);
        }
    }
    let summary = TrajectorySummary {
        backend: backend.name(),
        horizon,
        settled: dynamics.settled(),
        states: labels,
        final_purity,
        min_distance,
        min_distance_time,
        max_oracle_discrepancy: worst_oracle,
    };
    Ok((records, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_stay_in_the_ball() {
        let model = ModelConfig { n_spins: 2, gamma: 0.7, lambda: 0.5, delta: 0.3, ..Default::default() };
        let run = RunConfig { tmax: Some(5.0), oracle: true, ..Default::default() };
        let (records, summary) = export_trajectories(&model, &run, &TrajectoryConfig::default()).unwrap();
        assert_eq!(records.len(), 2 * 101);
        assert!(records.iter().all(|r| r.x * r.x + r.y * r.y + r.z * r.z <= 1.0 + 1e-9));
        assert!(summary.max_oracle_discrepancy.unwrap() < 1e-7);
        assert_eq!(summary.states, ["+x", "-x"]);
    }
}
