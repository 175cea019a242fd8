use std::collections::BTreeMap;
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spinstar_core::blp::{nm_measure_with, NmOptions, NmResult};
use spinstar_core::dynamics::build_dynamics;
use spinstar_core::oracle::DEFAULT_ORACLE_CAP;
use spinstar_core::Error as CoreError;

use crate::config::{ModelConfig, RunConfig, SweepSpec};
use crate::crosscheck::{default_times, oracle_discrepancy};
use crate::error::{error_code, is_numerical, CliError, CliResult};
use crate::output::RecordWriter;

/// One sweep point. Optional fields are empty when the point failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub n_spins: usize,
    pub gamma: f64,
    pub delta: f64,
    pub lambda: f64,
    pub nbar: f64,
    pub backend: String,
    pub strategy: String,
    pub nm: Option<f64>,
    pub markovian: Option<bool>,
    pub pair: Option<String>,
    pub theta1: Option<f64>,
    pub phi1: Option<f64>,
    pub theta2: Option<f64>,
    pub phi2: Option<f64>,
    pub horizon: Option<f64>,
    pub settled: Option<bool>,
    pub max_ratio: Option<f64>,
    pub oracle_discrepancy: Option<f64>,
    pub warnings: String,
    pub error_code: Option<String>,
    pub error: Option<String>,
    /// Only filled when timing is enabled, so that reruns stay identical.
    pub wall_time_s: Option<f64>,
    #[serde(skip)]
    pub numerical: bool,
}

impl SweepRow {
    fn blank(index: usize, m: &ModelConfig, run: &RunConfig) -> Self {
        Self {
            index,
            n_spins: m.n_spins,
            gamma: m.gamma,
            delta: m.delta,
            lambda: m.lambda,
            nbar: m.nbar,
            backend: run.backend.clone(),
            strategy: run.strategy.clone(),
            nm: None,
            markovian: None,
            pair: None,
            theta1: None,
            phi1: None,
            theta2: None,
            phi2: None,
            horizon: None,
            settled: None,
            max_ratio: None,
            oracle_discrepancy: None,
            warnings: String::new(),
            error_code: None,
            error: None,
            wall_time_s: None,
            numerical: false,
        }
    }

    fn fill(&mut self, r: &NmResult) {
        self.nm = Some(r.value);
        self.markovian = Some(r.markovian);
        self.pair = Some(r.kind.name().into());
        if let Some((a, b)) = r.pair.angles {
            self.theta1 = Some(a.theta);
            self.phi1 = Some(a.phi);
            self.theta2 = Some(b.theta);
            self.phi2 = Some(b.phi);
        }
        self.horizon = Some(r.horizon);
        self.settled = Some(r.settled);
        self.max_ratio = Some(r.flows.max_ratio());
        self.warnings = r.warnings.iter().map(|w| w.code()).collect::<Vec<_>>().join(";");
    }

    fn fail(&mut self, e: &CoreError) {
        self.error_code = Some(error_code(e).into());
        self.error = Some(e.to_string());
        self.numerical = is_numerical(e);
    }

    pub fn failed(&self) -> bool {
        self.error_code.is_some()
    }
}

/// Evaluates a single point; failures are recorded in the row.
pub fn evaluate_point(index: usize, m: &ModelConfig, run: &RunConfig) -> SweepRow {
    evaluate_point_full(index, m, run).0
}

/// As [`evaluate_point`], also handing back the full result on success.
pub fn evaluate_point_full(index: usize, m: &ModelConfig, run: &RunConfig) -> (SweepRow, Option<NmResult>) {
    let start = Instant::now();
    let mut row = SweepRow::blank(index, m, run);
    let result = (|| -> Result<(NmResult, Option<f64>), CoreError> {
        let invalid = |e: CliError| CoreError::InvalidParams(e.to_string());
        let params = m.params().map_err(invalid)?;
        let backend = run.backend().map_err(invalid)?;
        let strategy = run.strategy().map_err(invalid)?;
        let opts = NmOptions { backend, dynamics: run.dynamics(), sampling: run.sampling(), mk_eps: run.mk_eps };
        let dynamics = build_dynamics(&params, backend, &opts.dynamics)?;
        let nm = nm_measure_with(dynamics.as_ref(), &params, strategy, &opts)?;
        let oracle = if run.oracle && params.n_spins <= DEFAULT_ORACLE_CAP {
            let times = default_times(dynamics.horizon().min(10.0), 100);
            Some(oracle_discrepancy(&params, dynamics.as_ref(), &times)?)
        } else {
            None
        };
        Ok((nm, oracle))
    })();
    let nm = match result {
        Ok((nm, oracle)) => {
            row.fill(&nm);
            row.oracle_discrepancy = oracle;
            if run.oracle && oracle.is_none() {
                if !row.warnings.is_empty() {
                    row.warnings.push(';');
                }
                row.warnings.push_str("oracle_cap");
            }
            Some(nm)
        }
        Err(e) => {
            row.fail(&e);
            None
        }
    };
    if run.timing {
        row.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    (row, nm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSummary {
    pub points: usize,
    pub failed: usize,
    pub numerical_failures: usize,
}

/// Runs every point on a pool of `spec.workers` threads and writes rows in
/// grid order as soon as each prefix is complete.
pub fn run_sweep(spec: &SweepSpec) -> CliResult<SweepSummary> {
    let out = spec.out.as_deref().ok_or_else(|| CliError::Validation("sweep needs --out".into()))?;
    let points = spec.points();
    let run = spec.run_config();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| CliError::Validation(format!("worker pool: {e}")))?;
    let mut writer = RecordWriter::create(out, spec.jsonl.as_deref(), spec)?;

    let (tx, rx) = mpsc::channel::<SweepRow>();
    let mut summary = SweepSummary { points: points.len(), failed: 0, numerical_failures: 0 };
    std::thread::scope(|scope| -> CliResult<()> {
        let points = &points;
        let run = &run;
        let pool = &pool;
        scope.spawn(move || {
            pool.install(|| {
                points.par_iter().enumerate().for_each_with(tx, |tx, (i, m)| {
                    let _ = tx.send(evaluate_point(i, m, run));
                });
            });
        });
        let mut pending = BTreeMap::new();
        let mut next = 0;
        for row in rx {
            pending.insert(row.index, row);
            while let Some(row) = pending.remove(&next) {
                if row.failed() {
                    summary.failed += 1;
                    summary.numerical_failures += row.numerical as usize;
                }
                writer.write(&row)?;
                writer.flush()?;
                next += 1;
            }
        }
        Ok(())
    })?;
    writer.flush()?;
    Ok(summary)
}
