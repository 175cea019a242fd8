use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use spinstar::config::{ConfigFile, ModelConfig, Overrides, RunConfig, SweepSpec};
use spinstar::crosscheck::run_crosscheck;
use spinstar::error::{CliError, CliResult};
use spinstar::output::RecordWriter;
use spinstar::sweep::{evaluate_point_full, run_sweep};
use spinstar::trajectories::export_trajectories;

#[derive(Parser)]
#[command(name = "spinstar", version, about = "Spin-star open-system simulator and BLP non-Markovianity scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the measure over a grid of parameter points.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Export Bloch trajectories of the central spin.
    Trajectories {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointFlags,
    },
    /// Evaluate the measure at a single parameter point.
    Nm {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointFlags,
        /// Write D(t) and the information flows of the winning pair here.
        #[arg(long)]
        series: Option<PathBuf>,
    },
    /// Compare the fast backends with the dense Lindblad oracle.
    Crosscheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointFlags,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON-lines mirror of the CSV records.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_parser = ["engine", "flat", "lorentzian"])]
    backend: Option<String>,
    #[arg(long, value_parser = ["candidates", "grid", "hybrid"])]
    strategy: Option<String>,
    /// Horizon in units of 1/J.
    #[arg(long)]
    tmax: Option<f64>,
    /// Also compare against the dense oracle where it is affordable.
    #[arg(long)]
    oracle: bool,
    /// Record wall time per point (makes outputs run-dependent).
    #[arg(long)]
    timing: bool,
}

/// Overrides of the `[model]` table.
#[derive(Args)]
struct PointFlags {
    #[arg(long)]
    n_spins: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long)]
    nbar: Option<f64>,
}

impl PointFlags {
    fn apply(&self, m: &mut ModelConfig) {
        if let Some(v) = self.n_spins {
            m.n_spins = v;
        }
        if let Some(v) = self.gamma {
            m.gamma = v;
        }
        if let Some(v) = self.delta {
            m.delta = v;
        }
        if let Some(v) = self.lambda {
            m.lambda = v;
        }
        if let Some(v) = self.nbar {
            m.nbar = v;
        }
    }
}

impl Common {
    fn load(&self) -> CliResult<ConfigFile> {
        match &self.config {
            Some(p) => ConfigFile::load(p),
            None => Ok(ConfigFile::default()),
        }
    }

    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            jsonl: self.jsonl.clone(),
            workers: self.workers,
            backend: self.backend.clone(),
            strategy: self.strategy.clone(),
            tmax: self.tmax,
            oracle: self.oracle,
            timing: self.timing,
        }
    }

    fn resolve(&self, point: &PointFlags) -> CliResult<(ConfigFile, RunConfig)> {
        let mut cfg = self.load()?;
        point.apply(&mut cfg.model);
        let mut run = cfg.run.clone();
        run.apply(&self.overrides());
        run.validate()?;
        Ok((cfg, run))
    }
}

fn print_json(value: &impl Serialize) -> CliResult<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn write_all<R: Serialize>(path: &Path, jsonl: Option<&Path>, header: &impl Serialize, rows: &[R]) -> CliResult<()> {
    let mut w = RecordWriter::create(path, jsonl, header)?;
    for r in rows {
        w.write(r)?;
    }
    w.flush()
}

fn sweep(common: &Common) -> CliResult<()> {
    let cfg = common.load()?;
    let spec = SweepSpec::from_config(&cfg, &common.overrides())?;
    let summary = run_sweep(&spec)?;
    eprintln!("{} points, {} failed", summary.points, summary.failed);
    if summary.numerical_failures > 0 {
        return Err(CliError::Numerical(format!("{} points failed numerically", summary.numerical_failures)));
    }
    if summary.failed > 0 {
        return Err(CliError::Validation(format!("{} points were rejected", summary.failed)));
    }
    Ok(())
}

#[derive(Serialize)]
struct SeriesRow {
    t: f64,
    distance: f64,
    inflow: f64,
    outflow: f64,
    ratio: f64,
}

fn nm(common: &Common, point: &PointFlags, series: Option<&Path>) -> CliResult<()> {
    let (cfg, run) = common.resolve(point)?;
    spinstar::config::check_backend(&cfg.model.params()?, run.backend()?)?;
    let header = json!({ "command": "nm", "model": cfg.model, "backend": run.backend, "strategy": run.strategy,
        "resolution": run.resolution, "tmax": run.tmax, "mk_eps": run.mk_eps, "dt": run.dt });
    let (row, result) = evaluate_point_full(0, &cfg.model, &run);
    if let Some(out) = &run.out {
        write_all(out, run.jsonl.as_deref(), &header, std::slice::from_ref(&row))?;
    }
    if let (Some(path), Some(r)) = (series, &result) {
        let rows: Vec<SeriesRow> = (0..r.series.len())
            .map(|i| SeriesRow {
                t: r.series.times[i],
                distance: r.series.values[i],
                inflow: r.flows.inflow[i],
                outflow: r.flows.outflow[i],
                ratio: r.flows.ratio[i],
            })
            .collect();
        write_all(path, None, &header, &rows)?;
    }
    let candidates: Vec<_> = result.iter().flat_map(|r| &r.candidates).map(|(k, v)| json!({ k.name(): v })).collect();
    print_json(&json!({ "point": row, "candidates": candidates }))?;
    match (&row.error, row.numerical) {
        (None, _) => Ok(()),
        (Some(e), true) => Err(CliError::Numerical(e.clone())),
        (Some(e), false) => Err(CliError::Validation(e.clone())),
    }
}

fn trajectories(common: &Common, point: &PointFlags) -> CliResult<()> {
    let (cfg, run) = common.resolve(point)?;
    let (records, summary) = export_trajectories(&cfg.model, &run, &cfg.trajectories)?;
    if let Some(out) = &run.out {
        let header = json!({ "command": "trajectories", "model": cfg.model, "backend": run.backend,
            "tmax": run.tmax, "oracle": run.oracle, "trajectories": cfg.trajectories });
        write_all(out, run.jsonl.as_deref(), &header, &records)?;
    }
    print_json(&summary)
}

fn crosscheck(common: &Common, point: &PointFlags) -> CliResult<()> {
    let (cfg, run) = common.resolve(point)?;
    let (rows, report) = run_crosscheck(&cfg.model, &run, &cfg.crosscheck)?;
    if let Some(out) = &run.out {
        let header = json!({ "command": "crosscheck", "model": cfg.model, "crosscheck": cfg.crosscheck });
        write_all(out, run.jsonl.as_deref(), &header, &rows)?;
    }
    print_json(&report)?;
    if !report.pass {
        let worst = report.checks.iter().map(|c| c.max_discrepancy).fold(0.0, f64::max);
        return Err(CliError::Numerical(format!("discrepancy {worst:e} exceeds {:e}", report.tolerance)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep { common } => sweep(common),
        Command::Nm { common, point, series } => nm(common, point, series.as_deref()),
        Command::Trajectories { common, point } => trajectories(common, point),
        Command::Crosscheck { common, point } => crosscheck(common, point),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
