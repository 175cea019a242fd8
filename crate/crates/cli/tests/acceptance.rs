//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use spinstar::config::{ConfigFile, ModelConfig, Overrides, RunConfig, SweepSpec, TrajectoryConfig};
use spinstar::sweep::run_sweep;
use spinstar::trajectories::export_trajectories;
use spinstar_core::blp::{
    nm_measure, partition_monotonicity, sample_trace_distance, NmOptions, NmResult, PairKind, StatePair, Strategy,
};
use spinstar_core::dynamics::{evolve_state, DynamicsOptions};
use spinstar_core::engine::EngineDynamics;
use spinstar_core::kernels::{amplitude_flat, amplitude_lorentzian, scaling_map, AmplitudeKernelParams, LorentzianBath};
use spinstar_core::oracle::{evolve, reduced_central_state, DenseState};
use spinstar_core::{trace_distance, BlochAngles, ModelParams, QubitState, C64};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

/// Balance defects of every measure evaluated by the suite.
static DEFECTS: Mutex<Vec<f64>> = Mutex::new(Vec::new());

fn record(r: &NmResult) {
    DEFECTS.lock().unwrap().push(r.flows.balance_defect(&r.series));
}

fn measure(p: &ModelParams) -> NmResult {
    let r = nm_measure(p, Strategy::Candidates, &NmOptions::default()).unwrap();
    record(&r);
    r
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn probes() -> Vec<QubitState> {
    vec![
        QubitState::ground(),
        QubitState::excited(),
        QubitState::from_bloch(BlochAngles::new(1.1, 0.4)),
        QubitState::from_bloch(BlochAngles::new(2.3, -2.0)),
    ]
}

fn oracle_equivalence() -> Outcome {
    let mut grid = Vec::new();
    for n in 1..=4usize {
        for lambda in [0.0, 0.5, -0.5, 1.0, -1.0] {
            for delta in [0.0, 0.7, 3.0] {
                for gamma in [0.5, 1.0, (n as f64).sqrt()] {
                    for nbar in [0.0, 0.5, 3.0] {
                        grid.push(
                            ModelParams::new(n, 1.0, gamma).with_anisotropy(lambda).with_detuning(delta).with_nbar(nbar),
                        );
                    }
                }
            }
        }
    }
    let times: Vec<f64> = (0..=100).map(|k| 0.1 * k as f64).collect();
    let worst = grid
        .par_iter()
        .map(|p| {
            let engine = EngineDynamics::new(p, &DynamicsOptions::default().with_t_max(10.0)).unwrap();
            let mut worst = 0.0f64;
            for q in probes() {
                let full = evolve(p, &DenseState::with_ground_periphery(&q, p.n_spins), &times).unwrap();
                for (t, s) in times.iter().zip(&full) {
                    worst = worst.max(trace_distance(&reduced_central_state(s), &evolve_state(&engine, &q, *t)));
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    ensure(worst < 1e-7, format!("max discrepancy {worst:.2e}"))?;
    Ok(format!("{} points, max discrepancy {worst:.2e}", grid.len()))
}

fn kernel_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let plus = QubitState::from_bloch(BlochAngles::new(FRAC_PI_2, 0.0));
    for n in [1usize, 4, 6] {
        for delta in [0.0, 0.7, 3.0] {
            for gamma in [0.5, 1.0, (n as f64).sqrt()] {
                let p = ModelParams::new(n, 1.0, gamma).with_detuning(delta);
                let opts = DynamicsOptions::default().with_t_max(10.0);
                let engine = EngineDynamics::new(&p, &opts).unwrap();
                let kernel = AmplitudeKernelParams::from_model(&p).unwrap();
                for k in 0..=1000 {
                    let t = 0.01 * k as f64;
                    let g = amplitude_flat(&kernel, t).unwrap();
                    let ratio = evolve_state(&engine, &plus, t).coherence() / plus.coherence();
                    worst = worst.max((ratio - g).norm());
                }
            }
        }
    }
    ensure(worst < 1e-7, format!("sup-norm {worst:.2e}"))?;
    Ok(format!("27 points, sup-norm {worst:.2e}"))
}

fn scaling_law() -> Outcome {
    let mut worst = 0.0f64;
    for n in [2usize, 4, 9] {
        for delta in [0.0, 0.7, -1.3] {
            for gamma in [0.5, (n as f64).sqrt()] {
                let p = ModelParams::new(n, 1.0, gamma).with_detuning(delta);
                let q = scaling_map(&p).unwrap();
                let a = EngineDynamics::new(&p, &DynamicsOptions::default().with_t_max(10.0)).unwrap();
                let b = EngineDynamics::new(&q, &DynamicsOptions::default().with_t_max(10.0 * q.j_coupling)).unwrap();
                for s in probes() {
                    for k in 0..=200 {
                        let t = 0.05 * k as f64;
                        worst = worst.max(trace_distance(&evolve_state(&a, &s, t), &evolve_state(&b, &s, t)));
                    }
                }
            }
        }
    }
    ensure(worst < 1e-8, format!("max distance {worst:.2e}"))?;
    Ok(format!("N in {{2, 4, 9}}, max distance {worst:.2e}"))
}

/// Central amplitude, symmetric peripheral mode and bath pseudomode,
/// integrated by classical RK4.
fn pseudomode_rk4(detuning: f64, coupling: f64, bath: LorentzianBath, t_end: f64, steps: usize) -> Vec<(f64, C64)> {
    let i = C64::new(0.0, 1.0);
    let f = |y: [C64; 3]| -> [C64; 3] {
        [
            -i * coupling * y[1],
            -i * detuning * y[1] - i * coupling * y[0] - y[2],
            0.5 * bath.gamma * bath.width * y[1] - (bath.width + i * detuning) * y[2],
        ]
    };
    let h = t_end / steps as f64;
    let mut y = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    let mut out = vec![(0.0, y[0])];
    let add = |a: [C64; 3], b: [C64; 3], s: f64| [a[0] + b[0] * s, a[1] + b[1] * s, a[2] + b[2] * s];
    for k in 0..steps {
        let k1 = f(y);
        let k2 = f(add(y, k1, h / 2.0));
        let k3 = f(add(y, k2, h / 2.0));
        let k4 = f(add(y, k3, h));
        for j in 0..3 {
            y[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
        }
        out.push(((k + 1) as f64 * h, y[0]));
    }
    out
}

fn lorentzian_kernel() -> Outcome {
    let cases = [
        (0.0, 1.0, LorentzianBath { width: 0.5, gamma: 2.0, offset: 0.0 }),
        (1.4, 0.8, LorentzianBath { width: 3.0, gamma: 1.0, offset: 0.0 }),
        (-0.6, 6f64.sqrt() / 2.0, LorentzianBath { width: 1.0, gamma: 6f64.sqrt(), offset: 0.0 }),
        (6.0, 2.0, LorentzianBath { width: 0.2, gamma: 0.1, offset: 0.0 }),
    ];
    let mut ode = 0.0f64;
    for (detuning, coupling, bath) in cases {
        let params = AmplitudeKernelParams::lorentzian(detuning, coupling, bath);
        for (t, expected) in pseudomode_rk4(detuning, coupling, bath, 10.0, 20_000).into_iter().step_by(10) {
            ode = ode.max((amplitude_lorentzian(&params, t).unwrap() - expected).norm());
        }
    }
    let mut wide = 0.0f64;
    for (gamma, detuning, coupling) in [(1.0, 0.0, 1.2), (1.0, 1.4, 0.5), (6f64.sqrt(), 0.0, 6f64.sqrt() / 2.0)] {
        let bath = LorentzianBath { width: 1e3 * gamma, gamma, offset: 0.0 };
        let lor = AmplitudeKernelParams::lorentzian(detuning, coupling, bath);
        let flat = AmplitudeKernelParams::flat(0.5 * gamma, detuning, coupling);
        for k in 0..=1000 {
            let t = 0.01 * k as f64;
            wide = wide.max((amplitude_lorentzian(&lor, t).unwrap() - amplitude_flat(&flat, t).unwrap()).norm());
        }
    }
    ensure(ode < 1e-6, format!("ODE sup-norm {ode:.2e}"))?;
    ensure(wide < 1e-3, format!("wide-band gap {wide:.2e}"))?;
    Ok(format!("ODE sup-norm {ode:.2e}, wide-band gap {wide:.2e}"))
}

fn revivals_by_damping() -> Outcome {
    let pair = StatePair::pure(BlochAngles::new(FRAC_PI_2, 0.0), BlochAngles::new(FRAC_PI_2, PI));
    let window = NmOptions { dynamics: DynamicsOptions::default().with_t_max(10.0), ..Default::default() };
    let mut rows = Vec::new();
    for gamma in [0.5, 1.0, 1.5] {
        let p = ModelParams::new(6, 1.0, gamma);
        let s = sample_trace_distance(&p, &pair, &window).unwrap();
        let part = partition_monotonicity(&s).unwrap();
        let r = measure(&p);
        rows.push((part.rising_count(), part.peak_revival(), r.value));
    }
    let detail = rows.iter().map(|(c, h, v)| format!("({c}, {h:.3}, {v:.3})")).collect::<Vec<_>>().join(" -> ");
    for w in rows.windows(2) {
        ensure(w[1].0 <= w[0].0, format!("rising counts increase: {detail}"))?;
        ensure(w[1].1 < w[0].1, format!("peak revival not decreasing: {detail}"))?;
        ensure(w[1].2 < w[0].2, format!("measure not decreasing: {detail}"))?;
    }
    Ok(format!("(rising, peak, N) {detail}"))
}

fn detuning_window() -> Outcome {
    let deltas: Vec<f64> = (-12..=12).map(|k| 0.25 * k as f64).collect();
    let results: Vec<NmResult> =
        deltas.par_iter().map(|&d| measure(&ModelParams::new(6, 1.0, 6f64.sqrt()).with_detuning(d))).collect();
    let at = |d: f64| &results[deltas.iter().position(|x| *x == d).unwrap()];
    let zero = at(0.0);
    let max = results.iter().map(|r| r.value).fold(0.0, f64::max);
    ensure(zero.value == max, format!("max {max} is not at zero detuning ({})", zero.value))?;
    ensure(zero.kind == PairKind::Equatorial, format!("zero-detuning winner {:?}", zero.kind))?;
    let window: Vec<f64> = deltas.iter().zip(&results).filter(|(_, r)| r.value < 1e-4).map(|(d, _)| *d).collect();
    ensure(!window.is_empty(), "no Markovian window")?;
    let far = at(3.0);
    ensure(far.value > 1e-4 && far.kind == PairKind::Polar, format!("at 3: {} {:?}", far.value, far.kind))?;
    let asym = deltas
        .iter()
        .map(|d| (at(*d).value - at(-*d).value).abs())
        .fold(0.0, f64::max);
    ensure(asym < 1e-6, format!("asymmetry {asym:.2e}"))?;
    Ok(format!(
        "N(0) = {:.4}, Markovian at {:?}, N(3) = {:.4} polar, asymmetry {asym:.1e}",
        zero.value, window, far.value
    ))
}

fn growth_with_size() -> Outcome {
    let mut values = Vec::new();
    for n in [2usize, 4, 8, 16] {
        let q = scaling_map(&ModelParams::new(n, 1.0, 1.0)).unwrap();
        values.push(measure(&q).value);
    }
    ensure(values.windows(2).all(|w| w[1] > w[0]), format!("{values:?}"))?;
    Ok(format!("N over {{2, 4, 8, 16}}: {values:.3?}"))
}

fn warm_bath_growth() -> Outcome {
    let deltas: Vec<f64> = (-4..=4).map(|k| 0.25 * k as f64).collect();
    let sizes = [2usize, 4, 8];
    let points: Vec<(usize, f64)> = sizes.iter().flat_map(|&n| deltas.iter().map(move |&d| (n, d))).collect();
    let values: Vec<f64> = points
        .par_iter()
        .map(|&(n, d)| measure(&ModelParams::new(n, 1.0, 0.1).with_nbar(3.0).with_detuning(d)).value)
        .collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(min > 1e-4, format!("smallest value {min:.2e}"))?;
    let column = |i: usize| (0..sizes.len()).map(|k| values[k * deltas.len() + i]).collect::<Vec<f64>>();
    let broken: Vec<String> = (0..deltas.len())
        .filter(|&i| !column(i).windows(2).all(|w| w[1] > w[0]))
        .map(|i| format!("{}: {:.4?}", deltas[i], column(i)))
        .collect();
    ensure(broken.is_empty(), format!("min over grid {min:.3}; not increasing in N at {}", broken.join(", ")))?;
    Ok(format!("min over grid {min:.3}, increasing in N at all {} detunings", deltas.len()))
}

fn flow_ratio_shapes() -> Outcome {
    let mut parts = Vec::new();
    for delta in [0.0, 0.7, 3.0] {
        let r = measure(&ModelParams::new(8, 1.0, 8f64.sqrt()).with_detuning(delta));
        let first = r.partition.first_revival().unwrap_or(f64::INFINITY);
        let early = r.flows.times.iter().zip(&r.flows.ratio).filter(|(t, _)| **t <= first).map(|(_, x)| *x);
        let early = early.fold(0.0, f64::max);
        ensure(early == 0.0, format!("ratio {early} before the first revival at {delta}"))?;
        let last = *r.flows.ratio.last().unwrap();
        if delta == 3.0 {
            ensure(last < 0.05, format!("final ratio {last} at 3"))?;
        }
        if delta == 0.0 {
            // the ratio at the end of each revival
            let peaks: Vec<f64> = r.partition.rising().map(|iv| r.flows.ratio[iv.end]).collect();
            let high = peaks.iter().filter(|x| **x > 0.05).count();
            ensure(high >= 2 && last > 0.05, format!("ratio at revivals {peaks:?}, final {last}"))?;
        }
        parts.push(format!("{delta}: final {last:.3}"));
    }
    Ok(parts.join(", "))
}

fn trajectory_facts() -> Outcome {
    let run = |delta: f64, lambda: f64| {
        let model = ModelConfig { n_spins: 4, gamma: 1.0, delta, lambda, ..Default::default() };
        export_trajectories(&model, &RunConfig::default(), &TrajectoryConfig::default()).unwrap().1
    };
    let mut failures = Vec::new();
    let resonant = run(0.0, 0.0);
    let d0 = resonant.min_distance.unwrap();
    if d0 >= 1e-3 {
        failures.push(format!("resonant closest approach {d0:.2e}"));
    }
    let detuned = run(0.5, 0.0);
    let d1 = detuned.min_distance.unwrap();
    if d1 <= 1e-2 {
        failures.push(format!("detuned closest approach {d1:.2e}"));
    }
    let mut purities = Vec::new();
    for (delta, lambda) in [(0.0, 0.0), (0.5, 0.0), (0.0, 1.0), (0.5, 1.0), (0.0, -1.0), (0.5, -1.0)] {
        let s = if lambda == 0.0 && delta == 0.0 { resonant.clone() } else { run(delta, lambda) };
        let worst = s.final_purity.iter().copied().fold(0.0, f64::max);
        let ok = if lambda == 0.0 { (worst - 1.0).abs() < 1e-3 } else { worst < 0.99 };
        if !ok {
            failures.push(format!("final purity {worst:.4} at delta {delta}, lambda {lambda}"));
        }
        purities.push(format!("({delta}, {lambda}): {worst:.4}"));
    }
    let detail = format!("closest approach {d0:.1e} / {d1:.3}; final purity {}", purities.join(", "));
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", failures.join("; ")))
    }
}

fn flow_bookkeeping() -> Outcome {
    let defects = DEFECTS.lock().unwrap();
    let worst = defects.iter().copied().fold(0.0, f64::max);
    ensure(!defects.is_empty(), "no runs recorded")?;
    ensure(worst < 1e-6, format!("max defect {worst:.2e}"))?;
    Ok(format!("{} runs, max defect {worst:.2e}", defects.len()))
}

fn deterministic_sweep() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = ConfigFile::parse(
        "[model]\nn_spins = 6\n[sweep]\ngamma = [0.5, 1.0, 1.5]\ndelta = { start = -3.0, stop = 3.0, steps = 13 }\n",
    )
    .map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(format!("{name}.csv"));
        let jsonl = dir.path().join(format!("{name}.jsonl"));
        let o = Overrides { out: Some(out.clone()), jsonl: Some(jsonl.clone()), workers: Some(4), ..Default::default() };
        let spec = SweepSpec::from_config(&cfg, &o).map_err(|e| e.to_string())?;
        let summary = run_sweep(&spec).map_err(|e| e.to_string())?;
        ensure(summary.failed == 0, format!("{} failed points", summary.failed))?;
        bytes.push((std::fs::read(&out).unwrap(), std::fs::read(&jsonl).unwrap()));
    }
    ensure(bytes[0] == bytes[1], "outputs differ between runs")?;
    Ok(format!("39 points, {} CSV bytes identical", bytes[0].0.len()))
}

fn main() {
    let criteria: [Check; 12] = [
        ("oracle equivalence", oracle_equivalence),
        ("kernel equivalence", kernel_equivalence),
        ("scaling law", scaling_law),
        ("lorentzian kernel", lorentzian_kernel),
        ("revivals shrink with damping", revivals_by_damping),
        ("detuning window", detuning_window),
        ("growth with star size", growth_with_size),
        ("warm bath growth", warm_bath_growth),
        ("flow ratio shapes", flow_ratio_shapes),
        ("trajectory facts", trajectory_facts),
        ("flow bookkeeping", flow_bookkeeping),
        ("deterministic sweep", deterministic_sweep),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.1}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
