use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use spinstar_core::blp::{
    nm_flows, nm_measure, nm_measure_with, optimal_pair_check, partition_monotonicity, sample_trace_distance,
    NmOptions, NmWarning, PairKind, SampledDynamics, SamplingOptions, StatePair, Strategy, TraceDistanceSeries,
};
use spinstar_core::dynamics::{build_dynamics, DynamicsOptions, Provenance};
use spinstar_core::{BlochAngles, ModelParams};

fn pure(t1: f64, p1: f64, t2: f64, p2: f64) -> StatePair {
    StatePair::pure(BlochAngles::new(t1, p1), BlochAngles::new(t2, p2))
}

fn ten_over_j() -> NmOptions {
    NmOptions { dynamics: DynamicsOptions::default().with_t_max(10.0), ..Default::default() }
}

#[test]
fn revivals_shrink_with_damping() {
    let mut last: Option<(usize, f64, f64)> = None;
    for gamma in [0.5, 1.0, 1.5] {
        let p = ModelParams::new(6, 1.0, gamma);
        let s = sample_trace_distance(&p, &pure(FRAC_PI_2, 0.0, FRAC_PI_2, PI), &ten_over_j()).unwrap();
        let part = partition_monotonicity(&s).unwrap();
        let value = nm_measure(&p, Strategy::Candidates, &NmOptions::default()).unwrap().value;
        let now = (part.rising_count(), part.peak_revival(), value);
        assert!(now.0 >= 2);
        if let Some(prev) = last {
            assert!(now.0 <= prev.0 && now.1 < prev.1 && now.2 < prev.2, "{prev:?} -> {now:?}");
        }
        last = Some(now);
    }
}

#[test]
fn markovian_window_in_detuning() {
    let opts = NmOptions::default();
    let at = |d: f64| nm_measure(&ModelParams::new(6, 1.0, 6f64.sqrt()).with_detuning(d), Strategy::Candidates, &opts).unwrap();
    let zero = at(0.0);
    assert_eq!(zero.kind, PairKind::Equatorial);
    assert!(!zero.markovian);
    assert!(at(1.0).markovian);
    let far = at(3.0);
    assert_eq!(far.kind, PairKind::Polar);
    assert!(far.value > 1e-4 && far.value < zero.value);
    assert!((far.value - at(-3.0).value).abs() < 1e-6);
}

#[test]
fn strongly_overdamped_is_markovian() {
    let r = nm_measure(&ModelParams::new(2, 1.0, 6.0), Strategy::Candidates, &NmOptions::default()).unwrap();
    assert_eq!(r.value, 0.0);
    assert_eq!(r.partition.rising_count(), 0);
}

#[test]
fn flow_bookkeeping() {
    for (gamma, delta) in [(0.5, 0.0), (6f64.sqrt(), 3.0), (1.0, 0.7)] {
        let p = ModelParams::new(6, 1.0, gamma).with_detuning(delta);
        let r = nm_measure(&p, Strategy::Candidates, &NmOptions::default()).unwrap();
        let f = &r.flows;
        assert!(f.balance_defect(&r.series) < 1e-6);
        assert_eq!(f.total_inflow(), r.value);
        assert!(f.ratio.iter().all(|&x| (0.0..=1.0 + 1e-9).contains(&x)));
        assert!(!r.warnings.iter().any(|w| matches!(w, NmWarning::RatioAboveOne { .. })));
        // no in-flow before the first revival
        let first = r.partition.first_revival().unwrap_or(f64::INFINITY);
        for (t, ratio) in f.times.iter().zip(&f.ratio) {
            if *t <= first {
                assert_eq!(*ratio, 0.0);
            }
        }
    }
}

#[test]
fn series_starts_at_static_distance() {
    let p = ModelParams::new(3, 1.0, 0.9).with_anisotropy(0.4).with_detuning(0.2);
    let pair = pure(0.7, 0.1, 2.2, 2.0);
    let s = sample_trace_distance(&p, &pair, &ten_over_j()).unwrap();
    assert!((s.values[0] - pair.initial_distance()).abs() < 1e-12);
    assert!(s.values.iter().all(|&d| (0.0..=1.0 + 1e-12).contains(&d)));
    assert!(s.times.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn flat_backend_rejects_anisotropy() {
    let p = ModelParams::new(3, 1.0, 1.0).with_anisotropy(0.3);
    let opts = NmOptions { backend: Provenance::FlatKernel, ..Default::default() };
    assert!(nm_measure(&p, Strategy::Candidates, &opts).is_err());
}

#[test]
fn measure_is_symmetric() {
    let p = ModelParams::new(4, 1.0, 0.5).with_anisotropy(0.5).with_detuning(0.1);
    let dynamics = build_dynamics(&p, Provenance::Engine, &DynamicsOptions::default()).unwrap();
    let sampled = SampledDynamics::new(dynamics.as_ref(), &SamplingOptions::default()).unwrap();
    let value = |pair: &StatePair| {
        let s = sampled.series(pair);
        nm_flows(&s, &partition_monotonicity(&s).unwrap()).total_inflow()
    };
    let pair = pure(0.8, 0.3, 2.0, 2.5);
    let base = value(&pair);
    assert!(base > 0.0);
    assert!((value(&pair.swapped()) - base).abs() < 1e-9);
    // rotation by π about z commutes with the anisotropic coupling
    assert!((value(&pure(0.8, 0.3 + PI, 2.0, 2.5 + PI)) - base).abs() < 1e-9);
    let iso = ModelParams::new(4, 1.0, 0.5).with_detuning(0.1);
    let iso_dyn = build_dynamics(&iso, Provenance::Engine, &DynamicsOptions::default()).unwrap();
    let iso_sampled = SampledDynamics::new(iso_dyn.as_ref(), &SamplingOptions::default()).unwrap();
    let iso_value = |pair: &StatePair| {
        let s = iso_sampled.series(pair);
        nm_flows(&s, &partition_monotonicity(&s).unwrap()).total_inflow()
    };
    let a = iso_value(&pair);
    assert!(a > 0.0);
    for shift in [0.4, 1.7, 4.0] {
        assert!((iso_value(&pure(0.8, 0.3 + shift, 2.0, 2.5 + shift)) - a).abs() < 1e-9);
    }
}

#[test]
fn grid_halving_is_stable() {
    for delta in [0.0, 0.5, 3.0] {
        let p = ModelParams::new(6, 1.0, 6f64.sqrt()).with_detuning(delta);
        let coarse = nm_measure(&p, Strategy::Candidates, &NmOptions::default()).unwrap().value;
        let fine_opts = NmOptions { sampling: SamplingOptions { dt: 0.005, ..Default::default() }, ..Default::default() };
        let fine = nm_measure(&p, Strategy::Candidates, &fine_opts).unwrap().value;
        assert!((coarse - fine).abs() < 1e-4);
    }
}

#[test]
fn analytic_candidates_are_optimal() {
    let opts = NmOptions::default();
    let near = optimal_pair_check(&ModelParams::new(6, 1.0, 6f64.sqrt()), 13, &opts).unwrap();
    assert_eq!(near.candidate_kind, PairKind::Equatorial);
    assert!(near.candidate_optimal(), "{near:?}");
    let far = optimal_pair_check(&ModelParams::new(6, 1.0, 6f64.sqrt()).with_detuning(3.0), 13, &opts).unwrap();
    assert_eq!(far.candidate_kind, PairKind::Polar);
    assert!(far.candidate_optimal(), "{far:?}");
    assert!(optimal_pair_check(&ModelParams::new(2, 1.0, 1.0).with_nbar(1.0), 5, &opts).is_err());
}

#[test]
fn mixed_pairs_never_beat_pure_optimum() {
    let p = ModelParams::new(4, 1.0, 1.0).with_detuning(0.4);
    let dynamics = build_dynamics(&p, Provenance::Engine, &DynamicsOptions::default()).unwrap();
    let opts = NmOptions::default();
    let best = nm_measure_with(dynamics.as_ref(), &p, Strategy::Grid { resolution: 13 }, &opts).unwrap().value;
    let sampled = SampledDynamics::new(dynamics.as_ref(), &opts.sampling).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut ball = || loop {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return v;
        }
    };
    let mut buf = Vec::new();
    for _ in 0..1000 {
        let pair = StatePair::mixed(ball(), ball()).unwrap();
        assert!(sampled.quick_nm(pair.difference(), &mut buf) <= best + 1e-9);
    }
}

#[test]
fn flow_ratio_shapes_by_detuning() {
    let opts = NmOptions::default();
    let at = |d: f64| nm_measure(&ModelParams::new(8, 1.0, 8f64.sqrt()).with_detuning(d), Strategy::Candidates, &opts).unwrap();
    let resonant = at(0.0);
    let last = *resonant.flows.ratio.last().unwrap();
    assert!(last > 0.05);
    let far = at(3.0);
    assert!(*far.flows.ratio.last().unwrap() < 0.05);
    let window = at(0.7);
    assert!(window.flows.max_ratio() < 1e-3);
}

#[test]
fn warm_baths_use_a_fixed_horizon() {
    let p = ModelParams::new(2, 1.0, 0.1).with_nbar(3.0).with_detuning(0.5);
    let r = nm_measure(&p, Strategy::Candidates, &NmOptions::default()).unwrap();
    assert!(r.value > 1e-4);
    assert!(r.warnings.iter().any(|w| matches!(w, NmWarning::FixedHorizon { .. })));
    assert!((r.horizon - 200.0).abs() < 1e-9);
}

#[test]
fn hybrid_is_at_least_grid() {
    let p = ModelParams::new(3, 1.0, 0.8).with_anisotropy(0.6).with_detuning(0.4);
    let opts = NmOptions { dynamics: DynamicsOptions::default().with_t_max(30.0), ..Default::default() };
    let grid = nm_measure(&p, Strategy::Grid { resolution: 7 }, &opts).unwrap();
    let hybrid = nm_measure(&p, Strategy::Hybrid { resolution: 7 }, &opts).unwrap();
    assert!(hybrid.value >= grid.value);
    assert!(grid.value >= grid.candidates.iter().map(|c| c.1).fold(0.0, f64::max));
}

fn series_from(values: Vec<f64>) -> TraceDistanceSeries {
    let times = (0..values.len()).map(|i| i as f64).collect();
    TraceDistanceSeries { times, values, pair: pure(0.0, 0.0, PI, 0.0), provenance: Provenance::Engine }
}

proptest! {
    #[test]
    fn telescoping_balance(values in prop::collection::vec(0.0f64..1.0, 3..200)) {
        let s = series_from(values);
        let part = partition_monotonicity(&s).unwrap();
        let flows = nm_flows(&s, &part);
        prop_assert!(flows.balance_defect(&s) < 1e-12);
        prop_assert!(part.intervals.windows(2).all(|w| w[0].rising != w[1].rising && w[0].end == w[1].start));
        prop_assert_eq!(part.intervals.first().unwrap().start, 0);
        prop_assert_eq!(part.intervals.last().unwrap().end, s.len() - 1);
        prop_assert!(flows.inflow.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(flows.outflow.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn angles_fold_into_range(theta in -20.0f64..20.0, phi in -20.0f64..20.0) {
        let a = BlochAngles::new(theta, phi);
        prop_assert!((0.0..=PI).contains(&a.theta) && (0.0..2.0 * PI).contains(&a.phi));
        let r = a.bloch_vector();
        let direct = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        for i in 0..3 {
            prop_assert!((r[i] - direct[i]).abs() < 1e-12);
        }
    }
}
