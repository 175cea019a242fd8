use core::cmp::Ordering;
use core::f64::consts::PI;

use alloc::vec::Vec;

use super::series::{nm_flows, partition_with, FlowResult, MonotonicityPartition, SampledDynamics, StatePair, TraceDistanceSeries};
use crate::{BlochAngles, Result};

/// Pair coordinates `[θ₁, θ₂, δφ, φ₁]`; the second azimuth is `φ₁ + δφ`.
pub(crate) type Coords = [f64; 4];

pub(crate) fn pair_from(x: &Coords) -> StatePair {
    StatePair::pure(BlochAngles::new(x[0], x[3]), BlochAngles::new(x[1], x[3] + x[2]))
}

pub(crate) const EQUATORIAL: Coords = [PI / 2.0, PI / 2.0, PI, 0.0];
pub(crate) const POLAR: Coords = [PI, 0.0, 0.0, 0.0];

/// A fully evaluated pair.
#[derive(Debug, Clone)]
pub(crate) struct Evaluated {
    pub coords: Coords,
    pub value: f64,
    pub series: TraceDistanceSeries,
    pub partition: MonotonicityPartition,
    pub flows: FlowResult,
}

pub(crate) fn evaluate(sampled: &SampledDynamics<'_>, x: Coords) -> Result<Evaluated> {
    let pair = pair_from(&x);
    let series = sampled.series(&pair);
    let partition = partition_with(&series, sampled.options().slope_eps)?;
    let flows = nm_flows(&series, &partition);
    Ok(Evaluated { coords: x, value: flows.total_inflow(), series, partition, flows })
}

fn angle_key(x: &Coords) -> [f64; 4] {
    let p = pair_from(x);
    let (a, b) = p.angles.unwrap();
    [a.theta, a.phi, b.theta, b.phi]
}

/// Larger value wins; values within `1e-12` relative tie and go to the
/// lexicographically smaller angles.
pub(crate) fn beats(value: f64, x: &Coords, best_value: f64, best: &Coords) -> bool {
    let tol = 1e-12 * best_value.abs().max(1.0);
    if value > best_value + tol {
        return true;
    }
    if value < best_value - tol {
        return false;
    }
    let (ka, kb) = (angle_key(x), angle_key(best));
    ka.iter().zip(&kb).map(|(a, b)| a.total_cmp(b)).find(|o| *o != Ordering::Equal) == Some(Ordering::Less)
}

fn linspace(n: usize, hi: f64) -> Vec<f64> {
    if n <= 1 {
        return alloc::vec![0.0];
    }
    (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
}

/// Grid over `(θ₁, θ₂, δφ)`, reduced by the model's symmetries. With
/// isotropic coupling only `θ₁ ≤ θ₂`, `φ₁ = 0` is needed; otherwise `φ₁`
/// runs over eight values in `[0, π)`.
pub(crate) fn grid_coords(resolution: usize, isotropic: bool) -> Vec<Coords> {
    let thetas = linspace(resolution, PI);
    let dphis = linspace(resolution, PI);
    let phis: Vec<f64> = if isotropic { alloc::vec![0.0] } else { (0..8).map(|k| k as f64 * PI / 8.0).collect() };
    let mut out = Vec::new();
    for &p1 in &phis {
        for (i, &t1) in thetas.iter().enumerate() {
            for (j, &t2) in thetas.iter().enumerate() {
                if isotropic && j < i {
                    continue;
                }
                for &dp in &dphis {
                    out.push([t1, t2, dp, p1]);
                }
            }
        }
    }
    out
}

/// Ranks the grid by the unrefined measure and returns the `keep` best.
pub(crate) fn grid_rank(sampled: &SampledDynamics<'_>, coords: &[Coords], keep: usize) -> Vec<(f64, Coords)> {
    let mut buf = Vec::new();
    let mut top: Vec<(f64, Coords)> = Vec::with_capacity(keep + 1);
    for x in coords {
        let dr = pair_from(x).difference();
        let v = sampled.quick_nm(dr, &mut buf);
        if top.len() < keep || v > top[top.len() - 1].0 {
            let at = top.iter().position(|(tv, _)| v > *tv).unwrap_or(top.len());
            top.insert(at, (v, *x));
            top.truncate(keep);
        }
    }
    top
}

/// Compass search from `start`, halving the step until it drops below
/// `min_step`. Returns the best evaluation and the number of evaluations.
pub(crate) fn compass(
    sampled: &SampledDynamics<'_>,
    start: Evaluated,
    dims: usize,
    initial_step: f64,
    min_step: f64,
) -> Result<(Evaluated, usize)> {
    let mut best = start;
    let mut step = initial_step;
    let mut evals = 0;
    while step >= min_step {
        let mut improved = false;
        for d in 0..dims {
            for sign in [1.0, -1.0] {
                let mut x = best.coords;
                x[d] += sign * step;
                let e = evaluate(sampled, x)?;
                evals += 1;
                if e.value > best.value + 1e-12 * best.value.max(1.0) {
                    best = e;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((best, evals))
}
