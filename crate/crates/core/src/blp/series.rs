use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use crate::dynamics::{CentralDynamics, Provenance};
use crate::{BlochAngles, Error, Result};

/// Two initial central states, held as Bloch vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePair {
    pub first: [f64; 3],
    pub second: [f64; 3],
    /// Set when both states are pure and were given by angles.
    pub angles: Option<(BlochAngles, BlochAngles)>,
}

impl StatePair {
    pub fn pure(a: BlochAngles, b: BlochAngles) -> Self {
        let (a, b) = (BlochAngles::new(a.theta, a.phi), BlochAngles::new(b.theta, b.phi));
        Self { first: a.bloch_vector(), second: b.bloch_vector(), angles: Some((a, b)) }
    }

    pub fn mixed(first: [f64; 3], second: [f64; 3]) -> Result<Self> {
        for r in [first, second] {
            let n2 = r.iter().map(|x| x * x).sum::<f64>();
            if !n2.is_finite() {
                return Err(Error::NonFinite("Bloch vector"));
            }
            if n2 > 1.0 + 1e-12 {
                return Err(Error::InvalidState("Bloch vector outside the unit ball".into()));
            }
        }
        Ok(Self { first, second, angles: None })
    }

    pub fn difference(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.first[i] - self.second[i])
    }

    pub fn swapped(&self) -> Self {
        Self { first: self.second, second: self.first, angles: self.angles.map(|(a, b)| (b, a)) }
    }

    pub fn initial_distance(&self) -> f64 {
        0.5 * norm3(self.difference())
    }
}

pub(crate) fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

const QUICK_SAMPLES: usize = 4000;

/// Sampling and refinement controls. Times are in units of `1/J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingOptions {
    pub dt: f64,
    /// Width to which each interior extremum is localized.
    pub refine_tol: f64,
    /// Steps with `|ΔD| ≤ slope_eps · max D` count as flat.
    pub slope_eps: f64,
    pub refine: bool,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self { dt: 0.01, refine_tol: 1e-9, slope_eps: 1e-9, refine: true }
    }
}

/// `D(t)` for one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceDistanceSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub pair: StatePair,
    pub provenance: Provenance,
}

impl TraceDistanceSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// The linear part of the dynamics tabulated on a uniform grid, shared by
/// every pair evaluated against the same dynamics.
pub struct SampledDynamics<'a> {
    dynamics: &'a dyn CentralDynamics,
    times: Vec<f64>,
    linear: Vec<[[f64; 3]; 3]>,
    opts: SamplingOptions,
}

impl<'a> SampledDynamics<'a> {
    pub fn new(dynamics: &'a dyn CentralDynamics, opts: &SamplingOptions) -> Result<Self> {
        if !(opts.dt > 0.0) || !(opts.refine_tol > 0.0) || !(opts.slope_eps >= 0.0) {
            return Err(Error::InvalidParams("sampling step and tolerances must be positive".into()));
        }
        let horizon = dynamics.horizon();
        let dt = opts.dt * dynamics.time_scale();
        let n = ((horizon / dt).ceil() as usize).max(2);
        let times: Vec<f64> = (0..=n).map(|i| horizon * i as f64 / n as f64).collect();
        let linear = times.iter().map(|&t| dynamics.map_at(t).linear).collect();
        Ok(Self { dynamics, times, linear, opts: *opts })
    }

    pub fn dynamics(&self) -> &'a dyn CentralDynamics {
        self.dynamics
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn options(&self) -> &SamplingOptions {
        &self.opts
    }

    pub fn raw_values_into(&self, dr: [f64; 3], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.linear.iter().map(|m| 0.5 * norm3(apply3(m, dr))));
    }

    pub fn distance_at(&self, dr: [f64; 3], t: f64) -> f64 {
        0.5 * norm3(apply3(&self.dynamics.map_at(t).linear, dr))
    }

    /// Rising-interval total on a grid of at most `QUICK_SAMPLES` points,
    /// without extremum refinement. Used to rank candidate pairs.
    pub fn quick_nm(&self, dr: [f64; 3], buf: &mut Vec<f64>) -> f64 {
        let stride = self.linear.len().div_ceil(QUICK_SAMPLES).max(1);
        buf.clear();
        buf.extend(self.linear.iter().step_by(stride).map(|m| 0.5 * norm3(apply3(m, dr))));
        rising_total(buf, self.opts.slope_eps)
    }

    /// Samples `D(t)` and inserts each interior extremum located to
    /// `refine_tol`.
    pub fn series(&self, pair: &StatePair) -> TraceDistanceSeries {
        let dr = pair.difference();
        let mut values = Vec::with_capacity(self.times.len());
        self.raw_values_into(dr, &mut values);
        let mut times = self.times.clone();
        if self.opts.refine {
            let runs = monotone_runs(&values, self.opts.slope_eps);
            let tol = self.opts.refine_tol * self.dynamics.time_scale();
            let mut extra: Vec<(f64, f64)> = Vec::new();
            for &(_, end, rising) in &runs[..runs.len().saturating_sub(1)] {
                if end == 0 || end + 1 >= times.len() {
                    continue;
                }
                let sign = if rising { -1.0 } else { 1.0 };
                let f = |t: f64| sign * self.distance_at(dr, t);
                let (t, v) = golden_min(f, times[end - 1], times[end + 1], tol);
                let v = sign * v;
                let better = if rising { v > values[end] } else { v < values[end] };
                if better && (t - times[end]).abs() > 1e-12 * tol.max(1e-300) {
                    extra.push((t, v));
                }
            }
            if !extra.is_empty() {
                let mut merged: Vec<(f64, f64)> = times.iter().copied().zip(values.iter().copied()).collect();
                merged.extend(extra);
                merged.sort_by(|a, b| a.0.total_cmp(&b.0));
                merged.dedup_by(|a, b| a.0 == b.0);
                times = merged.iter().map(|p| p.0).collect();
                values = merged.iter().map(|p| p.1).collect();
            }
        }
        TraceDistanceSeries { times, values, pair: *pair, provenance: self.dynamics.provenance() }
    }
}

fn apply3(m: &[[f64; 3]; 3], r: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| m[i][0] * r[0] + m[i][1] * r[1] + m[i][2] * r[2])
}

/// Golden-section minimization on `[a, b]`, returning the best point seen.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc < fd { (c, fc) } else { (d, fd) };
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    best
}

/// Per-step direction of `values` with flat steps merged into their
/// neighbours: `+1` rising, `−1` falling.
fn step_signs(values: &[f64], slope_eps: f64) -> Vec<i8> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = slope_eps * scale;
    let mut signs: Vec<i8> = values
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d > eps {
                1
            } else if d < -eps {
                -1
            } else {
                0
            }
        })
        .collect();
    let first = signs.iter().copied().find(|&s| s != 0).unwrap_or(-1);
    let mut prev = first;
    for s in signs.iter_mut() {
        if *s == 0 {
            *s = prev;
        } else {
            prev = *s;
        }
    }
    signs
}

/// Maximal runs `(start, end, rising)` of equal step direction.
pub(crate) fn monotone_runs(values: &[f64], slope_eps: f64) -> Vec<(usize, usize, bool)> {
    let signs = step_signs(values, slope_eps);
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=signs.len() {
        if i == signs.len() || signs[i] != signs[start] {
            runs.push((start, i, signs[start] > 0));
            start = i;
        }
    }
    runs
}

fn rising_total(values: &[f64], slope_eps: f64) -> f64 {
    let signs = step_signs(values, slope_eps);
    signs
        .iter()
        .zip(values.windows(2))
        .filter(|(s, _)| **s > 0)
        .map(|(_, w)| w[1] - w[0])
        .sum()
}

/// One monotone piece of `D(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneInterval {
    /// Sample indices of the endpoints.
    pub start: usize,
    pub end: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub d_start: f64,
    pub d_end: f64,
    pub rising: bool,
}

impl MonotoneInterval {
    pub fn change(&self) -> f64 {
        self.d_end - self.d_start
    }
}

/// Alternating rising and falling intervals tiling the sampled window.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityPartition {
    pub intervals: Vec<MonotoneInterval>,
    pub slope_eps: f64,
}

impl MonotonicityPartition {
    pub fn rising(&self) -> impl Iterator<Item = &MonotoneInterval> {
        self.intervals.iter().filter(|i| i.rising)
    }

    pub fn rising_count(&self) -> usize {
        self.rising().count()
    }

    /// Largest single increase of `D`.
    pub fn peak_revival(&self) -> f64 {
        self.rising().map(|i| i.change()).fold(0.0, f64::max)
    }

    /// Sum of increases over all rising intervals.
    pub fn total_rise(&self) -> f64 {
        self.rising().map(|i| i.change()).sum()
    }

    /// Start time of the first rising interval.
    pub fn first_revival(&self) -> Option<f64> {
        self.rising().next().map(|i| i.t_start)
    }
}

pub fn partition_monotonicity(series: &TraceDistanceSeries) -> Result<MonotonicityPartition> {
    partition_with(series, SamplingOptions::default().slope_eps)
}

pub fn partition_with(series: &TraceDistanceSeries, slope_eps: f64) -> Result<MonotonicityPartition> {
    if series.len() < 3 || series.values.len() != series.times.len() {
        return Err(Error::InvalidParams("a trace-distance series needs at least 3 samples".into()));
    }
    if series.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("trace-distance series"));
    }
    let intervals = monotone_runs(&series.values, slope_eps)
        .into_iter()
        .map(|(start, end, rising)| MonotoneInterval {
            start,
            end,
            t_start: series.times[start],
            t_end: series.times[end],
            d_start: series.values[start],
            d_end: series.values[end],
            rising,
        })
        .collect();
    Ok(MonotonicityPartition { intervals, slope_eps })
}

/// Cumulative in-flow `𝒩⁺(τ)`, out-flow `𝒩⁻(τ)` (stored positive) and their
/// ratio at every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub times: Vec<f64>,
    pub inflow: Vec<f64>,
    pub outflow: Vec<f64>,
    pub ratio: Vec<f64>,
}

impl FlowResult {
    pub fn total_inflow(&self) -> f64 {
        self.inflow.last().copied().unwrap_or(0.0)
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratio.iter().cloned().fold(0.0, f64::max)
    }

    /// `max_τ |D(τ) − D(0) − 𝒩⁺(τ) + 𝒩⁻(τ)|`.
    pub fn balance_defect(&self, series: &TraceDistanceSeries) -> f64 {
        let d0 = series.values[0];
        series
            .values
            .iter()
            .zip(self.inflow.iter().zip(&self.outflow))
            .map(|(d, (p, m))| (d - d0 - p + m).abs())
            .fold(0.0, f64::max)
    }

    /// Ratio at the sample closest to `t`.
    pub fn ratio_at(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|&x| x < t).min(self.times.len() - 1);
        self.ratio[i]
    }
}

pub fn nm_flows(series: &TraceDistanceSeries, partition: &MonotonicityPartition) -> FlowResult {
    let n = series.len();
    let mut inflow = Vec::with_capacity(n);
    let mut outflow = Vec::with_capacity(n);
    let (mut up, mut down) = (0.0, 0.0);
    inflow.push(0.0);
    outflow.push(0.0);
    for iv in &partition.intervals {
        for i in iv.start + 1..=iv.end {
            let d = series.values[i] - series.values[i - 1];
            if iv.rising {
                up += d;
            } else {
                down -= d;
            }
            inflow.push(up);
            outflow.push(down);
        }
    }
    let ratio = inflow.iter().zip(&outflow).map(|(&p, &m)| if m > 0.0 { p / m } else { 0.0 }).collect();
    FlowResult { times: series.times.clone(), inflow, outflow, ratio }
}
