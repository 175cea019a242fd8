//! Closed-form single-excitation amplitudes.
//!
//! At zero temperature and isotropic coupling the central excitation only
//! hops to the symmetric peripheral mode, so the reduced state is fixed by
//! one complex amplitude `g(t)`: populations scale with `|g|²` and
//! coherences with `g`.

mod flat;
mod lorentzian;

use core::f64::consts::PI;

use alloc::format;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

pub use flat::{amplitude_flat, FlatKernel};
pub use lorentzian::{amplitude_lorentzian, cubic_roots, lorentzian_polynomial, CubicRoots, LorentzianKernel};

use crate::state::bloch_to_matrix;
use crate::{BlochAngles, Error, ModelParams, QubitState, Result, Spectrum, C64};

/// Lorentzian bath seen by each peripheral spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianBath {
    /// Spectral width λ_B.
    pub width: f64,
    /// Coupling rate γ.
    pub gamma: f64,
    /// Centre offset δ_B from the peripheral transition.
    pub offset: f64,
}

/// Parameters of the amplitude equation
/// `g̈ + (G + iδ) ġ + Ω² g = 0` (flat bath) or its Lorentzian-memory
/// generalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeKernelParams {
    /// Effective peripheral amplitude decay `G = γ(n̄ + ½)`.
    pub rate: f64,
    /// Frequency offset δ of the peripheral excitation relative to the
    /// central one.
    pub detuning: f64,
    /// Collective hopping Ω between the central spin and the symmetric
    /// peripheral mode.
    pub coupling: f64,
    pub lorentzian: Option<LorentzianBath>,
}

impl AmplitudeKernelParams {
    pub fn flat(rate: f64, detuning: f64, coupling: f64) -> Self {
        Self { rate, detuning, coupling, lorentzian: None }
    }

    pub fn lorentzian(detuning: f64, coupling: f64, bath: LorentzianBath) -> Self {
        Self { rate: 0.5 * bath.gamma, detuning, coupling, lorentzian: Some(bath) }
    }

    /// Maps model parameters onto the kernel: the peripheral excitation sits
    /// `2Δ` above the central one and the hopping `J/2` is enhanced by `√N`.
    pub fn from_model(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let coupling = 0.5 * params.j_coupling.abs() * (params.n_spins as f64).sqrt();
        let detuning = 2.0 * params.detuning;
        let rate = params.gamma * (params.nbar + 0.5);
        let lorentzian = match params.spectrum {
            Spectrum::Flat => None,
            Spectrum::Lorentzian { width, offset } => Some(LorentzianBath { width, gamma: params.gamma, offset }),
        };
        Ok(Self { rate, detuning, coupling, lorentzian })
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.rate, self.detuning, self.coupling].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("kernel parameters"));
        }
        if self.rate < 0.0 || self.coupling < 0.0 {
            return Err(Error::InvalidParams("kernel rate and coupling must be nonnegative".into()));
        }
        if let Some(b) = self.lorentzian {
            if !(b.width > 0.0 && b.width.is_finite()) || !(b.gamma >= 0.0 && b.gamma.is_finite()) {
                return Err(Error::InvalidParams("Lorentzian width must be positive and gamma nonnegative".into()));
            }
        }
        Ok(())
    }
}

/// Continuous-time amplitude with a decaying upper bound.
pub trait AmplitudeKernel {
    fn amplitude(&self, t: f64) -> C64;
    /// Upper bound on `|g(s)|` for every `s ≥ t`.
    fn envelope(&self, t: f64) -> f64;
}

/// Trace distance of two pure states under the amplitude map, at the
/// optimal relative azimuth `φ₁ − φ₂ = π`.
pub fn closed_form_trace_distance(pair: (BlochAngles, BlochAngles), amplitude: C64) -> Result<f64> {
    let g = amplitude.norm();
    if !g.is_finite() {
        return Err(Error::NonFinite("amplitude"));
    }
    if g > 1.0 + 1e-9 {
        return Err(Error::ValidityDomain(format!("|g| = {g} exceeds 1")));
    }
    let (a, b) = (BlochAngles::new(pair.0.theta, pair.0.phi), BlochAngles::new(pair.1.theta, pair.1.phi));
    let dc = a.theta.cos() - b.theta.cos();
    let ss = a.theta.sin() + b.theta.sin();
    Ok(0.5 * g * (g * g * dc * dc + ss * ss).sqrt())
}

/// Central-spin state after the amplitude map `ρ₊₊ → |g|²ρ₊₊`, `ρ₊₋ → g ρ₊₋`.
pub fn apply_amplitude(state: &QubitState, amplitude: C64) -> QubitState {
    let r = state.bloch_vector();
    let coh = amplitude * C64::new(r[0], r[1]);
    let z = 1.0 - amplitude.norm_sqr() * (1.0 - r[2]);
    QubitState::new_unchecked(bloch_to_matrix([coh.re, coh.im, z]))
}

/// `(N, J) → (1, J√N)`; valid only where the dynamics stays in the
/// single-excitation sector.
pub fn scaling_map(params: &ModelParams) -> Result<ModelParams> {
    params.validate()?;
    if params.anisotropy != 0.0 || params.nbar > 0.0 {
        return Err(Error::ValidityDomain("the J√N scaling needs λ = 0 and n̄ = 0".into()));
    }
    let mut out = *params;
    out.n_spins = 1;
    out.j_coupling = params.j_coupling * (params.n_spins as f64).sqrt();
    Ok(out)
}

/// Antipodal equatorial pair with the given first azimuth.
pub fn equatorial_pair(phi: f64) -> (BlochAngles, BlochAngles) {
    (BlochAngles::new(0.5 * PI, phi), BlochAngles::new(0.5 * PI, phi + PI))
}
