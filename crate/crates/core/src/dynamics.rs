//! Backend-independent view of the reduced dynamics: an affine map of the
//! Bloch ball, available at any time up to a horizon.

use alloc::boxed::Box;
use alloc::format;

use crate::engine::EngineDynamics;
use crate::kernels::{AmplitudeKernel, AmplitudeKernelParams, FlatKernel, LorentzianKernel};
use crate::state::bloch_to_matrix;
use crate::{Error, ModelParams, QubitState, Result, Spectrum};

/// `r(t) = linear · r(0) + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochMap {
    pub linear: [[f64; 3]; 3],
    pub offset: [f64; 3],
}

impl BlochMap {
    pub fn identity() -> Self {
        Self { linear: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], offset: [0.0; 3] }
    }

    pub fn apply(&self, r: [f64; 3]) -> [f64; 3] {
        let mut out = self.apply_linear(r);
        for i in 0..3 {
            out[i] += self.offset[i];
        }
        out
    }

    pub fn apply_linear(&self, r: [f64; 3]) -> [f64; 3] {
        let m = &self.linear;
        [0, 1, 2].map(|i| m[i][0] * r[0] + m[i][1] * r[1] + m[i][2] * r[2])
    }

    /// Amplitude-damping form: `x + iy → g(x + iy)`, `1 − z → |g|²(1 − z)`.
    pub fn from_amplitude(g: crate::C64) -> Self {
        let g2 = g.norm_sqr();
        Self {
            linear: [[g.re, -g.im, 0.0], [g.im, g.re, 0.0], [0.0, 0.0, g2]],
            offset: [0.0, 0.0, 1.0 - g2],
        }
    }
}

/// Which solver produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Engine,
    FlatKernel,
    LorentzianKernel,
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Provenance::Engine => "engine",
            Provenance::FlatKernel => "flat",
            Provenance::LorentzianKernel => "lorentzian",
        }
    }
}

impl core::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "engine" => Ok(Provenance::Engine),
            "flat" => Ok(Provenance::FlatKernel),
            "lorentzian" => Ok(Provenance::LorentzianKernel),
            other => Err(Error::InvalidParams(format!("unknown backend '{other}'"))),
        }
    }
}

/// Horizon and tabulation controls. Times are in units of `1/J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsOptions {
    /// Fixed horizon; `None` picks it adaptively.
    pub t_max: Option<f64>,
    /// The adaptive horizon stops once the decaying part of the map falls
    /// below this.
    pub settle_eps: f64,
    /// Upper limit of the adaptive horizon.
    pub horizon_cap: f64,
    /// Largest spacing of the engine's tabulation grid.
    pub jet_spacing: f64,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        Self { t_max: None, settle_eps: 1e-5, horizon_cap: 200.0, jet_spacing: 0.05 }
    }
}

impl DynamicsOptions {
    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = Some(t_max);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParams(format!("t_max = {t} must be positive")));
            }
        }
        if !(self.settle_eps > 0.0) || !(self.horizon_cap > 0.0) || !(self.jet_spacing > 0.0) {
            return Err(Error::InvalidParams("dynamics tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Reduced central-spin dynamics on `[0, horizon]`.
pub trait CentralDynamics: Send + Sync {
    fn map_at(&self, t: f64) -> BlochMap;
    fn horizon(&self) -> f64;
    /// The decaying part of the map fell below the settle threshold by the
    /// horizon.
    fn settled(&self) -> bool;
    fn provenance(&self) -> Provenance;
    /// Length of `1/J` in the model's time unit.
    fn time_scale(&self) -> f64;
    /// Outside the regime where the backend is exact.
    fn heuristic(&self) -> bool {
        false
    }
}

/// `1/J`, or 1 when the coupling vanishes.
pub fn time_scale(params: &ModelParams) -> f64 {
    let j = params.j_coupling.abs();
    if j > 0.0 {
        1.0 / j
    } else {
        1.0
    }
}

/// Kernel-backed dynamics: a single amplitude drives the whole map.
#[derive(Debug, Clone)]
pub struct KernelDynamics<K> {
    kernel: K,
    horizon: f64,
    settled: bool,
    scale: f64,
    provenance: Provenance,
    heuristic: bool,
}

impl<K: AmplitudeKernel> KernelDynamics<K> {
    fn with_kernel(
        kernel: K,
        params: &ModelParams,
        opts: &DynamicsOptions,
        provenance: Provenance,
        heuristic: bool,
    ) -> Result<Self> {
        opts.validate()?;
        let scale = time_scale(params);
        let (horizon, settled) = match opts.t_max {
            Some(t) => (t * scale, kernel.envelope(t * scale) < opts.settle_eps),
            None => {
                let cap = opts.horizon_cap * scale;
                let step = 0.1 * scale;
                let mut t = 0.0;
                loop {
                    if kernel.envelope(t) < opts.settle_eps {
                        break (t.max(step), true);
                    }
                    if t >= cap {
                        break (cap, false);
                    }
                    t = (t + step).min(cap);
                }
            }
        };
        Ok(Self { kernel, horizon, settled, scale, provenance, heuristic })
    }

    pub fn amplitude(&self, t: f64) -> crate::C64 {
        self.kernel.amplitude(t.clamp(0.0, self.horizon))
    }
}

impl KernelDynamics<FlatKernel> {
    pub fn flat(params: &ModelParams, opts: &DynamicsOptions) -> Result<Self> {
        params.validate()?;
        if params.anisotropy != 0.0 {
            return Err(Error::ValidityDomain(format!(
                "the flat kernel needs isotropic coupling, got λ = {}",
                params.anisotropy
            )));
        }
        if params.spectrum != Spectrum::Flat {
            return Err(Error::ValidityDomain("the flat kernel needs a flat bath".into()));
        }
        let kernel = FlatKernel::new(&AmplitudeKernelParams::from_model(params)?)?;
        Self::with_kernel(kernel, params, opts, Provenance::FlatKernel, params.nbar > 0.0)
    }
}

impl KernelDynamics<LorentzianKernel> {
    pub fn lorentzian(params: &ModelParams, opts: &DynamicsOptions) -> Result<Self> {
        params.validate()?;
        if !params.is_single_excitation() {
            return Err(Error::ValidityDomain("the Lorentzian kernel needs λ = 0 and n̄ = 0".into()));
        }
        if !matches!(params.spectrum, Spectrum::Lorentzian { .. }) {
            return Err(Error::ValidityDomain("the Lorentzian kernel needs a Lorentzian bath".into()));
        }
        let kernel = LorentzianKernel::new(&AmplitudeKernelParams::from_model(params)?)?;
        Self::with_kernel(kernel, params, opts, Provenance::LorentzianKernel, false)
    }
}

impl<K: AmplitudeKernel + Send + Sync> CentralDynamics for KernelDynamics<K> {
    fn map_at(&self, t: f64) -> BlochMap {
        BlochMap::from_amplitude(self.amplitude(t))
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn settled(&self) -> bool {
        self.settled
    }

    fn provenance(&self) -> Provenance {
        self.provenance
    }

    fn time_scale(&self) -> f64 {
        self.scale
    }

    fn heuristic(&self) -> bool {
        self.heuristic
    }
}

/// Builds the requested backend, rejecting parameter regions where it does
/// not apply.
pub fn build_dynamics(
    params: &ModelParams,
    backend: Provenance,
    opts: &DynamicsOptions,
) -> Result<Box<dyn CentralDynamics>> {
    Ok(match backend {
        Provenance::Engine => Box::new(EngineDynamics::new(params, opts)?),
        Provenance::FlatKernel => Box::new(KernelDynamics::flat(params, opts)?),
        Provenance::LorentzianKernel => Box::new(KernelDynamics::lorentzian(params, opts)?),
    })
}

/// Applies the map at `t` to a central-spin state.
pub fn evolve_state(dynamics: &dyn CentralDynamics, state: &QubitState, t: f64) -> QubitState {
    let r = dynamics.map_at(t).apply(state.bloch_vector());
    QubitState::new_unchecked(bloch_to_matrix(r))
}
