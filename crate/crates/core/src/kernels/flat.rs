
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use super::{AmplitudeKernel, AmplitudeKernelParams};
use crate::{Error, Result, C64};

/// Below this `|z|/|a|` the two exponential modes are merged analytically.
const MERGE_RATIO: f64 = 1e-3;

/// Amplitude for a memoryless bath:
/// `g(t) = e^{−at/2} [cosh(zt) + (a/2z) sinh(zt)]`, `a = G + iδ`,
/// `z = √(a²/4 − Ω²)`, so that `g(0) = 1`, `ġ(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatKernel {
    a: C64,
    z: C64,
    merged: bool,
}

impl FlatKernel {
    pub fn new(params: &AmplitudeKernelParams) -> Result<Self> {
        params.validate()?;
        let a = C64::new(params.rate, params.detuning);
        let z = (a * a * 0.25 - params.coupling * params.coupling).sqrt();
        let merged = z.norm() <= MERGE_RATIO * a.norm().max(params.coupling);
        Ok(Self { a, z, merged })
    }

    /// Exponents `s± = −a/2 ± z` and their weights.
    fn modes(&self) -> [(C64, C64); 2] {
        let half = self.a * 0.5;
        let w = half / self.z;
        [(-half + self.z, (w + 1.0) * 0.5), (-half - self.z, (-w + 1.0) * 0.5)]
    }
}

fn sinhc(w: C64) -> C64 {
    if w.norm() < 1e-3 {
        let w2 = w * w;
        C64::new(1.0, 0.0) + w2 / 6.0 + w2 * w2 / 120.0
    } else {
        w.sinh() / w
    }
}

impl AmplitudeKernel for FlatKernel {
    fn amplitude(&self, t: f64) -> C64 {
        if self.merged {
            let zt = self.z * t;
            (-self.a * (0.5 * t)).exp() * (zt.cosh() + self.a * (0.5 * t) * sinhc(zt))
        } else {
            self.modes().iter().map(|(s, w)| w * (s * t).exp()).sum()
        }
    }

    fn envelope(&self, t: f64) -> f64 {
        if self.merged {
            let zn = self.z.norm();
            let decay = (-0.5 * self.a.re + zn) * t;
            decay.exp() * (1.0 + 0.5 * self.a.norm() * t)
        } else {
            self.modes().iter().map(|(s, w)| w.norm() * (s.re * t).exp()).sum()
        }
    }
}

/// `g(t)` for a flat bath.
pub fn amplitude_flat(params: &AmplitudeKernelParams, t: f64) -> Result<C64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParams("amplitude time must be finite and nonnegative".into()));
    }
    Ok(FlatKernel::new(params)?.amplitude(t))
}
