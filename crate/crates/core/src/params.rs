use alloc::format;

use crate::{Error, Result};

/// Spectral density of each local bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spectrum {
    /// Memoryless bath: the Lindblad limit.
    Flat,
    /// Lorentzian of half-width `width` centred `offset` away from the
    /// peripheral transition frequency.
    Lorentzian { width: f64, offset: f64 },
}

/// Physical parameters of the spin star. Energies and rates share one unit
/// (ħ = 1); the CLI expresses everything in units of `j_coupling`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n_spins: usize,
    pub j_coupling: f64,
    /// XY anisotropy λ; 0 is the excitation-conserving isotropic case.
    pub anisotropy: f64,
    /// Δ = ε − ε₀, peripheral minus central splitting parameter.
    pub detuning: f64,
    pub gamma: f64,
    pub nbar: f64,
    pub spectrum: Spectrum,
}

impl ModelParams {
    /// Isotropic, resonant, zero-temperature star with a flat bath.
    pub fn new(n_spins: usize, j_coupling: f64, gamma: f64) -> Self {
        Self {
            n_spins,
            j_coupling,
            anisotropy: 0.0,
            detuning: 0.0,
            gamma,
            nbar: 0.0,
            spectrum: Spectrum::Flat,
        }
    }

    pub fn with_anisotropy(mut self, lambda: f64) -> Self {
        self.anisotropy = lambda;
        self
    }

    pub fn with_detuning(mut self, delta: f64) -> Self {
        self.detuning = delta;
        self
    }

    pub fn with_nbar(mut self, nbar: f64) -> Self {
        self.nbar = nbar;
        self
    }

    pub fn with_spectrum(mut self, spectrum: Spectrum) -> Self {
        self.spectrum = spectrum;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.j_coupling, self.anisotropy, self.detuning, self.gamma, self.nbar]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite("model parameters"));
        }
        if self.n_spins == 0 {
            return Err(Error::InvalidParams("n_spins must be at least 1".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParams(format!("gamma = {} is negative", self.gamma)));
        }
        if self.nbar < 0.0 {
            return Err(Error::InvalidParams(format!("nbar = {} is negative", self.nbar)));
        }
        if let Spectrum::Lorentzian { width, offset } = self.spectrum {
            if !(width > 0.0 && width.is_finite()) || !offset.is_finite() {
                return Err(Error::InvalidParams(format!("Lorentzian width {width} must be positive")));
            }
        }
        Ok(())
    }

    /// Zero temperature and isotropic coupling: the single-excitation sector
    /// is closed.
    pub fn is_single_excitation(&self) -> bool {
        self.anisotropy == 0.0 && self.nbar == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ModelParams::new(3, 1.0, 0.5).validate().is_ok());
        assert!(ModelParams::new(0, 1.0, 0.5).validate().is_err());
        assert!(ModelParams::new(2, 1.0, -0.1).validate().is_err());
        assert!(ModelParams::new(2, 1.0, 0.1).with_nbar(-1.0).validate().is_err());
        let lor = Spectrum::Lorentzian { width: 0.0, offset: 0.0 };
        assert!(ModelParams::new(2, 1.0, 0.1).with_spectrum(lor).validate().is_err());
        assert!(ModelParams::new(2, f64::NAN, 0.1).validate().is_err());
    }
}
