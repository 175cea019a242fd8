use core::f64::consts::PI;

use alloc::format;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use crate::{ComplexMat2, Error, Result, C64};

fn wrap(x: f64) -> f64 {
    x - (x / (2.0 * PI)).floor() * 2.0 * PI
}

/// Bloch angles of a pure central-spin state
/// `cos(θ/2)|−⟩ + e^{iφ} sin(θ/2)|+⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAngles {
    /// Builds angles, folding them into `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut theta = wrap(theta);
        let mut phi = phi;
        if theta > PI {
            // Reflect through the pole: same point, azimuth shifted by π.
            theta = 2.0 * PI - theta;
            phi += PI;
        }
        let mut phi = wrap(phi);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    /// Unit Bloch vector, ground state on the north pole.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Density matrix of the central spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: ComplexMat2,
}

impl QubitState {
    /// Validates `rho` as a density matrix within `tol`.
    pub fn new(rho: ComplexMat2, tol: f64) -> Result<Self> {
        if rho.0.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("qubit density matrix"));
        }
        if !rho.is_hermitian(tol) {
            return Err(Error::InvalidState(format!("not Hermitian within {tol:e}")));
        }
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let (lo, _) = rho.hermitian_eigenvalues();
        if lo < -tol {
            return Err(Error::Positivity { min_eigenvalue: lo });
        }
        Ok(Self { rho })
    }

    /// Wraps a matrix already known to be a valid state.
    pub(crate) fn new_unchecked(rho: ComplexMat2) -> Self {
        Self { rho }
    }

    pub fn ground() -> Self {
        Self { rho: ComplexMat2::PROJ_MINUS }
    }

    pub fn excited() -> Self {
        Self { rho: ComplexMat2::PROJ_PLUS }
    }

    pub fn maximally_mixed() -> Self {
        Self { rho: ComplexMat2::IDENTITY * 0.5 }
    }

    /// Pure state with the given Bloch angles.
    pub fn from_bloch(angles: BlochAngles) -> Self {
        let a = BlochAngles::new(angles.theta, angles.phi);
        let (s, c) = (0.5 * a.theta).sin_cos();
        // amplitudes in (|+⟩, |−⟩) order
        let plus = C64::from_polar(s, a.phi);
        let minus = C64::new(c, 0.0);
        let rho = ComplexMat2::new(
            plus * plus.conj(),
            plus * minus.conj(),
            minus * plus.conj(),
            minus * minus.conj(),
        );
        Self { rho }
    }

    /// State with Bloch vector `r` (`|r| ≤ 1`), ground state at `z = +1`.
    pub fn from_bloch_vector(r: [f64; 3]) -> Result<Self> {
        let norm2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
        if !norm2.is_finite() {
            return Err(Error::NonFinite("Bloch vector"));
        }
        if norm2 > 1.0 + 1e-12 {
            return Err(Error::InvalidState(format!("Bloch vector length {} > 1", norm2.sqrt())));
        }
        Ok(Self { rho: bloch_to_matrix(r) })
    }

    pub fn matrix(&self) -> &ComplexMat2 {
        &self.rho
    }

    /// `(x, y, z)` with `x + iy = 2ρ₊₋` and `z = ρ₋₋ − ρ₊₊`.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let coh = self.rho[(0, 1)] * 2.0;
        [coh.re, coh.im, (self.rho[(1, 1)] - self.rho[(0, 0)]).re]
    }

    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// Excited-state population `⟨+|ρ|+⟩`.
    pub fn excited_population(&self) -> f64 {
        self.rho[(0, 0)].re
    }

    /// Coherence `⟨+|ρ|−⟩`.
    pub fn coherence(&self) -> C64 {
        self.rho[(0, 1)]
    }
}

pub(crate) fn bloch_to_matrix(r: [f64; 3]) -> ComplexMat2 {
    let coh = C64::new(r[0], r[1]) * 0.5;
    ComplexMat2::new(
        C64::new(0.5 * (1.0 - r[2]), 0.0),
        coh,
        coh.conj(),
        C64::new(0.5 * (1.0 + r[2]), 0.0),
    )
}

/// `½ Tr|a − b|`.
pub fn trace_distance(a: &QubitState, b: &QubitState) -> f64 {
    let (lo, hi) = (a.rho - b.rho).hermitian_eigenvalues();
    0.5 * (lo.abs() + hi.abs())
}

impl Default for QubitState {
    fn default() -> Self {
        Self::ground()
    }
}
