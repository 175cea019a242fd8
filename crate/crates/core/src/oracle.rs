//! Brute-force reference: the full `(N+1)`-spin density matrix evolved under
//! the complete master equation, then traced down to the central spin.
//!
//! Basis index bits run from spin 0 (most significant) to spin N; a zero bit
//! is `|+⟩`, matching the single-spin ordering. Only practical for a handful
//! of peripheral spins.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use crate::linalg::{hermitian_eigenvalues, CMatrix, CsrMatrix};
use crate::{ComplexMat2, Error, ModelParams, QubitState, Result, Spectrum, C64};

pub const DEFAULT_ORACLE_CAP: usize = 5;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Operator on the full star Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n_spins: usize,
    matrix: CMatrix,
}

impl DenseOperator {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.matrix.sub(&self.matrix.adjoint()).max_abs() <= tol
    }
}

/// Density matrix of the whole star.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n_spins: usize,
    rho: CMatrix,
}

impl DenseState {
    pub fn from_matrix(n_spins: usize, rho: CMatrix) -> Result<Self> {
        let d = dim_for(n_spins);
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::Dimension { expected: d, found: rho.rows() });
        }
        Ok(Self { n_spins, rho })
    }

    /// `ρ₀ ⊗ (|−⟩⟨−|)^⊗N`.
    pub fn with_ground_periphery(central: &QubitState, n_spins: usize) -> Self {
        let d = dim_for(n_spins);
        let tail = (1usize << n_spins) - 1;
        let mut rho = CMatrix::zeros(d, d);
        for s in 0..2 {
            for t in 0..2 {
                rho[((s << n_spins) | tail, (t << n_spins) | tail)] = central.matrix()[(s, t)];
            }
        }
        Self { n_spins, rho }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(&self.rho)?[0])
    }

    /// Checks Hermiticity, unit trace and positivity within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if !self.rho.is_finite() {
            return Err(Error::NonFinite("full density matrix"));
        }
        let herm = self.rho.sub(&self.rho.adjoint()).max_abs();
        if herm > tol {
            return Err(Error::InvalidState(format!("Hermiticity defect {herm:e}")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let lo = self.min_eigenvalue()?;
        if lo < -tol {
            return Err(Error::Positivity { min_eigenvalue: lo });
        }
        Ok(())
    }

    /// `⟨N̂⟩` with `N̂ = Σₖ |+⟩⟨+|ₖ` over all `N+1` spins.
    pub fn excitation_number(&self) -> f64 {
        let d = self.rho.rows();
        let total = self.n_spins as u32 + 1;
        (0..d).map(|i| (total - (i as u32).count_ones()) as f64 * self.rho[(i, i)].re).sum()
    }

    /// Marginal of spin `k` (0 is the central spin).
    pub fn reduced_spin(&self, k: usize) -> ComplexMat2 {
        let shift = self.n_spins - k;
        let mask = 1usize << shift;
        let d = self.rho.rows();
        let mut out = ComplexMat2::ZERO;
        for i in 0..d {
            if i & mask != 0 {
                continue;
            }
            let j = i | mask;
            out[(0, 0)] += self.rho[(i, i)];
            out[(0, 1)] += self.rho[(i, j)];
            out[(1, 0)] += self.rho[(j, i)];
            out[(1, 1)] += self.rho[(j, j)];
        }
        out
    }
}

/// Partial trace over the periphery.
pub fn reduced_central_state(full: &DenseState) -> QubitState {
    let m = full.reduced_spin(0);
    QubitState::new_unchecked((m + m.adjoint()) * 0.5)
}

fn dim_for(n_spins: usize) -> usize {
    1usize << (n_spins + 1)
}

fn check_cap(params: &ModelParams, cap: usize) -> Result<()> {
    params.validate()?;
    if params.n_spins > cap {
        return Err(Error::OracleCap { n_spins: params.n_spins, cap });
    }
    if params.spectrum != Spectrum::Flat {
        return Err(Error::ValidityDomain("the dense oracle only handles the flat (Lindblad) bath".into()));
    }
    Ok(())
}

fn hamiltonian_sparse(params: &ModelParams) -> CsrMatrix {
    let n = params.n_spins;
    let d = dim_for(n);
    let central = 1usize << n;
    let (j, lam, delta) = (params.j_coupling, params.anisotropy, params.detuning);
    let same = 0.5 * j * lam;
    let differ = 0.5 * j;
    let mut trip = Vec::with_capacity(d * (n + 1));
    for i in 0..d {
        let mut diag = 0.0;
        for k in 1..=n {
            let m = 1usize << (n - k);
            diag += if i & m == 0 { delta } else { -delta };
            let aligned = ((i & central) == 0) == ((i & m) == 0);
            let amp = if aligned { same } else { differ };
            trip.push((i ^ central ^ m, i, C64::new(amp, 0.0)));
        }
        trip.push((i, i, C64::new(diag, 0.0)));
    }
    CsrMatrix::from_triplets(d, d, trip)
}

/// Full Hamiltonian with the default cap.
pub fn build_hamiltonian(params: &ModelParams) -> Result<DenseOperator> {
    build_hamiltonian_with_cap(params, DEFAULT_ORACLE_CAP)
}

pub fn build_hamiltonian_with_cap(params: &ModelParams, cap: usize) -> Result<DenseOperator> {
    check_cap(params, cap)?;
    Ok(DenseOperator { n_spins: params.n_spins, matrix: hamiltonian_sparse(params).to_dense() })
}

/// Matrix-free master-equation generator on the full space.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    n_spins: usize,
    h: CsrMatrix,
    /// Diagonal of `Σⱼ (decay·P₊ⱼ + pump·P₋ⱼ)`.
    loss: Vec<f64>,
    decay: f64,
    pump: f64,
}

impl Liouvillian {
    pub fn new(params: &ModelParams) -> Result<Self> {
        Self::with_cap(params, DEFAULT_ORACLE_CAP)
    }

    pub fn with_cap(params: &ModelParams, cap: usize) -> Result<Self> {
        check_cap(params, cap)?;
        let n = params.n_spins;
        let decay = params.gamma * (params.nbar + 1.0);
        let pump = params.gamma * params.nbar;
        let loss = (0..dim_for(n))
            .map(|i| {
                (1..=n)
                    .map(|k| if i & (1usize << (n - k)) == 0 { decay } else { pump })
                    .sum()
            })
            .collect();
        Ok(Self { n_spins: n, h: hamiltonian_sparse(params), loss, decay, pump })
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    /// Crude bound on the induced max-norm of the generator.
    pub fn norm_bound(&self) -> f64 {
        let hmax = (0..self.dim()).map(|r| self.h.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max);
        let lmax = self.loss.iter().cloned().fold(0.0, f64::max);
        2.0 * hmax + 2.0 * lmax
    }

    pub fn apply(&self, rho: &CMatrix, out: &mut CMatrix) {
        let d = self.dim();
        let minus_i = C64::new(0.0, -1.0);
        for a in 0..d {
            for b in 0..d {
                let mut acc = ZERO;
                for (c, v) in self.h.row(a) {
                    acc += v * rho[(c, b)];
                }
                for (c, v) in self.h.row(b) {
                    acc -= rho[(a, c)] * v.conj();
                }
                out[(a, b)] = minus_i * acc - rho[(a, b)] * (0.5 * (self.loss[a] + self.loss[b]));
            }
        }
        let n = self.n_spins;
        for k in 1..=n {
            let m = 1usize << (n - k);
            for a in 0..d {
                for b in 0..d {
                    let v = rho[(a, b)];
                    if v == ZERO {
                        continue;
                    }
                    match (a & m == 0, b & m == 0) {
                        (true, true) => out[(a | m, b | m)] += v * self.decay,
                        (false, false) => out[(a & !m, b & !m)] += v * self.pump,
                        _ => {}
                    }
                }
            }
        }
    }

    pub fn apply_state(&self, rho: &DenseState) -> DenseState {
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        self.apply(&rho.rho, &mut out);
        DenseState { n_spins: self.n_spins, rho: out }
    }
}

/// Controls of the Taylor-series propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Series truncated once a term falls below `term_tol · ‖ρ‖`.
    pub term_tol: f64,
    /// Upper bound on `‖𝓛‖·h` for each substep.
    pub max_step_norm: f64,
    pub max_terms: usize,
    pub cap: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { term_tol: 1e-16, max_step_norm: 1.0, max_terms: 80, cap: DEFAULT_ORACLE_CAP }
    }
}

/// States at each of `times` (sorted, nonnegative), starting from `rho0` at t = 0.
pub fn evolve(params: &ModelParams, rho0: &DenseState, times: &[f64]) -> Result<Vec<DenseState>> {
    evolve_with(params, rho0, times, &OracleOptions::default())
}

pub fn evolve_with(
    params: &ModelParams,
    rho0: &DenseState,
    times: &[f64],
    opts: &OracleOptions,
) -> Result<Vec<DenseState>> {
    let liou = Liouvillian::with_cap(params, opts.cap)?;
    if rho0.n_spins != params.n_spins {
        return Err(Error::Dimension { expected: params.n_spins, found: rho0.n_spins });
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams("times must be sorted and nonnegative".into()));
    }
    let bound = liou.norm_bound().max(f64::MIN_POSITIVE);
    let d = liou.dim();
    let mut rho = rho0.rho.clone();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    let mut term = CMatrix::zeros(d, d);
    let mut next = CMatrix::zeros(d, d);
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let steps = (span * bound / opts.max_step_norm).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                taylor_step(&liou, &mut rho, h, opts, &mut term, &mut next)?;
            }
            now = t;
        }
        if !rho.is_finite() {
            return Err(Error::NonFinite("oracle state"));
        }
        out.push(DenseState { n_spins: params.n_spins, rho: rho.clone() });
    }
    Ok(out)
}

fn taylor_step(
    liou: &Liouvillian,
    rho: &mut CMatrix,
    h: f64,
    opts: &OracleOptions,
    term: &mut CMatrix,
    next: &mut CMatrix,
) -> Result<()> {
    let scale = rho.max_abs().max(f64::MIN_POSITIVE);
    term.as_mut_slice().copy_from_slice(rho.as_slice());
    for k in 1..=opts.max_terms {
        liou.apply(term, next);
        let f = C64::new(h / k as f64, 0.0);
        for (t, n) in term.as_mut_slice().iter_mut().zip(next.as_slice()) {
            *t = n * f;
        }
        rho.axpy(C64::new(1.0, 0.0), term);
        if term.max_abs() <= opts.term_tol * scale {
            return Ok(());
        }
    }
    Err(Error::Integration(format!("Taylor series did not converge in {} terms", opts.max_terms)))
}

/// `[H, N̂]` for the excitation-number operator, as a dense matrix.
pub fn excitation_commutator(h: &DenseOperator) -> CMatrix {
    let d = h.dim();
    let total = h.n_spins as u32 + 1;
    let count = |i: usize| (total - (i as u32).count_ones()) as f64;
    CMatrix::from_fn(d, d, |r, c| h.matrix[(r, c)] * (count(c) - count(r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BlochAngles;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_spin_hopping_block() {
        // |+−⟩ is index 1, |−+⟩ is index 2
        let p = ModelParams::new(1, 1.3, 0.0);
        let h = build_hamiltonian(&p).unwrap();
        assert!(h.is_hermitian(1e-14));
        assert!((h.matrix()[(1, 2)] - c(0.65, 0.0)).norm() < 1e-15);
        assert!(h.matrix()[(0, 3)].norm() < 1e-15);
    }

    #[test]
    fn ising_limit() {
        // λ = 1: (J/2) σˣσˣ connects |++⟩ and |−−⟩ with the same weight
        let p = ModelParams::new(1, 1.0, 0.0).with_anisotropy(1.0);
        let h = build_hamiltonian(&p).unwrap();
        assert!((h.matrix()[(0, 3)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((h.matrix()[(1, 2)] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn isotropic_conserves_excitations() {
        let p = ModelParams::new(3, 0.8, 0.0).with_detuning(0.4);
        let h = build_hamiltonian(&p).unwrap();
        assert!(excitation_commutator(&h).max_abs() < 1e-12);
        let p = p.with_anisotropy(0.5);
        let h = build_hamiltonian(&p).unwrap();
        assert!(excitation_commutator(&h).max_abs() > 0.1);
    }

    #[test]
    fn cap_is_enforced() {
        let p = ModelParams::new(6, 1.0, 1.0);
        assert!(matches!(build_hamiltonian(&p), Err(Error::OracleCap { n_spins: 6, cap: 5 })));
    }

    #[test]
    fn decoupled_populations_constant() {
        let p = ModelParams::new(2, 0.0, 0.0).with_detuning(0.9);
        let s = QubitState::from_bloch(BlochAngles::new(1.0, 0.3));
        let rho0 = DenseState::with_ground_periphery(&s, 2);
        let out = evolve(&p, &rho0, &[0.0, 1.0, 5.0]).unwrap();
        for st in &out {
            let r = reduced_central_state(st);
            assert!((r.excited_population() - s.excited_population()).abs() < 1e-13);
            assert!((r.coherence() - s.coherence()).norm() < 1e-13);
        }
    }

    #[test]
    fn single_spin_amplitude_damping() {
        let gamma = 0.7;
        let p = ModelParams::new(1, 0.0, gamma);
        let mut rho = CMatrix::zeros(4, 4);
        // central |−⟩, peripheral |+⟩: index 0b10
        rho[(2, 2)] = c(1.0, 0.0);
        let rho0 = DenseState::from_matrix(1, rho).unwrap();
        let ts = [0.5, 1.0, 3.0];
        let out = evolve(&p, &rho0, &ts).unwrap();
        for (st, &t) in out.iter().zip(&ts) {
            let pop = st.reduced_spin(1)[(0, 0)].re;
            assert!((pop - (-gamma * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn thermal_steady_state() {
        let nbar = 0.6;
        let p = ModelParams::new(2, 0.0, 1.5).with_nbar(nbar);
        let rho0 = DenseState::with_ground_periphery(&QubitState::excited(), 2);
        let out = evolve(&p, &rho0, &[40.0]).unwrap();
        let m = out[0].reduced_spin(2);
        assert!((m[(0, 0)].re - nbar / (2.0 * nbar + 1.0)).abs() < 1e-10);
        assert!((m[(1, 1)].re - (nbar + 1.0) / (2.0 * nbar + 1.0)).abs() < 1e-10);
    }

    #[test]
    fn partial_traces() {
        let s = QubitState::from_bloch(BlochAngles::new(2.0, 1.0));
        let full = DenseState::with_ground_periphery(&s, 3);
        let r = reduced_central_state(&full);
        assert!((*r.matrix() - *s.matrix()).max_abs() < 1e-15);

        // (|+−⟩ + |−+⟩)/√2
        let mut rho = CMatrix::zeros(4, 4);
        for &(a, b) in &[(1, 1), (1, 2), (2, 1), (2, 2)] {
            rho[(a, b)] = c(0.5, 0.0);
        }
        let bell = DenseState::from_matrix(1, rho.clone()).unwrap();
        assert!((*reduced_central_state(&bell).matrix() - ComplexMat2::IDENTITY * 0.5).max_abs() < 1e-15);

        // Bell-diagonal mixture: 0.7 of the state above, 0.3 of |++⟩
        let mut mix = rho.scale(c(0.7, 0.0));
        mix[(0, 0)] += c(0.3, 0.0);
        let m = reduced_central_state(&DenseState::from_matrix(1, mix).unwrap());
        assert!((m.excited_population() - 0.65).abs() < 1e-15);
        assert!(m.coherence().norm() < 1e-15);
    }

    #[test]
    fn evolution_stays_physical() {
        let p = ModelParams::new(3, 1.0, 0.8).with_anisotropy(0.5).with_detuning(0.3).with_nbar(0.5);
        let s = QubitState::from_bloch(BlochAngles::new(1.2, 0.4));
        let rho0 = DenseState::with_ground_periphery(&s, 3);
        let out = evolve(&p, &rho0, &[0.5, 2.0, 6.0]).unwrap();
        for st in &out {
            st.validate(1e-9).unwrap();
        }
    }

    #[test]
    fn excitation_number_conserved_without_bath() {
        let p = ModelParams::new(3, 1.0, 0.0).with_detuning(0.5);
        let s = QubitState::from_bloch(BlochAngles::new(2.5, 0.0));
        let rho0 = DenseState::with_ground_periphery(&s, 3);
        let n0 = rho0.excitation_number();
        for st in evolve(&p, &rho0, &[1.0, 4.0, 9.0]).unwrap() {
            assert!((st.excitation_number() - n0).abs() < 1e-9);
        }
    }

    #[test]
    fn tolerance_halving_is_stable() {
        let p = ModelParams::new(2, 1.0, 1.0).with_anisotropy(-0.5).with_detuning(0.7);
        let s = QubitState::from_bloch(BlochAngles::new(0.9, 2.0));
        let rho0 = DenseState::with_ground_periphery(&s, 2);
        let a = evolve(&p, &rho0, &[3.0]).unwrap();
        let opts = OracleOptions { term_tol: 0.5e-16, max_step_norm: 0.5, ..OracleOptions::default() };
        let b = evolve_with(&p, &rho0, &[3.0], &opts).unwrap();
        assert!(a[0].matrix().sub(b[0].matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn rejects_unsorted_times() {
        let p = ModelParams::new(1, 1.0, 1.0);
        let rho0 = DenseState::with_ground_periphery(&QubitState::excited(), 1);
        assert!(evolve(&p, &rho0, &[1.0, 0.5]).is_err());
    }
}
