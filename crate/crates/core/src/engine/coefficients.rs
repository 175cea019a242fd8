use alloc::vec;
use alloc::vec::Vec;

use super::classes::{enumerate_classes, ClassIndex};
use super::generator::GeneratorMatrix;
use crate::damping::{single_spin_damping_basis, DampingBasis};
use crate::linalg::CMatrix;
use crate::oracle::{DenseState, DEFAULT_ORACLE_CAP};
use crate::{ComplexMat2, Error, QubitState, Result, C64};

/// Tolerated negative eigenvalue before a reduced state is reported as
/// unphysical.
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Coefficients `C_{n,κ}` of `ρ = Σ C_{n,κ} μⁿ ⊗ S_κ`, where `S_κ` is the sum
/// of all peripheral products in class `κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    n_spins: usize,
    values: Vec<C64>,
}

impl CoefficientVector {
    pub fn from_values(n_spins: usize, values: Vec<C64>) -> Result<Self> {
        let expected = 4 * super::classes::class_count(n_spins);
        if values.len() != expected {
            return Err(Error::Dimension { expected, found: values.len() });
        }
        Ok(Self { n_spins, values })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Central coefficients attached to the all-`μ¹` peripheral class.
    pub fn central(&self) -> [C64; 4] {
        let s = self.values.len() / 4 - 1;
        [0, 1, 2, 3].map(|n| self.values[4 * s + n])
    }

    /// Trace of the full star state.
    pub fn trace(&self) -> C64 {
        self.central()[0]
    }
}

/// `μⁿ ⊗ (|−⟩⟨−|)^⊗N` as a class vector with unit central weight.
pub(crate) fn ground_periphery(index: &ClassIndex, basis: &DampingBasis, central: usize) -> Vec<C64> {
    let x = basis.ground_coefficients()[1];
    let mut v = vec![C64::new(0.0, 0.0); 4 * index.len()];
    for (s, class) in index.classes().iter().enumerate() {
        if class.is_initial() {
            v[4 * s + central] = x.powu(class.counts[1] as u32);
        }
    }
    v
}

/// Coefficients of `ρ₀ ⊗ (|−⟩⟨−|)^⊗N`.
pub fn initial_coefficients(central: &QubitState, n_spins: usize, gamma: f64, nbar: f64) -> Result<CoefficientVector> {
    if n_spins == 0 {
        return Err(Error::InvalidParams("n_spins must be at least 1".into()));
    }
    let basis = single_spin_damping_basis(gamma, nbar)?;
    let index = ClassIndex::new(n_spins);
    let c0 = basis.coefficients(central.matrix());
    let mut values = vec![C64::new(0.0, 0.0); 4 * index.len()];
    for (n, c) in c0.iter().enumerate() {
        for (v, p) in values.iter_mut().zip(ground_periphery(&index, &basis, n)) {
            *v += p * c;
        }
    }
    Ok(CoefficientVector { n_spins, values })
}

/// Reduced central state: only the all-`μ¹` class survives the partial trace.
pub fn reduced_state(c: &CoefficientVector, gamma: f64, nbar: f64) -> Result<QubitState> {
    let basis = single_spin_damping_basis(gamma, nbar)?;
    central_from_coefficients(&basis, c.central())
}

pub(crate) fn central_matrix(basis: &DampingBasis, coeffs: [C64; 4]) -> ComplexMat2 {
    // enforce the Hermitian structure: c₁, c₂ real and c₃ = c₄*
    let coh = (coeffs[2] + coeffs[3].conj()) * 0.5;
    let sym = [C64::new(coeffs[0].re, 0.0), C64::new(coeffs[1].re, 0.0), coh, coh.conj()];
    basis.expand(&sym)
}

pub(crate) fn central_from_coefficients(basis: &DampingBasis, coeffs: [C64; 4]) -> Result<QubitState> {
    if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("coefficient vector"));
    }
    let m = central_matrix(basis, coeffs);
    let (lo, _) = m.hermitian_eigenvalues();
    if lo < -POSITIVITY_TOL {
        return Err(Error::Positivity { min_eigenvalue: lo });
    }
    Ok(QubitState::new_unchecked(m))
}

/// Expands the class coefficients into the full `2^(N+1)` density matrix
/// (spin 0 most significant), for cross-checks at small N.
pub fn reconstruct_full(c: &CoefficientVector, gen: &GeneratorMatrix) -> Result<DenseState> {
    let n = c.n_spins;
    if n > DEFAULT_ORACLE_CAP {
        return Err(Error::OracleCap { n_spins: n, cap: DEFAULT_ORACLE_CAP });
    }
    if gen.n_spins() != n {
        return Err(Error::Dimension { expected: gen.n_spins(), found: n });
    }
    let basis = gen.basis();
    let index = gen.class_index();
    let mats: Vec<CMatrix> = (0..4).map(|k| to_dense(basis.element(k))).collect();
    let pd = 1usize << n;
    let mut periphery: Vec<CMatrix> = (0..4).map(|_| CMatrix::zeros(pd, pd)).collect();
    let mut m = vec![0usize; n];
    loop {
        let mut counts = [0usize; 4];
        for &k in &m {
            counts[k] += 1;
        }
        let s = index.position(&super::classes::DampingClass::new(counts)).unwrap();
        let coeffs: Vec<C64> = (0..4).map(|r| c.values[4 * s + r]).collect();
        if coeffs.iter().any(|z| z.norm() > 0.0) {
            let mut prod = CMatrix::identity(1);
            for &k in &m {
                prod = prod.kron(&mats[k]);
            }
            for r in 0..4 {
                if coeffs[r].norm() > 0.0 {
                    periphery[r].axpy(coeffs[r], &prod);
                }
            }
        }
        // odometer over {0..3}^N
        let mut pos = 0;
        loop {
            if pos == n {
                let mut full = CMatrix::zeros(2 * pd, 2 * pd);
                for r in 0..4 {
                    full = full.add(&mats[r].kron(&periphery[r]));
                }
                return DenseState::from_matrix(n, full);
            }
            m[pos] += 1;
            if m[pos] < 4 {
                break;
            }
            m[pos] = 0;
            pos += 1;
        }
    }
}

fn to_dense(m: &ComplexMat2) -> CMatrix {
    CMatrix::from_fn(2, 2, |r, c| m[(r, c)])
}

/// Class coefficients of an arbitrary permutation-symmetric full state,
/// read off from one representative product per class.
pub fn project_full(full: &DenseState, gamma: f64, nbar: f64) -> Result<CoefficientVector> {
    let n = full.n_spins();
    let basis = single_spin_damping_basis(gamma, nbar)?;
    let duals: Vec<CMatrix> = (0..4).map(|k| to_dense(basis.dual(k))).collect();
    let classes = enumerate_classes(n);
    let mut values = Vec::with_capacity(4 * classes.len());
    for class in &classes {
        let mut rep = CMatrix::identity(1);
        for (k, &cnt) in class.counts.iter().enumerate() {
            for _ in 0..cnt {
                rep = rep.kron(&duals[k]);
            }
        }
        for r in 0..4 {
            let op = duals[r].kron(&rep);
            values.push(op.matmul(full.matrix()).trace());
        }
    }
    Ok(CoefficientVector { n_spins: n, values })
}
