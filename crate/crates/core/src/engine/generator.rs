use alloc::vec::Vec;

use super::classes::{ClassIndex, DampingClass};
use crate::damping::{single_spin_damping_basis, DampingBasis};
use crate::linalg::{CMatrix, CsrMatrix};
use crate::{ComplexMat2, Error, ModelParams, Result, Spectrum, C64};

/// Class-reduced generator `Ċ = M C`.
///
/// Coefficient index `4·class + n` addresses the central element `μⁿ`
/// together with the symmetric peripheral sum over `class`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    n_spins: usize,
    index: ClassIndex,
    matrix: CsrMatrix,
    basis: DampingBasis,
}

impl GeneratorMatrix {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn classes(&self) -> &[DampingClass] {
        self.index.classes()
    }

    pub fn class_index(&self) -> &ClassIndex {
        &self.index
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn to_dense(&self) -> CMatrix {
        self.matrix.to_dense()
    }

    pub fn basis(&self) -> &DampingBasis {
        &self.basis
    }

    /// Flat position of `(central n, class)`.
    pub fn position(&self, central: usize, class: usize) -> usize {
        4 * class + central
    }
}

/// Builds `M` for a flat (Lindblad) bath.
pub fn build_generator(params: &ModelParams) -> Result<GeneratorMatrix> {
    params.validate()?;
    if params.spectrum != Spectrum::Flat {
        return Err(Error::ValidityDomain("the damping-basis generator needs a flat bath".into()));
    }
    let basis = single_spin_damping_basis(params.gamma, params.nbar)?;
    let index = ClassIndex::new(params.n_spins);

    let lam = [0, 1, 2, 3].map(|k| basis.eigenvalue(k));
    let free = basis.superoperator_matrix(|m| {
        (ComplexMat2::SIGMA_Z.commutator(m)) * C64::new(0.0, -params.detuning)
    });
    let j = params.j_coupling;
    let couplings = [
        (ComplexMat2::SIGMA_X, 0.25 * j * (1.0 + params.anisotropy)),
        (ComplexMat2::SIGMA_Y, 0.25 * j * (1.0 - params.anisotropy)),
    ];
    let actions: Vec<_> = couplings
        .iter()
        .map(|(op, c)| (basis.left_action(op), basis.right_action(op), *c))
        .collect();
    // w[r][n][l][k] = −i Σ_p c_p (L_rn L_lk − R_rn R_lk)
    let mut w = [[[[C64::new(0.0, 0.0); 4]; 4]; 4]; 4];
    for (left, right, c) in &actions {
        for r in 0..4 {
            for n in 0..4 {
                for l in 0..4 {
                    for k in 0..4 {
                        let v = left[r][n] * left[l][k] - right[r][n] * right[l][k];
                        w[r][n][l][k] += v * C64::new(0.0, -c);
                    }
                }
            }
        }
    }

    let dim = 4 * index.len();
    let mut trip = Vec::new();
    for (s, class) in index.classes().iter().enumerate() {
        let decay = class.counts.iter().zip(&lam).fold(C64::new(0.0, 0.0), |acc, (&n, &l)| acc + l * n as f64);
        for n in 0..4 {
            trip.push((4 * s + n, 4 * s + n, decay));
        }
        for k in 0..4 {
            if class.counts[k] == 0 {
                continue;
            }
            for l in 0..4 {
                let target = class.moved(k, l).unwrap();
                let t = index.position(&target).unwrap();
                let weight = target.counts[l] as f64;
                if free[l][k] != C64::new(0.0, 0.0) {
                    for n in 0..4 {
                        trip.push((4 * t + n, 4 * s + n, free[l][k] * weight));
                    }
                }
                for r in 0..4 {
                    for n in 0..4 {
                        let v = w[r][n][l][k];
                        if v.norm() > 0.0 {
                            trip.push((4 * t + r, 4 * s + n, v * weight));
                        }
                    }
                }
            }
        }
    }
    let matrix = CsrMatrix::from_triplets(dim, dim, prune(trip));
    Ok(GeneratorMatrix { n_spins: params.n_spins, index, matrix, basis })
}

/// Drops round-off sized entries so the sparsity pattern reflects the
/// exact selection rules.
fn prune(trip: Vec<(usize, usize, C64)>) -> Vec<(usize, usize, C64)> {
    let scale = trip.iter().map(|t| t.2.norm()).fold(0.0, f64::max);
    trip.into_iter().filter(|t| t.2.norm() > 1e-15 * scale).collect()
}
