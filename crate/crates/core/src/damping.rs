//! Single-spin thermal dissipator and its damping basis.


use crate::linalg::CMatrix;
use crate::{ComplexMat2, Error, Result, C64};

/// Thermal amplitude-damping dissipator acting on one spin:
/// `γ(n̄+1) D[σ⁻] + γ n̄ D[σ⁺]`.
pub fn dissipator(gamma: f64, nbar: f64, rho: &ComplexMat2) -> ComplexMat2 {
    let sm = ComplexMat2::SIGMA_MINUS;
    let sp = ComplexMat2::SIGMA_PLUS;
    let decay = sm * *rho * sp - (ComplexMat2::PROJ_PLUS.anticommutator(rho)) * 0.5;
    let pump = sp * *rho * sm - (ComplexMat2::PROJ_MINUS.anticommutator(rho)) * 0.5;
    decay * (gamma * (nbar + 1.0)) + pump * (gamma * nbar)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisTag {
    /// Stationary element `(1 − σᶻ/(2n̄+1))/2`.
    Mu1,
    /// `σᶻ/2`
    Mu2,
    /// `σ⁺`
    Mu3,
    /// `σ⁻`
    Mu4,
}

impl BasisTag {
    pub const ALL: [BasisTag; 4] = [BasisTag::Mu1, BasisTag::Mu2, BasisTag::Mu3, BasisTag::Mu4];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Phase picked up under a rotation about z: `+1` for σ⁺, `−1` for σ⁻.
    pub fn charge(self) -> i32 {
        match self {
            BasisTag::Mu3 => 1,
            BasisTag::Mu4 => -1,
            _ => 0,
        }
    }
}

/// A right eigenoperator of the single-spin dissipator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaBasisElement {
    pub tag: BasisTag,
    pub matrix: ComplexMat2,
    pub eigenvalue: C64,
}

/// Right eigenoperators `μᵏ` and their duals `μ̌ᵏ` with `Tr[μ̌ᵏ μᵏ'] = δₖₖ'`.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingBasis {
    gamma: f64,
    nbar: f64,
    right: [SigmaBasisElement; 4],
    dual: [ComplexMat2; 4],
}

/// Builds the damping basis for rate `gamma` and occupation `nbar`.
///
/// Duals come from inverting the Gram matrix `Tr[μᵏ† μᵏ']`; eigenvalues are
/// read off as `Tr[μ̌ᵏ 𝓛(μᵏ)]`.
pub fn single_spin_damping_basis(gamma: f64, nbar: f64) -> Result<DampingBasis> {
    if !(gamma >= 0.0 && gamma.is_finite()) || !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidParams("damping basis needs gamma >= 0 and nbar >= 0".into()));
    }
    let kappa = 1.0 / (2.0 * nbar + 1.0);
    let mats = [
        (ComplexMat2::IDENTITY - ComplexMat2::SIGMA_Z * kappa) * 0.5,
        ComplexMat2::SIGMA_Z * 0.5,
        ComplexMat2::SIGMA_PLUS,
        ComplexMat2::SIGMA_MINUS,
    ];

    let gram = CMatrix::from_fn(4, 4, |k, l| (mats[k].adjoint() * mats[l]).trace());
    let ginv = gram.inverse()?;
    let mut dual = [ComplexMat2::ZERO; 4];
    for k in 0..4 {
        for j in 0..4 {
            dual[k] += mats[j].adjoint() * ginv[(k, j)];
        }
    }

    let mut right = [SigmaBasisElement { tag: BasisTag::Mu1, matrix: ComplexMat2::ZERO, eigenvalue: C64::new(0.0, 0.0) }; 4];
    for (k, tag) in BasisTag::ALL.into_iter().enumerate() {
        let image = dissipator(gamma, nbar, &mats[k]);
        right[k] = SigmaBasisElement { tag, matrix: mats[k], eigenvalue: (dual[k] * image).trace() };
    }
    Ok(DampingBasis { gamma, nbar, right, dual })
}

impl DampingBasis {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn elements(&self) -> &[SigmaBasisElement; 4] {
        &self.right
    }

    pub fn element(&self, k: usize) -> &ComplexMat2 {
        &self.right[k].matrix
    }

    pub fn dual(&self, k: usize) -> &ComplexMat2 {
        &self.dual[k]
    }

    pub fn duals(&self) -> &[ComplexMat2; 4] {
        &self.dual
    }

    pub fn eigenvalue(&self, k: usize) -> C64 {
        self.right[k].eigenvalue
    }

    /// Coefficients `Tr[μ̌ᵏ op]`.
    pub fn coefficients(&self, op: &ComplexMat2) -> [C64; 4] {
        let mut c = [C64::new(0.0, 0.0); 4];
        for k in 0..4 {
            c[k] = (self.dual[k] * *op).trace();
        }
        c
    }

    pub fn expand(&self, coeffs: &[C64; 4]) -> ComplexMat2 {
        (0..4).fold(ComplexMat2::ZERO, |acc, k| acc + self.right[k].matrix * coeffs[k])
    }

    /// Matrix of `X ↦ f(X)` in the damping basis: entry `(r, n)` is
    /// `Tr[μ̌ʳ f(μⁿ)]`.
    pub fn superoperator_matrix(&self, f: impl Fn(&ComplexMat2) -> ComplexMat2) -> [[C64; 4]; 4] {
        let mut out = [[C64::new(0.0, 0.0); 4]; 4];
        for n in 0..4 {
            let image = f(&self.right[n].matrix);
            for r in 0..4 {
                out[r][n] = (self.dual[r] * image).trace();
            }
        }
        out
    }

    /// Left multiplication `μ ↦ A μ` in the basis.
    pub fn left_action(&self, a: &ComplexMat2) -> [[C64; 4]; 4] {
        self.superoperator_matrix(|m| *a * *m)
    }

    /// Right multiplication `μ ↦ μ A` in the basis.
    pub fn right_action(&self, a: &ComplexMat2) -> [[C64; 4]; 4] {
        self.superoperator_matrix(|m| *m * *a)
    }

    /// Coefficients of the single-spin ground state `|−⟩⟨−|`.
    pub fn ground_coefficients(&self) -> [C64; 4] {
        self.coefficients(&ComplexMat2::PROJ_MINUS)
    }

    /// Largest residual `‖𝓛(μᵏ) − λᵏ μᵏ‖` over the four elements.
    pub fn eigen_residual(&self) -> f64 {
        self.right
            .iter()
            .map(|e| (dissipator(self.gamma, self.nbar, &e.matrix) - e.matrix * e.eigenvalue).max_abs())
            .fold(0.0, f64::max)
    }
}

/// Biorthogonality defect `max |Tr[μ̌ᵏ μᵏ'] − δₖₖ'|`.
pub fn biorthogonality_defect(basis: &DampingBasis) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..4 {
        for l in 0..4 {
            let target = if k == l { 1.0 } else { 0.0 };
            let v = (basis.dual[k] * basis.right[l].matrix).trace();
            worst = worst.max((v - C64::new(target, 0.0)).norm());
        }
    }
    worst
}
